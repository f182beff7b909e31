"""Sampled complex fields on a periodic square and their Fourier coefficients.

Normalization
-------------
Samples live at ``x_ij = origin + (i, j) * h`` with ``h = L / N``.  The
coefficient attached to the lattice frequency ``xi = 2*pi*k / L`` is the
Riemann sum of the unitary continuous transform,

    coeffs[k] = h**2 / (2*pi) * sum_ij f(x_ij) * exp(-i <xi_k, x_ij>),

so the phase of the origin is included and a constant field ``c`` has the
single coefficient ``c * L**2 / (2*pi)`` at ``xi = 0``.  The inverse is the
matching Riemann sum over the frequency lattice (cell area ``(2*pi/L)**2``):

    f(x) = (1 / (2*pi)) * (2*pi/L)**2 * sum_k coeffs[k] * exp(i <xi_k, x>).

With this choice Parseval reads

    sum |f|**2 * h**2 == sum |coeffs|**2 * (2*pi/L)**2.

Arrays are indexed ``[i, j]`` with ``i`` along the first coordinate and
frequencies stored in ``numpy.fft`` order.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Grid2D",
    "Field2D",
    "Spectrum2D",
    "NyquistWarning",
    "forward_transform",
    "inverse_transform",
    "project_ball",
    "project_annulus",
    "lp_norm",
    "inner_product",
    "write_field_dump",
    "read_field_dump",
    "write_pgm",
]

_MAGIC = b"VK2D"
_HEADER = struct.Struct("<4sIddd")


class NyquistWarning(UserWarning):
    """A frequency cutoff lies at or beyond the grid's Nyquist radius."""


@dataclass(frozen=True)
class Grid2D:
    size: int
    side: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        n = int(self.size)
        if n < 8 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.size}")
        if not (np.isfinite(self.side) and self.side > 0):
            raise ValueError(f"grid side must be positive, got {self.side}")
        object.__setattr__(self, "size", n)
        object.__setattr__(self, "side", float(self.side))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def centered(cls, size: int, side: float) -> "Grid2D":
        return cls(size, side, (-side / 2, -side / 2))

    @property
    def spacing(self) -> float:
        return self.side / self.size

    @property
    def nyquist(self) -> float:
        return np.pi * self.size / self.side

    @property
    def frequency_step(self) -> float:
        return 2 * np.pi / self.side

    def axis(self) -> tuple[np.ndarray, np.ndarray]:
        i = np.arange(self.size) * self.spacing
        return self.origin[0] + i, self.origin[1] + i

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        x1, x2 = self.axis()
        return np.meshgrid(x1, x2, indexing="ij")

    def frequency_axis(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.size, d=self.spacing)

    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.frequency_axis()
        return np.meshgrid(k, k, indexing="ij")

    def frequency_modulus(self) -> np.ndarray:
        xi1, xi2 = self.frequencies()
        return np.hypot(xi1, xi2)

    def lattice_index(self, k1: int, k2: int) -> tuple[int, int]:
        """Array position of the lattice frequency 2*pi*(k1, k2)/L."""
        half = self.size // 2
        for k in (k1, k2):
            if not -half <= k < half:
                raise ValueError(f"lattice index {k} outside [-{half}, {half})")
        return k1 % self.size, k2 % self.size


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))
        raise ValueError(f"{what} has {len(bad)} non-finite entries, first at {tuple(bad[0])}")


@dataclass(frozen=True, eq=False)
class Field2D:
    grid: Grid2D
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128)
        n = self.grid.size
        if s.shape != (n, n):
            raise ValueError(f"samples must have shape {(n, n)}, got {s.shape}")
        _check_finite(s, "field")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: Grid2D, func) -> "Field2D":
        x1, x2 = grid.points()
        return cls(grid, func(x1, x2))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Field2D":
        return cls(grid, np.zeros((grid.size, grid.size)))

    @classmethod
    def lattice_wave(cls, grid: Grid2D, k1: int, k2: int) -> "Field2D":
        xi = grid.frequency_step
        return cls.from_function(grid, lambda a, b: np.exp(1j * xi * (k1 * a + k2 * b)))

    def __mul__(self, c) -> "Field2D":
        return Field2D(self.grid, self.samples * c)

    __rmul__ = __mul__

    def __add__(self, other: "Field2D") -> "Field2D":
        _same_grid(self.grid, other.grid)
        return Field2D(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Field2D") -> "Field2D":
        _same_grid(self.grid, other.grid)
        return Field2D(self.grid, self.samples - other.samples)


@dataclass(frozen=True, eq=False)
class Spectrum2D:
    grid: Grid2D
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        n = self.grid.size
        if c.shape != (n, n):
            raise ValueError(f"coefficients must have shape {(n, n)}, got {c.shape}")
        _check_finite(c, "spectrum")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def at(self, k1: int, k2: int) -> complex:
        return complex(self.coeffs[self.grid.lattice_index(k1, k2)])

    def multiply(self, symbol: np.ndarray) -> "Spectrum2D":
        return Spectrum2D(self.grid, self.coeffs * symbol)


def _same_grid(a: Grid2D, b: Grid2D) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def _origin_phase(grid: Grid2D) -> np.ndarray:
    xi1, xi2 = grid.frequencies()
    return np.exp(-1j * (xi1 * grid.origin[0] + xi2 * grid.origin[1]))


def forward_transform(f: Field2D) -> Spectrum2D:
    g = f.grid
    _check_finite(f.samples, "field")
    c = np.fft.fft2(f.samples) * (g.spacing**2 / (2 * np.pi))
    if g.origin != (0.0, 0.0):
        c *= _origin_phase(g)
    return Spectrum2D(g, c)


def inverse_transform(s: Spectrum2D, grid: Grid2D | None = None) -> Field2D:
    g = s.grid
    if grid is not None:
        _same_grid(grid, g)
    c = s.coeffs
    if g.origin != (0.0, 0.0):
        c = c * np.conj(_origin_phase(g))
    return Field2D(g, np.fft.ifft2(c) * (2 * np.pi / g.spacing**2))


def apply_symbol(f: Field2D, symbol: np.ndarray) -> Field2D:
    """Multiply the spectrum of ``f`` by ``symbol`` sampled on the lattice."""
    return inverse_transform(forward_transform(f).multiply(symbol))


def project_ball(f: Field2D, lam: float) -> Field2D:
    if not lam > 0:
        raise ValueError(f"cutoff must be positive, got {lam}")
    g = f.grid
    if lam >= g.nyquist:
        warnings.warn(
            f"cutoff {lam} >= Nyquist radius {g.nyquist} (N={g.size}, L={g.side}); projection is the identity",
            NyquistWarning,
            stacklevel=2,
        )
        return f
    return apply_symbol(f, g.frequency_modulus() <= lam)


def project_annulus(f: Field2D, lam1: float, lam2: float) -> Field2D:
    if not 0 < lam1 < lam2:
        raise ValueError(f"annulus needs 0 < lam1 < lam2, got {lam1}, {lam2}")
    r = f.grid.frequency_modulus()
    return apply_symbol(f, (r >= lam1) & (r <= lam2))


def lp_norm(f: Field2D | np.ndarray, p: float, spacing: float | None = None) -> float:
    """Discrete L^p norm (sum |f|^p h^2)^(1/p); max |f| for p = inf.

    A bare array is accepted together with an explicit ``spacing``.
    """
    if isinstance(f, Field2D):
        values, h = f.samples, f.grid.spacing
    else:
        if spacing is None:
            raise ValueError("spacing is required for bare arrays")
        values, h = np.asarray(f), spacing
    if not p >= 1:
        raise ValueError(f"exponent must satisfy p >= 1, got {p}")
    a = np.abs(values)
    if np.isinf(p):
        return float(a.max())
    scale = a.max()
    if scale == 0:
        return 0.0
    return float(scale * (np.sum((a / scale) ** p) * h * h) ** (1.0 / p))


def inner_product(f: Field2D, g: Field2D) -> complex:
    _same_grid(f.grid, g.grid)
    return complex(np.vdot(g.samples, f.samples) * f.grid.spacing**2)


def write_field_dump(f: Field2D, path: str | Path) -> None:
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, g.size, g.side, g.origin[0], g.origin[1]))
        fh.write(np.ascontiguousarray(f.samples, dtype="<c16").tobytes())


def read_field_dump(path: str | Path) -> Field2D:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated field dump header")
    magic, n, side, ox, oy = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    body = raw[_HEADER.size:]
    if len(body) != 16 * n * n:
        raise ValueError(f"expected {16 * n * n} payload bytes, got {len(body)}")
    samples = np.frombuffer(body, dtype="<c16").reshape(n, n)
    return Field2D(Grid2D(n, side, (ox, oy)), samples)


def write_pgm(values: np.ndarray, path: str | Path, *, label: str = "|f|") -> tuple[float, float]:
    """Write ``values`` as a 16-bit binary PGM heatmap plus a ``.scale.txt`` sidecar.

    Pixel ``v = round(65535 * (a - lo) / (hi - lo))`` with ``a = |values|``.
    Column index is the first array axis; the top row is the largest second
    index, so the image is oriented with the second coordinate pointing up.
    Returns ``(lo, hi)``.
    """
    a = np.abs(np.asarray(values, dtype=np.complex128))
    if a.ndim != 2:
        raise ValueError("heatmap needs a 2D array")
    lo, hi = float(a.min()), float(a.max())
    span = hi - lo if hi > lo else 1.0
    img = np.rint((a - lo) / span * 65535.0).astype(">u2")
    img = np.ascontiguousarray(img.T[::-1])
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n65535\n".encode("ascii"))
        fh.write(img.tobytes())
    sidecar = path.with_suffix(path.suffix + ".scale.txt")
    sidecar.write_text(
        f"quantity {label}\nscaling linear\nmin {lo!r}\nmax {hi!r}\n"
        f"pixel round(65535*(value-min)/(max-min))\n"
        f"orientation column=first index, top row=last second index\n"
    )
    return lo, hi
