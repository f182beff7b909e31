"""Radial and angular Fourier multipliers acting on :class:`Field2D`.

Every operator samples its symbol at the lattice frequencies and multiplies
the spectrum, so all of them commute with each other up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bessel import bessel_j0, bessel_j1
from .field import Field2D, apply_symbol

__all__ = [
    "bump",
    "smooth_step",
    "RadialProfile",
    "bump_profile",
    "indicator_profile",
    "SectorCutoff",
    "circular_average",
    "d_dt_circular_average",
    "apply_radial_profile",
    "half_wave",
    "sector_projection",
    "stationary_phase_error",
    "circular_average_symbol",
]

BUMP_AT_HALF = float(np.exp(-1.0 / 3.0))


def bump(s) -> np.ndarray:
    """b(s) = exp(1 - 1/(1 - s^2)) on (-1, 1), zero outside; b(0) = 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def smooth_step(s) -> np.ndarray:
    """C-infinity step: 1 for s <= 0, 0 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        g0 = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        g1 = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return g1 / (g0 + g1)


@dataclass(frozen=True)
class RadialProfile:
    """A nonnegative even profile supported in [-support, support]."""

    name: str
    support: float
    evaluate: Callable[[np.ndarray], np.ndarray]
    smoothness_class: str = "smooth-bump"

    def __post_init__(self):
        if self.smoothness_class not in ("bounded", "twice-differentiable", "smooth-bump"):
            raise ValueError(f"unknown smoothness class {self.smoothness_class!r}")
        if not self.support > 0:
            raise ValueError("support half-width must be positive")

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.where(np.abs(s) <= self.support, self.evaluate(s), 0.0)

    def peak(self) -> float:
        return float(self(np.linspace(-self.support, self.support, 4097)).max())

    def check_lower_bound(self, samples: int = 2049) -> float:
        """Minimum over [-s/2, s/2]; a profile fit for the lower-bound role returns >= 1."""
        s = np.linspace(-self.support / 2, self.support / 2, samples)
        return float(self(s).min())


def bump_profile(support: float, name: str = "bump", floor_one: bool = True) -> RadialProfile:
    """Rescaled bump on [-support, support].

    With ``floor_one`` the profile is divided by b(1/2), so it is >= 1 on the
    middle half of its support and peaks at e^(1/3).
    """
    scale = 1.0 / BUMP_AT_HALF if floor_one else 1.0
    return RadialProfile(name, support, lambda s: scale * bump(np.asarray(s) / support))


def indicator_profile(support: float, name: str = "indicator") -> RadialProfile:
    return RadialProfile(name, support, lambda s: np.ones_like(np.asarray(s, dtype=float)), "bounded")


@dataclass(frozen=True)
class SectorCutoff:
    """Smooth angular cutoff: 1 within half_angle/2 of the centre direction, 0 beyond half_angle."""

    center_direction: tuple[float, float]
    half_angle: float

    def __post_init__(self):
        d = np.asarray(self.center_direction, dtype=float)
        norm = np.hypot(*d)
        if norm == 0:
            raise ValueError("centre direction must be non-zero")
        object.__setattr__(self, "center_direction", (float(d[0] / norm), float(d[1] / norm)))
        if not 0 < self.half_angle <= np.pi:
            raise ValueError("half angle must lie in (0, pi]")

    def angular(self, alpha) -> np.ndarray:
        """Value as a function of the angle measured from the centre direction."""
        a = np.abs(np.angle(np.exp(1j * np.asarray(alpha, dtype=float))))
        return smooth_step((a - self.half_angle / 2) / (self.half_angle / 2))

    def __call__(self, xi1, xi2) -> np.ndarray:
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        c0, c1 = self.center_direction
        alpha = np.arctan2(c0 * xi2 - c1 * xi1, c0 * xi1 + c1 * xi2)
        return np.where((xi1 == 0) & (xi2 == 0), 0.0, self.angular(alpha))


def circular_average_symbol(modulus: np.ndarray, t: float) -> np.ndarray:
    return bessel_j0(t * modulus)


def circular_average(f: Field2D, t: float) -> Field2D:
    """Mean of f over circles of radius t: the multiplier J0(t|xi|)."""
    if t < 0:
        raise ValueError("radius must be non-negative")
    return apply_symbol(f, circular_average_symbol(f.grid.frequency_modulus(), t))


def d_dt_circular_average(f: Field2D, t: float) -> Field2D:
    if not t > 0:
        raise ValueError("radius must be positive")
    r = f.grid.frequency_modulus()
    return apply_symbol(f, -r * bessel_j1(t * r))


def apply_radial_profile(f: Field2D, u: RadialProfile, lam: float) -> Field2D:
    """Multiplier u(|xi| - lam)."""
    if lam < 0:
        raise ValueError("centre radius must be non-negative")
    return apply_symbol(f, u(f.grid.frequency_modulus() - lam))


def half_wave(f: Field2D, t: float) -> Field2D:
    return apply_symbol(f, np.exp(-1j * t * f.grid.frequency_modulus()))


def sector_projection(f: Field2D, c: SectorCutoff) -> Field2D:
    xi1, xi2 = f.grid.frequencies()
    return apply_symbol(f, c(xi1, xi2))


def stationary_phase_error(r_min: float, r_max: float, samples: int) -> float:
    """sup of r^(3/2) |J0(r) - sqrt(2/(pi r)) cos(r - pi/4)| over log-spaced r."""
    if r_min < 10:
        raise ValueError("stationary-phase check is restricted to r_min >= 10")
    if not r_max > r_min or samples < 2:
        raise ValueError("need r_min < r_max and at least two samples")
    r = np.geomspace(r_min, r_max, samples)
    principal = np.sqrt(1.0 / (np.pi * r)) * (np.cos(r) + np.sin(r))
    return float(np.max(r**1.5 * np.abs(bessel_j0(r) - principal)))
