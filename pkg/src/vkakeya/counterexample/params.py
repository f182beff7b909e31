"""Parameters, direction frames and frequency boxes for the annulus lower bound."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from ..besicovitch import TriangleFamily, keich_family
from ..multipliers import RadialProfile, bump_profile

__all__ = [
    "OutOfContract",
    "ExampleParams",
    "DirectionFrame",
    "KernelBox",
    "default_psi",
    "default_u",
]

DEFAULT_EPS = 2.0**-5


class OutOfContract(ValueError):
    """Parameters outside the range where the stated bounds are meant to hold."""


@functools.lru_cache(maxsize=1)
def default_psi() -> RadialProfile:
    return bump_profile(0.5, name="psi")


@functools.lru_cache(maxsize=16)
def default_u(eps: float) -> RadialProfile:
    return bump_profile(2.0 * eps * eps, name="u")


@functools.lru_cache(maxsize=16)
def _cached_family(n: int, schedule: str) -> TriangleFamily:
    return keich_family(n, schedule=schedule)


@dataclass(frozen=True, eq=False)
class ExampleParams:
    """n (frequency radius 4**n), eps, exponent p and the two profiles.

    The triangle family is built lazily (and cached per order) because the
    pure frequency-side checks only need the slopes nu / 2**n.
    """

    n: int
    eps: float = DEFAULT_EPS
    p: float = 4.0
    psi: RadialProfile = field(default_factory=default_psi)
    u: RadialProfile | None = None
    schedule: str = "classical"
    _family: TriangleFamily | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 1 <= self.n <= 12:
            raise OutOfContract(f"order n must lie in [1, 12], got {self.n}")
        if not 0 < self.eps <= 1.0 / 16:
            raise OutOfContract(f"eps must lie in (0, 1/16], got {self.eps}")
        if not self.p >= 2:
            raise OutOfContract(f"exponent p must be >= 2, got {self.p}")
        if self.u is None:
            object.__setattr__(self, "u", default_u(self.eps))
        if self.psi.support > 0.5 + 1e-15 or self.psi.check_lower_bound() < 1.0:
            raise OutOfContract("psi must be supported in [-1/2, 1/2] and >= 1 on [-1/4, 1/4]")
        s = 2.0 * self.eps**2
        if self.u.support > s * (1 + 1e-12):
            raise OutOfContract("u must be supported in [-2 eps^2, 2 eps^2]")
        grid = np.linspace(-self.eps**2, self.eps**2, 1025)
        if self.u(grid).min() < 1.0:
            raise OutOfContract("u must be >= 1 on [-eps^2, eps^2]")
        if self._family is not None and self._family.n != self.n:
            raise ValueError("family order does not match n")

    @property
    def radius(self) -> float:
        return 4.0**self.n

    @property
    def count(self) -> int:
        return 2**self.n

    @property
    def dual_exponent(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def family(self) -> TriangleFamily:
        if self._family is None:
            object.__setattr__(self, "_family", _cached_family(self.n, self.schedule))
        return self._family

    def slope(self, nu: int) -> float:
        self.check_index(nu)
        return nu * 2.0**-self.n

    def check_index(self, nu: int) -> None:
        if not 0 <= nu < self.count:
            raise IndexError(f"direction index {nu} outside [0, {self.count})")

    def frame(self, nu: int) -> "DirectionFrame":
        return DirectionFrame.of(nu, self.slope(nu))

    def strip_center(self, nu: int) -> float:
        a = self.slope(nu)
        return self.radius * a / np.sqrt(1.0 + a * a)

    def strip_halfwidth(self) -> float:
        return 2.0 ** (self.n - 1) * self.eps

    def with_p(self, p: float) -> "ExampleParams":
        return ExampleParams(self.n, self.eps, p, self.psi, self.u, self.schedule, self._family)


@dataclass(frozen=True)
class DirectionFrame:
    nu: int
    e: np.ndarray
    e_perp: np.ndarray

    @classmethod
    def of(cls, nu: int, a: float) -> "DirectionFrame":
        c = np.sqrt(1.0 + a * a)
        return cls(nu, np.array([1.0, a]) / c, np.array([-a, 1.0]) / c)

    @property
    def slope(self) -> float:
        return float(self.e[1] / self.e[0])

    def coordinates(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        return x @ self.e, x @ self.e_perp


@dataclass(frozen=True)
class KernelBox:
    """Rectangle in (e, e_perp) coordinates about radius * e that holds the kernel's frequency support."""

    frame: DirectionFrame
    center: float
    along_halfwidth: float
    perp_halfwidth: float
    nodes: tuple[int, int] = (24, 64)

    @classmethod
    def build(cls, params: ExampleParams, nu: int, nodes=(24, 64), verify: int = 4000, seed: int = 0) -> "KernelBox":
        box = cls(params.frame(nu), params.radius, 64.0 * params.eps**2, 2.0 ** (params.n + 2) * params.eps, nodes)
        if verify:
            from .bounds import sample_support

            xi = sample_support(params, nu, verify, np.random.Generator(np.random.Philox(seed)))
            along, perp = box.offsets(xi)
            worst = max(np.abs(along).max() / box.along_halfwidth, np.abs(perp).max() / box.perp_halfwidth)
            if worst > 1.0:
                raise AssertionError(f"kernel support leaves its box (normalized excess {worst:.3g})")
        return box

    def offsets(self, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi = np.asarray(xi, dtype=float)
        e, ep = self.frame.e, self.frame.e_perp
        # <e, xi - R e> without cancelling two numbers of size R
        along = (xi[..., 0] - self.center * e[0]) * e[0] + (xi[..., 1] - self.center * e[1]) * e[1]
        return along, xi @ ep
