"""Grid studies: localized square function of circular means, the derivative bound, and variation of A_t f(x0)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field import Field2D, Grid2D, Spectrum2D, forward_transform, inverse_transform, lp_norm, project_annulus, project_ball
from .multipliers import bump, circular_average, d_dt_circular_average
from .varnorm import (
    EMBEDDING_CONSTANT,
    TimeSeries,
    besov_seminorm,
    brute_force_variation,
    sup_norm,
    trapezoid_weights,
    variation_norm,
)

__all__ = [
    "CHI_HALF_ANGLE",
    "ANGULAR_NODES",
    "SQUAREFN_TIMES",
    "white_noise",
    "study_rng",
    "angular_symbol",
    "SquareFnResult",
    "squarefn_study",
    "squarefn_statistic",
    "DerivativeBoundResult",
    "derivative_ratio",
    "derivative_bound_study",
    "VariationDemo",
    "variation_demo",
    "DEMO_PROFILES",
]

CHI_HALF_ANGLE = np.pi / 8
ANGULAR_NODES = 256
SQUAREFN_TIMES = np.linspace(1.25, 1.75, 33)
DERIVATIVE_TIMES = np.linspace(1.0, 2.0, 5)


def study_rng(seed: int, *keys: int) -> np.random.Generator:
    """Philox stream for one (seed, keys) cell, independent of evaluation order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *keys])))


def white_noise(grid: Grid2D, rng: np.random.Generator) -> Field2D:
    z = rng.standard_normal((2, grid.size, grid.size))
    return Field2D(grid, (z[0] + 1j * z[1]) / np.sqrt(2.0))


def _angular_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    # chi vanishes to all orders at the ends, so the equal-weight rule is spectrally accurate
    h = 2 * CHI_HALF_ANGLE / nodes
    alpha = -CHI_HALF_ANGLE + (np.arange(nodes) + 0.5) * h
    return alpha, bump(alpha / CHI_HALF_ANGLE) * h / (2 * np.pi)


def angular_symbol(xi1, xi2, t: float, nodes: int = ANGULAR_NODES, chunk: int = 4096) -> np.ndarray:
    """(2 pi)^-1 int chi(alpha) exp(-i t <xi, (cos alpha, sin alpha)>) d alpha at the given frequencies."""
    xi1 = np.asarray(xi1, dtype=float).ravel()
    xi2 = np.asarray(xi2, dtype=float).ravel()
    alpha, w = _angular_rule(nodes)
    c, s = np.cos(alpha), np.sin(alpha)
    out = np.empty(xi1.size, dtype=complex)
    for k in range(0, xi1.size, chunk):
        phase = np.outer(xi1[k : k + chunk], c) + np.outer(xi2[k : k + chunk], s)
        out[k : k + chunk] = np.exp(-1j * t * phase) @ w
    return out


def _annulus_support(grid: Grid2D, lam: float) -> np.ndarray:
    r = grid.frequency_modulus()
    return np.argwhere((r >= lam / 4) & (r <= lam))


@dataclass
class _SquareFnSymbols:
    index: np.ndarray
    values: np.ndarray  # (times, points)
    error_estimate: float


def _squarefn_symbols(grid: Grid2D, lam: float, times: np.ndarray, check_points: int = 512) -> _SquareFnSymbols:
    idx = _annulus_support(grid, lam)
    xi1, xi2 = grid.frequencies()
    a, b = xi1[idx[:, 0], idx[:, 1]], xi2[idx[:, 0], idx[:, 1]]
    vals = np.stack([angular_symbol(a, b, t) for t in times])
    # doubling check on the outermost points at the largest radius
    far = np.argsort(np.hypot(a, b))[-check_points:]
    t = float(times.max())
    err = float(np.abs(angular_symbol(a[far], b[far], t, 2 * ANGULAR_NODES) - vals[-1, far]).max())
    return _SquareFnSymbols(idx, vals, err)


def squarefn_statistic(g: Field2D, lam: float, ps, symbols: _SquareFnSymbols | None = None, times=SQUAREFN_TIMES) -> dict:
    """Q_p(g) = lam^(1/2) || (int |(chi sigma)_t * g|^2 dt)^(1/2) ||_p / ||g||_p for each p."""
    times = np.asarray(times, dtype=float)
    if symbols is None:
        symbols = _squarefn_symbols(g.grid, lam, times)
    spec = forward_transform(g)
    coeffs = spec.coeffs[symbols.index[:, 0], symbols.index[:, 1]]
    w = trapezoid_weights(times)
    acc = np.zeros((g.grid.size, g.grid.size))
    buf = np.zeros_like(spec.coeffs)
    for wk, sym in zip(w, symbols.values):
        buf[symbols.index[:, 0], symbols.index[:, 1]] = coeffs * sym
        layer = inverse_transform(Spectrum2D(g.grid, buf)).samples
        acc += wk * (layer.real**2 + layer.imag**2)
    root = np.sqrt(acc)
    h = g.grid.spacing
    return {p: float(np.sqrt(lam) * lp_norm(root, p, h) / lp_norm(g, p)) for p in ps}


@dataclass
class SquareFnResult:
    lam: float
    ps: tuple
    trials: int
    seed: int
    grid: Grid2D
    Q: dict = field(repr=False)  # p -> array over trials
    quadrature_error: float = 0.0

    def max(self, p) -> float:
        return float(np.max(self.Q[p]))

    def median(self, p) -> float:
        return float(np.median(self.Q[p]))


def squarefn_study(lam: float, ps=(2.0, 4.0), trials: int = 20, seed: int = 0, size: int = 1024, side: float = np.pi) -> SquareFnResult:
    grid = Grid2D.centered(size, side)
    if lam > grid.nyquist / 4:
        raise ValueError(f"lambda={lam} exceeds Nyquist/4 = {grid.nyquist / 4:.4g} for N={size}, L={side:.4g}")
    for p in ps:
        if p not in (2, 3, 4):
            raise ValueError(f"p must be one of 2, 3, 4, got {p}")
    symbols = _squarefn_symbols(grid, lam, SQUAREFN_TIMES)
    Q = {p: np.empty(trials) for p in ps}
    for k in range(trials):
        g = project_annulus(white_noise(grid, study_rng(seed, int(lam), k)), lam / 4, lam)
        for p, q in squarefn_statistic(g, lam, ps, symbols).items():
            Q[p][k] = q
    return SquareFnResult(lam, tuple(ps), trials, seed, grid, Q, symbols.error_estimate)


@dataclass
class DerivativeBoundResult:
    lam: float
    ps: tuple
    trials: int
    seed: int
    grid: Grid2D
    ratios: dict = field(repr=False)

    def max(self, p) -> float:
        return float(np.max(self.ratios[p]))


def derivative_ratio(f: Field2D, lam: float, ps, times=DERIVATIVE_TIMES) -> dict:
    """sup_t ||d/dt A_t f||_p / (lam ||f||_p) over the sampled radii, for each p."""
    best = dict.fromkeys(ps, 0.0)
    for t in times:
        d = d_dt_circular_average(f, t)
        for p in ps:
            best[p] = max(best[p], lp_norm(d, p))
    out = {}
    for p in ps:
        norm = lp_norm(f, p)
        out[p] = 0.0 if norm == 0 else best[p] / (lam * norm)
    return out


def derivative_bound_study(lam: float, ps=(2.0, 4.0), trials: int = 20, seed: int = 0, size: int = 1024, side: float = 8.0) -> DerivativeBoundResult:
    grid = Grid2D.centered(size, side)
    if lam >= grid.nyquist:
        raise ValueError(f"lambda={lam} exceeds the Nyquist radius {grid.nyquist:.4g}")
    ratios = {p: np.empty(trials) for p in ps}
    for k in range(trials):
        f = project_ball(white_noise(grid, study_rng(seed, int(lam), k)), lam)
        for p, v in derivative_ratio(f, lam, ps).items():
            ratios[p][k] = v
    return DerivativeBoundResult(lam, tuple(ps), trials, seed, grid, ratios)


def _gaussian(x, y):
    return np.exp(-(x * x + y * y))


def _bump2(x, y):
    return bump(np.hypot(x, y) / 2.0)


def _wave(x, y):
    return np.exp(1j * 4.0 * x)


def _constant(x, y):
    return np.ones_like(x, dtype=complex)


DEMO_PROFILES = {"constant": _constant, "gaussian": _gaussian, "bump": _bump2, "wave": _wave}


@dataclass
class VariationDemo:
    profile: str
    series: TimeSeries
    variation: dict
    besov: float
    sup: float
    coarse_checks: list  # (r, dp, brute force) on a 12-point subsample
    refinement: dict  # r -> V_r on the doubled t-grid minus V_r on the base grid

    @property
    def embedding_bound(self) -> float:
        return EMBEDDING_CONSTANT * self.variation[2.0]


def variation_demo(profile: str = "gaussian", rs=(1.0, 1.5, 2.0, 3.0), samples: int = 64, size: int = 256, side: float = 16.0) -> VariationDemo:
    """t -> A_t f(0) for t in [1, 2) on a uniform grid, with its variation norms and Besov seminorm."""
    if profile not in DEMO_PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {sorted(DEMO_PROFILES)}")
    grid = Grid2D.centered(size, side)
    f = Field2D.from_function(grid, DEMO_PROFILES[profile])
    i0 = size // 2
    fine_t = 1.0 + np.arange(2 * samples) / (2 * samples)
    fine_v = np.array([circular_average(f, t).samples[i0, i0] for t in fine_t])
    s = TimeSeries(fine_t[::2], fine_v[::2])
    fine = TimeSeries(fine_t, fine_v)
    var = {float(r): variation_norm(s, r) for r in rs}
    delta = {float(r): variation_norm(fine, r) - var[float(r)] for r in rs}
    coarse = TimeSeries(s.times[::6][:12], s.values[::6][:12])
    checks = [(float(r), variation_norm(coarse, r), brute_force_variation(coarse, r)) for r in rs]
    return VariationDemo(profile, s, var, besov_seminorm(s), sup_norm(s), checks, delta)
