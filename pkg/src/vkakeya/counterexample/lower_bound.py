"""Square-function norms L and R, the certified ratio C_lower, and its growth in n.

With p' = p / (p - 1) and sign sums over independent Rademacher signs,

    L = || (sum_nu |K_nu * f_nu|^2)^(1/2) ||_{p'},
    R = || (sum_nu |kappa_nu *_2 f_nu|^2)^(1/2) ||_{p'},

and L <= K_{p'} C R whenever C bounds the multiplier u(|D| - 4^n) on L^{p'}
(hence on L^p by duality).  We use K_{p'} = sqrt(2): the lower
Khinchine-Kahane constant 1/sqrt(2) holds for sums with coefficients in any
normed space (here C = R^2) and every exponent >= 1, and the upper constant is
1 for exponents <= 2.  At p' = 2 both sides are equalities and K = 1.

L is evaluated on a window only, which can only lower it; the mirror arc of
the kernel support is bounded and subtracted.  R is evaluated on the whole
strip x_1 in [0, 1] out to a distance where a rigorous tail bound takes over,
and the tail bound is added.  Both choices keep L / (K R) below the
true ratio up to quadrature error.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates

from ..besicovitch import triangle_of, union_area
from .kernels import (
    KernelQuadrature,
    QuadratureError,
    _auto_nodes,
    convolve_on_reach,
    mirror_sheet_bound,
    psi_transform,
)
from .params import ExampleParams

__all__ = [
    "TruncationError",
    "khinchine_constant",
    "LowerBoundLedger",
    "lower_bound_estimate",
    "ScalingResult",
    "scaling_study",
    "square_sums",
    "convolution_heatmap",
]

DEFAULT_WINDOW = (-1.0, 5.0)
TAIL_WIDTH = 400.0  # strip half-width beyond the triangles, in units of 1 / (2^n eps)
TRUNCATION_LIMIT = 0.05
# relative to the peak of each demodulated convolution map
QUADRATURE_TOL = 1e-5
INTERPOLATION_TOL = 1e-4


class TruncationError(RuntimeError):
    pass


def khinchine_constant(dual_exponent: float) -> float:
    return 1.0 if dual_exponent == 2.0 else float(np.sqrt(2.0))


@dataclass
class SquareSums:
    """Sampled sum_nu |.|^2 for the two square functions, shared across exponents."""

    n: int
    eps: float
    window: tuple[float, float]
    L_sum: np.ndarray = field(repr=False)
    L_step: float = 0.0
    R_sum: np.ndarray = field(repr=False, default=None)
    R_cell: np.ndarray = field(repr=False, default=None)
    R_tail_coeff: float = 0.0
    tail_width: float = TAIL_WIDTH
    mirror: np.ndarray = field(repr=False, default=None)
    c_reach_per_nu: np.ndarray = field(repr=False, default=None)
    quadrature_error: float = 0.0
    interpolation_error: float = 0.0
    seconds: float = 0.0


def _edges(lo: float, hi: float, step: float) -> np.ndarray:
    k = max(1, int(np.ceil((hi - lo) / step - 1e-9)))
    return np.linspace(lo, hi, k + 1)


def _R_sums(params: ExampleParams, tail_width: float):
    n, eps = params.n, params.eps
    fam = params.family
    a, b = fam.slopes, fam.intercepts
    sig = 1.0 / (2.0**n * eps)
    kap = 2.0**n * eps
    hx = 2.0 ** (-n - 2)
    x1 = (np.arange(2 ** (n + 2)) + 0.5) * hx
    ymin = float(np.min(b)) - 2.0**-n
    ymax = float(np.max(a + b))
    core = _edges(ymin - 4 * sig, ymax + 4 * sig, hx)
    left = _edges(ymin - tail_width * sig, core[0], sig / 16)
    right = _edges(core[-1], ymax + tail_width * sig, sig / 16)
    y_edges = np.concatenate([left[:-1], core, right[1:]])
    y = 0.5 * (y_edges[1:] + y_edges[:-1])
    dy = np.diff(y_edges)
    phi = psi_transform(params.psi).phi
    S = np.zeros((x1.size, y.size))
    for av, bv in zip(a, b):
        hi = av * x1 + bv
        lo = hi - 2.0**-n * (1.0 - x1)
        g = phi(kap * (y[None, :] - lo[:, None])) - phi(kap * (y[None, :] - hi[:, None]))
        S += g * g
    # each |g_nu| <= (eps / 2 pi) B / w^2 at w-distance w >= tail_width, B = ||psi''||_1
    B = psi_transform(params.psi).second_derivative_l1()
    coeff = 2.0 ** (n / 2) * eps * B / (2 * np.pi)
    return S, np.outer(np.full(x1.size, hx), dy), coeff


def _L_sums(params: ExampleParams, window: tuple[float, float], check_points: int = 24, seed: int = 0):
    n = params.n
    w0, w1 = window
    hc = 2.0 ** (-n - 2)
    xs = _edges(w0, w1, hc)
    xs = 0.5 * (xs[1:] + xs[:-1])
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    corners = np.array([[w0, w0], [w0, w1], [w1, w0], [w1, w1]])
    S = np.zeros_like(X)
    rng = np.random.Generator(np.random.Philox(seed))
    probe = rng.uniform(w0, w1, (check_points, 2))
    quad_err = interp_err = 0.0
    fam = params.family
    for nu in range(params.count):
        frame = params.frame(nu)
        pe, pp = corners @ frame.e, corners @ frame.e_perp
        step_e, step_p = 1.0 / 8.0, 2.0**-n / 4.0
        se = np.arange(pe.min() - 2 * step_e, pe.max() + 3 * step_e, step_e)
        sp = np.arange(pp.min() - 2 * step_p, pp.max() + 3 * step_p, step_p)
        mr, mb = _auto_nodes(params, float(np.abs(se).max()), float(np.abs(sp).max()))
        q = KernelQuadrature(params, nu, mr, mb)
        tri = triangle_of(fam.segments[nu], n).vertices
        W = q.triangle_weights(tri)
        G = q.demodulated_grid(se, sp, W)
        ie = ((X * frame.e[0] + Y * frame.e[1]) - se[0]) / step_e
        ip = ((X * frame.e_perp[0] + Y * frame.e_perp[1]) - sp[0]) / step_p
        gr = map_coordinates(G.real, [ie, ip], order=3, mode="nearest")
        gi = map_coordinates(G.imag, [ie, ip], order=3, mode="nearest")
        S += gr * gr + gi * gi
        # self-checks at random window points
        ce, cp = probe @ frame.e, probe @ frame.e_perp
        direct = q.demodulated_points(ce, cp, W)
        q2 = q.refined()
        refined = q2.demodulated_points(ce, cp, q2.triangle_weights(tri))
        cie, cip = (ce - se[0]) / step_e, (cp - sp[0]) / step_p
        interp = map_coordinates(G.real, [cie, cip], order=3) + 1j * map_coordinates(G.imag, [cie, cip], order=3)
        peak = float(np.abs(G).max())
        quad_err = max(quad_err, float(np.abs(refined - direct).max()) / peak)
        interp_err = max(interp_err, float(np.abs(interp - direct).max()) / peak)
    return S, hc, quad_err, interp_err


_CACHE: dict = {}
_CACHE_SIZE = 8


def _square_sums_uncached(params, window, tail_width, seed):
    t0 = time.perf_counter()
    L_sum, hc, qerr, ierr = _L_sums(params, window, seed=seed)
    R_sum, R_cell, coeff = _R_sums(params, tail_width)
    mirror = np.array([mirror_sheet_bound(params, nu) for nu in range(params.count)])
    creach = np.array([convolve_on_reach(params, nu).min() for nu in range(params.count)])
    return SquareSums(
        params.n, params.eps, window, L_sum, hc, R_sum, R_cell, coeff, tail_width,
        mirror, creach, qerr, ierr, time.perf_counter() - t0,
    )


def square_sums(params: ExampleParams, window=DEFAULT_WINDOW, tail_width: float = TAIL_WIDTH, seed: int = 0) -> SquareSums:
    """Sampled square sums, cached per (n, eps, profiles, schedule, window) so exponents can share them."""
    key = (params.n, params.eps, params.psi, params.u, params.schedule, tuple(window), tail_width, seed)
    if key not in _CACHE:
        if len(_CACHE) >= _CACHE_SIZE:
            _CACHE.pop(next(iter(_CACHE)))
        _CACHE[key] = _square_sums_uncached(params, tuple(window), tail_width, seed)
    return _CACHE[key]


@dataclass
class LowerBoundLedger:
    n: int
    eps: float
    p: float
    L: float
    R: float
    K_pprime: float
    C_lower: float
    c_reach: float
    window: list
    truncation_estimate: float
    seed: int
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)


def lower_bound_estimate(
    params: ExampleParams,
    window=DEFAULT_WINDOW,
    seed: int = 0,
    tail_width: float = TAIL_WIDTH,
) -> tuple[float, LowerBoundLedger]:
    """C_lower = L / (K_{p'} R), a lower bound for the L^p norm of u(|D| - 4^n) up to quadrature error."""
    sums = square_sums(params, window, tail_width, seed)
    pp = params.dual_exponent
    area = (window[1] - window[0]) ** 2
    L_main = float((np.sum(sums.L_sum ** (pp / 2)) * sums.L_step**2) ** (1 / pp))
    mirror_lp = float(np.sqrt(np.sum(sums.mirror**2)) * area ** (1 / pp))
    L = L_main - mirror_lp
    R_trunc_pp = float(np.sum(sums.R_sum ** (pp / 2) * sums.R_cell))
    kap = 2.0**params.n * params.eps
    tail_pp = 2.0 * sums.R_tail_coeff**pp * tail_width ** (1 - 2 * pp) / ((2 * pp - 1) * kap)
    R_trunc = R_trunc_pp ** (1 / pp)
    R = (R_trunc_pp + tail_pp) ** (1 / pp)
    truncation = R - R_trunc
    if truncation > TRUNCATION_LIMIT * R:
        raise TruncationError(f"tail estimate {truncation:.3g} exceeds {TRUNCATION_LIMIT:.0%} of R={R:.3g}; widen the strip")
    if sums.quadrature_error > QUADRATURE_TOL or sums.interpolation_error > INTERPOLATION_TOL:
        raise QuadratureError(
            f"convolution maps: node doubling {sums.quadrature_error:.2g}, resampling {sums.interpolation_error:.2g} "
            f"(limits {QUADRATURE_TOL:g}, {INTERPOLATION_TOL:g})"
        )
    K = khinchine_constant(pp)
    C = L / (K * R)
    c_reach = float(sums.c_reach_per_nu.min())
    meas = union_area(params.family)
    total_area = 0.5  # 2^n triangles of area 2^(-n-1)
    details = {
        "dual_exponent": pp,
        "L_window_main_sheet": L_main,
        "mirror_sheet_bound": mirror_lp,
        "R_truncated": R_trunc,
        "tail_width": tail_width,
        # disjoint reaches, each of area 2^(-n-1), carry |K_nu * f_nu| >= c_reach
        "reach_comparator": 2.0 ** (-1 / pp) * c_reach * total_area ** (1 / pp),
        "R_scaled": R * params.n ** (1 / pp - 0.5),
        "union_measure": meas,
        "holder_comparator": meas ** (1 / pp - 0.5) * np.sqrt(total_area),
        "c_reach_spread": float(sums.c_reach_per_nu.max() / sums.c_reach_per_nu.min()),
        "kernel_quadrature_rel_error": sums.quadrature_error,
        "interpolation_rel_error": sums.interpolation_error,
        "grid_step": sums.L_step,
        "khinchine": "lower 1/sqrt(2) (Khinchine-Kahane, any normed space), upper 1 for exponent <= 2",
        "u_peak": params.u.peak(),
        "schedule": params.schedule,
        "seconds": sums.seconds,
    }
    ledger = LowerBoundLedger(
        params.n, params.eps, params.p, L, R, K, C, c_reach, list(window), truncation, seed, details
    )
    return C, ledger


@dataclass
class ScalingResult:
    p: float
    rows: list[tuple[int, float]]
    ledgers: list[LowerBoundLedger]
    slope: float | None
    intercept: float | None


def scaling_study(p: float, n_range, eps: float = 2.0**-5, window=DEFAULT_WINDOW, seed: int = 0) -> ScalingResult:
    """C_lower per n and the least-squares slope of log C_lower against log n."""
    ns = list(n_range)
    if not ns:
        raise ValueError("empty n range")
    rows, ledgers = [], []
    for n in ns:
        C, led = lower_bound_estimate(ExampleParams(n, eps, p), window, seed)
        rows.append((n, C))
        ledgers.append(led)
    slope = intercept = None
    if len(ns) >= 2:
        slope, intercept = (float(v) for v in np.polyfit(np.log(ns), np.log([c for _, c in rows]), 1))
    return ScalingResult(p, rows, ledgers, slope, intercept)


def convolution_heatmap(params: ExampleParams, nu: int, window=DEFAULT_WINDOW, size: int = 512) -> np.ndarray:
    """|K_nu * f_nu| on a size x size grid over window^2 (rows follow x_1), for PGM output."""
    params.check_index(nu)
    n = params.n
    xs = np.linspace(window[0], window[1], size)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    frame = params.frame(nu)
    ze, zp = X * frame.e[0] + Y * frame.e[1], X * frame.e_perp[0] + Y * frame.e_perp[1]
    mr, mb = _auto_nodes(params, float(np.abs(ze).max()), float(np.abs(zp).max()))
    q = KernelQuadrature(params, nu, mr, mb)
    W = q.triangle_weights(triangle_of(params.family.segments[nu], n).vertices)
    return np.abs(q.demodulated_points(ze.ravel(), zp.ravel(), W)).reshape(X.shape)
