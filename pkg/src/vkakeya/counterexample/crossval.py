"""Randomized-sign cross-check of the square-function inequality on a periodic grid.

On an N x N torus the strip and annulus multipliers become lattice symbols.
For Rademacher signs r_nu, each draw gives the ratio

    || sum r_nu T g_nu ||_{p'} / || sum r_nu g_nu ||_{p'},    T = u(|D| - R),

and their maximum is an empirical lower estimate C_hat of the norm of T.  We
then check  L_grid <= K_{p'} C_hat R_grid  for the grid square functions.

Neither the strip of width 2^n eps nor the ring of width 4 eps^2 is resolved
by the lattice at desk sizes, so the symbols are averaged over each lattice
cell instead of point-sampled; this keeps every operator a well-defined
Fourier multiplier on the torus, which is all the inequality needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..field import Field2D, Grid2D, forward_transform, inverse_transform, lp_norm
from .kernels import f_nu_eval, h_nu
from .lower_bound import khinchine_constant, lower_bound_estimate
from .params import ExampleParams

__all__ = ["KhinchineCheck", "cell_averaged_strip", "cell_averaged_ring", "khinchine_crossval"]


def _offsets(step: float, m: int) -> np.ndarray:
    return ((np.arange(m) + 0.5) / m - 0.5) * step


def cell_averaged_strip(params: ExampleParams, nu: int, grid: Grid2D, sub: int = 64) -> np.ndarray:
    """Cell means of h_nu(xi_2) along the lattice frequency axis."""
    k = grid.frequency_axis()
    d = _offsets(grid.frequency_step, sub)
    return h_nu(params, nu, k[:, None] + d[None, :]).mean(axis=1)


def cell_averaged_ring(params: ExampleParams, grid: Grid2D, sub: int = 64) -> np.ndarray:
    """Cell means of u(|xi| - R) on the lattice; zero away from the ring."""
    xi1, xi2 = grid.frequencies()
    step = grid.frequency_step
    reach = params.u.support + step / np.sqrt(2.0)
    near = np.abs(np.hypot(xi1, xi2) - params.radius) <= reach
    out = np.zeros(xi1.shape)
    d = _offsets(step, sub)
    d1, d2 = np.meshgrid(d, d, indexing="ij")
    idx = np.argwhere(near)
    for chunk in np.array_split(idx, max(1, len(idx) // 256)):
        c1 = xi1[chunk[:, 0], chunk[:, 1]][:, None, None] + d1
        c2 = xi2[chunk[:, 0], chunk[:, 1]][:, None, None] + d2
        out[chunk[:, 0], chunk[:, 1]] = params.u(np.hypot(c1, c2) - params.radius).mean(axis=(1, 2))
    return out


@dataclass
class KhinchineCheck:
    n: int
    p: float
    draws: int
    seed: int
    grid_size: int
    grid_side: float
    L_grid: float
    R_grid: float
    K_pprime: float
    C_hat: float
    ratios: np.ndarray = field(repr=False)
    L_ledger: float = float("nan")
    R_ledger: float = float("nan")

    @property
    def grid_margin(self) -> float:
        """K C_hat R_grid / L_grid; the check holds when this is >= 1."""
        return self.K_pprime * self.C_hat * self.R_grid / self.L_grid

    @property
    def ledger_margin(self) -> float:
        return self.K_pprime * self.C_hat * self.R_ledger / self.L_ledger

    @property
    def passed(self) -> bool:
        ok = self.grid_margin >= 1.0
        if np.isfinite(self.L_ledger):
            ok = ok and self.ledger_margin >= 1.0
        return bool(ok)


def khinchine_crossval(
    params: ExampleParams,
    draws: int = 64,
    seed: int = 0,
    size: int = 1024,
    side: float = 32.0,
    with_ledger: bool = True,
) -> KhinchineCheck:
    """Estimate C_hat from ``draws`` sign patterns and compare L with K C_hat R on the grid."""
    if draws < 1:
        raise ValueError("need at least one sign draw")
    grid = Grid2D(size, side, (2.0 - side / 2, 1.0 - side / 2))
    if grid.nyquist <= params.radius + params.strip_halfwidth():
        raise ValueError(f"grid Nyquist {grid.nyquist:.4g} does not reach the ring at radius {params.radius}")
    X, Y = grid.points()
    pts = np.stack([X, Y], axis=-1)
    ring = cell_averaged_ring(params, grid)
    g = np.empty((params.count, size, size), dtype=complex)
    G = np.empty_like(g)
    for nu in range(params.count):
        spec = forward_transform(Field2D(grid, f_nu_eval(params, nu, pts)))
        s = spec.multiply(cell_averaged_strip(params, nu, grid)[None, :])
        g[nu] = inverse_transform(s).samples
        G[nu] = inverse_transform(s.multiply(ring)).samples
    pp = params.dual_exponent
    h = grid.spacing
    R_grid = lp_norm(np.sqrt(np.sum(np.abs(g) ** 2, axis=0)), pp, h)
    L_grid = lp_norm(np.sqrt(np.sum(np.abs(G) ** 2, axis=0)), pp, h)
    rng = np.random.Generator(np.random.Philox(seed))
    signs = rng.choice([-1.0, 1.0], size=(draws, params.count))
    ratios = np.array(
        [lp_norm(np.tensordot(r, G, axes=1), pp, h) / lp_norm(np.tensordot(r, g, axes=1), pp, h) for r in signs]
    )
    check = KhinchineCheck(
        params.n, params.p, draws, seed, size, side, L_grid, R_grid,
        khinchine_constant(pp), float(ratios.max()), ratios,
    )
    if with_ledger:
        _, led = lower_bound_estimate(params)
        check.L_ledger, check.R_ledger = led.L, led.R
    return check
