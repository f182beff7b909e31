"""Modulated triangle functions, strip kernels and annulus kernels.

Fourier convention: ``g^(xi) = int g(y) e^{-i<y, xi>} dy`` and
``g(x) = (2 pi)^-2 int g^(xi) e^{i<x, xi>} dxi`` (``(2 pi)^-1`` in 1D).

Annulus kernel.  The support of ``u(|xi| - R) h_nu(xi_2)`` consists of two
congruent arcs, one near ``R e_nu`` (``xi_1 > 0``) and its mirror image under
``xi_1 -> -xi_1``.  Kernels here integrate the first arc (the ``main`` sheet);
the mirror arc is available separately so that its contribution can be
bounded.  On the main sheet we use coordinates

    rho = |xi| - R,   beta = <xi, e_perp>,   s = sqrt((R + rho)^2 - beta^2),
    xi = s e + beta e_perp,   dxi = (R + rho) / s  d rho d beta,

and write ``alpha = s - R`` for the offset along ``e`` (computed without
cancellation).  The demodulated kernel ``D(z) = e^{-iR<z, e>} K(z)`` is then
``sum_q W_q exp(i (z_e alpha_q + z_perp beta_q))`` with Gauss-Legendre weights.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from ..besicovitch import reach_of, triangle_of
from ..multipliers import RadialProfile
from .params import ExampleParams

__all__ = [
    "QuadratureError",
    "PsiTransform",
    "psi_transform",
    "f_nu_eval",
    "h_nu",
    "kappa_nu",
    "kappa_decay_constant",
    "PSI_DECAY_M2",
    "triangle_fourier",
    "KernelQuadrature",
    "kernel_K_nu",
    "ReachSampling",
    "reach_points",
    "convolve_on_reach",
    "PLATE_CONSTANT",
    "plate_minimum",
    "mirror_sheet_bound",
]

TWO_PI = 2.0 * np.pi

# sup_w |psi_check(w)| (1 + |w|)^2 for the default psi (bump on [-1/2, 1/2]
# scaled to be >= 1 on [-1/4, 1/4]); measured 18.44 on |w| <= 4000 and
# frozen with headroom.  C_psi(eps) = PSI_DECAY_M2 / (2 pi eps).  For the
# tail beyond any table, w^2 |psi_check(w)| <= ||psi''||_1 = 24.23.
PSI_DECAY_M2 = 20.0
# Lower constant for the demodulated kernel on its plate, divided by
# eps^3 2^n (measured 0.0715 .. 0.0999 over n = 3..6, all nu, eps = 1/32).
PLATE_CONSTANT = 0.05


class QuadratureError(RuntimeError):
    pass


def gauss_legendre(lo: float, hi: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(m)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


class PsiTransform:
    """psi_check(w) = int psi(t) e^{iwt} dt and its running integral.

    ``Phi(w) = (1 / 2 pi) int_{-inf}^{w} psi_check`` is tabulated on
    ``|w| <= table_limit`` and splined; ``Phi(-inf) = 0``, ``Phi(inf) = psi(0)``.
    """

    def __init__(self, psi: RadialProfile, nodes: int = 2048, table_limit: float = 640.0, table_step: float = 1 / 64):
        self.psi = psi
        self.support = psi.support
        self.tau, w = gauss_legendre(0.0, psi.support, nodes)
        self.weights = w * psi(self.tau)
        self.peak = float(psi(0.0))
        self.table_limit = table_limit
        grid = np.arange(-table_limit, table_limit + table_step / 2, table_step)
        self._spline = CubicSpline(grid, self._phi_direct(grid))

    def check(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        flat = w.ravel()
        out = np.empty(flat.shape)
        for s in range(0, flat.size, 4096):
            out[s : s + 4096] = 2.0 * np.cos(np.multiply.outer(flat[s : s + 4096], self.tau)) @ self.weights
        return out.reshape(w.shape)

    def _phi_direct(self, w: np.ndarray) -> np.ndarray:
        out = np.empty(w.shape)
        wt = self.weights / self.tau
        for s in range(0, w.size, 4096):
            out[s : s + 4096] = np.sin(np.multiply.outer(w[s : s + 4096], self.tau)) @ wt
        return 0.5 * self.peak + out / np.pi

    def phi(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        lim = self.table_limit
        inside = self._spline(np.clip(w, -lim, lim))
        return np.where(w > lim, self.peak, np.where(w < -lim, 0.0, inside))

    def second_derivative_l1(self, samples: int = 200001) -> float:
        """||psi''||_1, which bounds w^2 |psi_check(w)| for every w."""
        t = np.linspace(-self.support, self.support, samples)
        d2 = np.diff(self.psi(t), 2) / (t[1] - t[0]) ** 2
        return float(np.abs(d2).sum() * (t[1] - t[0]))


@functools.lru_cache(maxsize=4)
def _psi_transform_cached(psi: RadialProfile) -> PsiTransform:
    return PsiTransform(psi)


def psi_transform(psi: RadialProfile) -> PsiTransform:
    return _psi_transform_cached(psi)


def f_nu_eval(params: ExampleParams, nu: int, y) -> np.ndarray:
    """1_T(y) exp(i R <y, e>) for points y of shape (..., 2)."""
    params.check_index(nu)
    y = np.asarray(y, dtype=float)
    tri = triangle_of(params.family.segments[nu], params.n)
    frame = params.frame(nu)
    return np.where(tri.contains(y), np.exp(1j * params.radius * (y @ frame.e)), 0.0)


def h_nu(params: ExampleParams, nu: int, xi2) -> np.ndarray:
    """psi((xi_2 - centre) / (2^n eps))."""
    return params.psi((np.asarray(xi2, dtype=float) - params.strip_center(nu)) / (2.0**params.n * params.eps))


def kappa_nu(params: ExampleParams, nu: int, x2) -> np.ndarray:
    """(2 pi)^-1 int h_nu(xi) e^{i x2 xi} d xi = e^{i x2 c} (2^n eps / 2 pi) psi_check(2^n eps x2)."""
    x2 = np.asarray(x2, dtype=float)
    scale = 2.0**params.n * params.eps
    amp = scale / TWO_PI * psi_transform(params.psi).check(scale * x2)
    return np.exp(1j * params.strip_center(nu) * x2) * amp


def kappa_decay_constant(params: ExampleParams) -> float:
    """C_psi with |kappa_nu(x2)| <= C_psi 2^n (1 + 2^n |x2|)^-2, from the frozen psi constant."""
    return PSI_DECAY_M2 / (TWO_PI * params.eps)


def _phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1) / z, series for small |z|."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    zs = z[small]
    term = np.ones_like(zs)
    acc = np.ones_like(zs)
    for k in range(2, 20):
        term = term * zs / k
        acc = acc + term
    out[small] = acc
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def _simplex_exp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """int over {t1, t2 >= 0, t1 + t2 <= 1} of exp(a t1 + b t2): the divided difference exp[0, a, b]."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    out = np.empty(a.shape, dtype=complex)
    big = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.abs(a - b))
    small = big < 1.0
    if small.any():
        x, y = a[small], b[small]
        acc = np.zeros_like(x)
        px = [np.ones_like(x)]
        py = [np.ones_like(y)]
        for _ in range(30):
            px.append(px[-1] * x)
            py.append(py[-1] * y)
        fact = 2.0
        for m in range(30):
            acc = acc + sum(px[i] * py[m - i] for i in range(m + 1)) / fact
            fact *= m + 3
        out[small] = acc
    rest = ~small
    if rest.any():
        x, y = a[rest], b[rest]
        d = y - x
        res = np.empty_like(x)
        far = np.abs(d) >= 1.0
        res[far] = (_phi1(y[far]) - _phi1(x[far])) / d[far]
        near = ~far
        # |y - x| < 1 but one of them large: expand around x
        yb = np.abs(y) >= np.abs(x)
        m1 = near & yb
        res[m1] = (np.exp(x[m1]) * _phi1(d[m1]) - _phi1(x[m1])) / y[m1]
        m2 = near & ~yb
        res[m2] = (np.exp(y[m2]) * _phi1(-d[m2]) - _phi1(y[m2])) / x[m2]
        out[rest] = res
    return out


def triangle_fourier(vertices: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """int_T exp(-i <y, zeta>) dy for zeta of shape (..., 2)."""
    v = np.asarray(vertices, dtype=float)
    z = [-1j * (zeta @ v[k]) for k in range(3)]
    area = 0.5 * abs((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0]))
    return 2.0 * area * np.exp(z[0]) * _simplex_exp(z[1] - z[0], z[2] - z[0])


@dataclass
class KernelQuadrature:
    """Gauss-Legendre nodes on the main sheet of the annulus-strip support for one direction."""

    params: ExampleParams
    nu: int
    m_radial: int = 24
    m_perp: int = 64

    def __post_init__(self):
        p = self.params
        R = p.radius
        a = p.slope(self.nu)
        c = np.sqrt(1.0 + a * a)
        frame = p.frame(self.nu)
        self.e, self.e_perp = frame.e, frame.e_perp
        w_rho = p.u.support
        w_beta = c * p.strip_halfwidth() + 3.0 * p.eps**2
        rho, wr = gauss_legendre(-w_rho, w_rho, self.m_radial)
        beta, wb = gauss_legendre(-w_beta, w_beta, self.m_perp)
        RH, BE = np.meshgrid(rho, beta, indexing="ij")
        s = np.sqrt((R + RH - BE) * (R + RH + BE))
        alpha = (RH * (2 * R + RH) - BE * BE) / (s + R)
        xi2 = (s * a + BE) / c
        h = p.psi((xi2 - p.strip_center(self.nu)) / (2.0**p.n * p.eps))
        self.weights = np.outer(wr, wb) * p.u(RH) * h * (R + RH) / s / TWO_PI**2
        self.alpha = alpha
        self.beta = beta
        self.beta_grid = BE
        self.scale = p.eps**3 * 2.0**p.n

    def refined(self, factor: int = 2) -> "KernelQuadrature":
        return KernelQuadrature(self.params, self.nu, factor * self.m_radial, factor * self.m_perp)

    def frequencies(self, sheet: str = "main") -> np.ndarray:
        xi = (self.params.radius + self.alpha)[..., None] * self.e + self.beta_grid[..., None] * self.e_perp
        if sheet == "mirror":
            xi = xi * np.array([-1.0, 1.0])
        return xi

    def triangle_weights(self, vertices: np.ndarray) -> np.ndarray:
        zeta = self.alpha[..., None] * self.e + self.beta_grid[..., None] * self.e_perp
        return self.weights * triangle_fourier(vertices, zeta)

    def demodulated_grid(self, along, perp, weights=None) -> np.ndarray:
        """D on the tensor grid along x perp (shape (len(along), len(perp)))."""
        W = self.weights if weights is None else weights
        along = np.atleast_1d(np.asarray(along, dtype=float))
        perp = np.atleast_1d(np.asarray(perp, dtype=float))
        out = np.empty((along.size, perp.size), dtype=complex)
        for s in range(0, along.size, 256):
            inner = np.exp(1j * np.multiply.outer(along[s : s + 256], self.alpha))
            M = np.einsum("sij,ij->sj", inner, W)
            out[s : s + 256] = M @ np.exp(1j * np.multiply.outer(self.beta, perp))
        return out

    def demodulated_points(self, along, perp, weights=None) -> np.ndarray:
        W = (self.weights if weights is None else weights).ravel()
        al, be = self.alpha.ravel(), self.beta_grid.ravel()
        along = np.asarray(along, dtype=float)
        perp = np.asarray(perp, dtype=float)
        shape = np.broadcast(along, perp).shape
        xa, xp = np.broadcast_to(along, shape).ravel(), np.broadcast_to(perp, shape).ravel()
        out = np.empty(xa.size, dtype=complex)
        for s in range(0, xa.size, 512):
            ph = np.multiply.outer(xa[s : s + 512], al) + np.multiply.outer(xp[s : s + 512], be)
            out[s : s + 512] = np.exp(1j * ph) @ W
        return out.reshape(shape)

    def kernel(self, x, sheet: str = "main") -> np.ndarray:
        """K(x) for points of shape (..., 2); sheet is "main", "mirror" or "both"."""
        x = np.asarray(x, dtype=float)
        if sheet == "both":
            return self.kernel(x, "main") + self.kernel(x, "mirror")
        if sheet == "main":
            xe, xp = x @ self.e, x @ self.e_perp
            return np.exp(1j * self.params.radius * xe) * self.demodulated_points(xe, xp)
        xi = self.frequencies("mirror").reshape(-1, 2)
        W = self.weights.ravel()
        flat = x.reshape(-1, 2)
        out = np.empty(flat.shape[0], dtype=complex)
        for s in range(0, flat.shape[0], 256):
            out[s : s + 256] = np.exp(1j * flat[s : s + 256] @ xi.T) @ W
        return out.reshape(x.shape[:-1])


def _auto_nodes(params: ExampleParams, extent_along: float, extent_perp: float) -> tuple[int, int]:
    a_max = 2.5 * params.eps**2
    b_max = np.sqrt(2.0) * params.strip_halfwidth() + 3.0 * params.eps**2
    return 24 + int(np.ceil(0.6 * a_max * extent_along)), 48 + 8 * int(np.ceil(0.6 * b_max * extent_perp / 8))


def kernel_K_nu(params: ExampleParams, nu: int, x, tol: float = 1e-6, check: bool = True) -> np.ndarray:
    """K_nu(x) = (2 pi)^-2 int u(|xi| - R) h_nu(xi_2) e^{i<x, xi>} dxi over the main sheet, |x| <= 64.

    Node counts grow with |x|; a doubled rule is compared at the same points
    and a disagreement above ``tol * eps^3 2^n`` raises :class:`QuadratureError`.
    """
    params.check_index(nu)
    x = np.asarray(x, dtype=float)
    if np.any(np.hypot(x[..., 0], x[..., 1]) > 64.0 + 1e-12):
        raise ValueError("kernel evaluation is limited to |x| <= 64")
    frame = params.frame(nu)
    xe, xp = frame.coordinates(x)
    mr, mb = _auto_nodes(params, float(np.abs(xe).max(initial=0)), float(np.abs(xp).max(initial=0)))
    q = KernelQuadrature(params, nu, mr, mb)
    val = q.kernel(x)
    if check:
        err = float(np.abs(q.refined().kernel(x) - val).max(initial=0))
        if err > tol * q.scale:
            raise QuadratureError(f"node doubling changed K by {err / q.scale:.3g} eps^3 2^n; increase nodes")
    return val


def plate_minimum(params: ExampleParams, nu: int, samples: int = 17, tol: float = 1e-6) -> float:
    """min of Re D / (eps^3 2^n) on a samples x samples grid of |x_e| <= 16, |x_perp| <= 2^(4-n)."""
    params.check_index(nu)
    xe = np.linspace(-16.0, 16.0, samples)
    xp = np.linspace(-(2.0 ** (4 - params.n)), 2.0 ** (4 - params.n), samples)
    mr, mb = _auto_nodes(params, 16.0, 2.0 ** (4 - params.n))
    q = KernelQuadrature(params, nu, mr, mb)
    D = q.demodulated_grid(xe, xp)
    err = float(np.abs(q.refined().demodulated_grid(xe, xp) - D).max())
    if err > tol * q.scale:
        raise QuadratureError(f"plate samples changed by {err / q.scale:.3g} eps^3 2^n under doubling")
    return float(D.real.min() / q.scale)


@dataclass(frozen=True)
class ReachSampling:
    """Barycentric sample grid of a reach: vertex v0 + u (1 - w)(v1 - v0) + w (v2 - v0)."""

    points_per_side: int = 9

    def barycentric(self) -> np.ndarray:
        g = np.linspace(0.0, 1.0, self.points_per_side)
        U, W = np.meshgrid(g, g, indexing="ij")
        return np.stack([U.ravel(), W.ravel()], axis=1)


def reach_points(params: ExampleParams, nu: int, sampling: ReachSampling = ReachSampling()) -> np.ndarray:
    v = reach_of(params.family.segments[nu], params.n).vertices
    uw = sampling.barycentric()
    return v[0] + np.outer(uw[:, 0] * (1 - uw[:, 1]), v[1] - v[0]) + np.outer(uw[:, 1], v[2] - v[0])


def _collapsed_triangle_rule(vertices: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre product rule on a triangle via the collapsed square (u, w) -> v0 + u(1-w)(v1-v0) + w(v2-v0)."""
    g, wg = gauss_legendre(0.0, 1.0, m)
    U, W = np.meshgrid(g, g, indexing="ij")
    WU, WW = np.meshgrid(wg, wg, indexing="ij")
    v = np.asarray(vertices, dtype=float)
    pts = v[0] + (U * (1 - W))[..., None] * (v[1] - v[0]) + W[..., None] * (v[2] - v[0])
    jac = abs((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0]))
    return pts.reshape(-1, 2), (WU * WW * (1 - W) * jac).ravel()


def convolve_on_reach(
    params: ExampleParams,
    nu: int,
    points=None,
    sampling: ReachSampling = ReachSampling(),
    method: str = "spectral",
    conjugate: bool = False,
    tol: float = 1e-6,
) -> np.ndarray:
    """|K_nu * f_nu| at the given points (default: barycentric reach samples).

    ``spectral`` integrates the exact triangle transform against the kernel
    weights.  ``spatial`` applies a collapsed Gauss-Legendre rule on the
    triangle to the demodulated kernel; its node count follows the smoothness
    scales of the demodulated integrand (eps^-2 along e, 2^-n / eps across).
    Both check themselves by doubling.  ``conjugate`` evaluates
    conj(K) * conj(f), whose modulus is the same.
    """
    params.check_index(nu)
    pts = reach_points(params, nu, sampling) if points is None else np.asarray(points, dtype=float).reshape(-1, 2)
    frame = params.frame(nu)
    xe, xp = frame.coordinates(pts)
    mr, mb = _auto_nodes(params, float(np.abs(xe).max()) + 2.0, float(np.abs(xp).max()) + 2.0)
    tri = triangle_of(params.family.segments[nu], params.n).vertices

    def spectral(q: KernelQuadrature) -> np.ndarray:
        W = q.triangle_weights(tri)
        if conjugate:
            return np.conj(q.demodulated_points(xe, xp, W))
        return q.demodulated_points(xe, xp, W)

    def spatial(q: KernelQuadrature, m: int) -> np.ndarray:
        ys, wy = _collapsed_triangle_rule(tri, m)
        ye, yp = frame.coordinates(ys)
        # demodulated integrand D(x - y) e^{iR<x, e>} f(y) has modulus-preserving phase e^{iR<x, e>}
        D = q.demodulated_points(xe[:, None] - ye[None, :], xp[:, None] - yp[None, :])
        if conjugate:
            D = np.conj(D)
        return D @ wy

    q = KernelQuadrature(params, nu, mr, mb)
    scale = np.finfo(float).tiny
    if method == "spectral":
        val = spectral(q)
        ref = spectral(q.refined())
    elif method == "spatial":
        # phase change of the demodulated kernel across the triangle
        a_max = 2.5 * params.eps**2
        b_max = np.sqrt(2.0) * params.strip_halfwidth() + 3.0 * params.eps**2
        m = 6 + int(np.ceil(4.0 * (np.sqrt(2.0) * a_max + 2.0**-params.n * b_max)))
        val = spatial(q, m)
        ref = spatial(q.refined(), 2 * m)
    else:
        raise ValueError(f"unknown method {method!r}")
    scale = max(scale, float(np.abs(ref).max()))
    if np.abs(ref - val).max() > tol * scale:
        raise QuadratureError(f"reach convolution changed by {np.abs(ref - val).max() / scale:.3g} under doubling")
    return np.abs(val)


def mirror_sheet_bound(params: ExampleParams, nu: int) -> float:
    """sup_x |(mirror-sheet part of K_nu) * f_nu (x)| <= sum_q |W_q| |1_T^(xi'_q - R e)|."""
    q = KernelQuadrature(params, nu)
    tri = triangle_of(params.family.segments[nu], params.n).vertices
    zeta = q.frequencies("mirror") - params.radius * q.e
    return float(np.sum(np.abs(q.weights) * np.abs(triangle_fourier(tri, zeta))))
