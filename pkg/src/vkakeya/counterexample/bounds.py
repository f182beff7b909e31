"""Pointwise check of the frequency-box containment for the annulus-strip support."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ExampleParams

__all__ = ["FrequencyClaimReport", "FrequencyClaimViolation", "sample_support", "verify_frequency_claim"]

_BLOCK = 12_500


class FrequencyClaimViolation(AssertionError):
    def __init__(self, message: str, witness: np.ndarray):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class FrequencyClaimReport:
    n: int
    eps: float
    nu: int
    samples: int
    along_max: float
    perp_max: float
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _sample_offsets(params: ExampleParams, nu: int, count: int, rng: np.random.Generator):
    """Uniform points of the xi_1 > 0 sheet, returned as (rho, delta2, d1).

    rho = |xi| - R, delta2 = xi_2 - strip centre, d1 = xi_1 - R e_1.  The
    density of (rho, xi_2) on the sheet is proportional to |xi| / xi_1, which
    is handled by rejection.
    """
    R = params.radius
    a = params.slope(nu)
    c = np.sqrt(1.0 + a * a)
    c0 = params.strip_center(nu)
    rho_w = 2.0 * params.eps**2
    d_w = params.strip_halfwidth()

    def xi1_of(rho, d2):
        return np.sqrt((R + rho - c0 - d2) * (R + rho + c0 + d2))

    top = max((R - rho_w) / xi1_of(-rho_w, s * d_w) for s in (-1.0, 1.0))
    # acceptance is at least 1 / top
    parts = []
    have = 0
    while have < count:
        m = int(1.05 * top * (count - have)) + 64
        u = rng.random((3, m))
        rho = u[0]
        rho *= 2.0 * rho_w
        rho -= rho_w
        d2 = u[1]
        d2 *= 2.0 * d_w
        d2 -= d_w
        xi1 = xi1_of(rho, d2)
        # accept with probability (|xi| / xi1) / top
        keep = u[2] * top * xi1 < R + rho
        parts.append((rho[keep], d2[keep], xi1[keep]))
        have += int(np.count_nonzero(keep))
    if len(parts) == 1:
        rho, d2, xi1 = (z[:count] for z in parts[0])
    else:
        rho, d2, xi1 = (np.concatenate(z)[:count] for z in zip(*parts))
    # xi1^2 - (R/c)^2 = rho (2R + rho) - d2 (2 c0 + d2) because (R/c)^2 + c0^2 = R^2
    d1 = (rho * (2 * R + rho) - d2 * (2 * c0 + d2)) / (xi1 + R / c)
    return rho, d2, d1


def sample_support(params: ExampleParams, nu: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples of {||xi| - R| <= 2 eps^2, |xi_2 - c| <= 2^(n-1) eps, xi_1 > 0}."""
    _, d2, d1 = _sample_offsets(params, nu, count, rng)
    c0 = params.strip_center(nu)
    a = params.slope(nu)
    return np.stack([params.radius / np.sqrt(1 + a * a) + d1, c0 + d2], axis=-1)


def verify_frequency_claim(
    params: ExampleParams, nu: int, samples: int, seed: int = 0, raise_on_violation: bool = True
) -> FrequencyClaimReport:
    """Check |<e, xi - R e>| <= 64 eps^2 and |<xi, e_perp>| <= 2^(n+2) eps on sampled support points."""
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.Generator(np.random.Philox(seed))
    a = params.slope(nu)
    c = np.sqrt(1.0 + a * a)
    along_scale = 1.0 / (c * 64.0 * params.eps**2)
    perp_scale = 1.0 / (c * 2.0 ** (params.n + 2) * params.eps)
    along_max = perp_max = 0.0
    violations = 0
    witness = None
    # cache-sized blocks run about twice as fast as one large draw
    for start in range(0, samples, _BLOCK):
        _, d2, d1 = _sample_offsets(params, nu, min(_BLOCK, samples - start), rng)
        along = np.abs(d1 + a * d2)
        along *= along_scale
        perp = np.abs(d2 - a * d1)
        perp *= perp_scale
        along_max = max(along_max, float(along.max()))
        perp_max = max(perp_max, float(perp.max()))
        if along_max > 1.0 or perp_max > 1.0:
            bad = (along > 1.0) | (perp > 1.0)
            violations += int(bad.sum())
            if witness is None and bad.any():
                k = int(np.argmax(bad))
                witness = np.array([params.radius / c + d1[k], params.strip_center(nu) + d2[k]])
    report = FrequencyClaimReport(params.n, params.eps, nu, samples, along_max, perp_max, violations)
    if witness is not None and raise_on_violation:
        raise FrequencyClaimViolation(
            f"{report.violations} violations for n={params.n}, eps={params.eps}, nu={nu}; first at xi={witness}",
            witness,
        )
    return report
