import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import j1

from vkakeya.field import Field2D, Grid2D, forward_transform, inverse_transform, lp_norm, project_annulus
from vkakeya.multipliers import bump
from vkakeya.studies import (
    CHI_HALF_ANGLE,
    SQUAREFN_TIMES,
    angular_symbol,
    derivative_bound_study,
    derivative_ratio,
    squarefn_statistic,
    squarefn_study,
    study_rng,
    variation_demo,
    white_noise,
)
from vkakeya.varnorm import FieldStack, mixed_norm_Lp_L2t, variation_norm


def symbol_oracle(xi, t):
    def part(fn):
        return quad(
            lambda a: bump(a / CHI_HALF_ANGLE) * fn(-t * (xi[0] * np.cos(a) + xi[1] * np.sin(a))),
            -CHI_HALF_ANGLE, CHI_HALF_ANGLE, limit=400, epsabs=1e-14, epsrel=1e-12,
        )[0]

    return (part(np.cos) + 1j * part(np.sin)) / (2 * np.pi)


def test_angular_symbol_against_adaptive_quadrature():
    for xi in ([0.0, 0.0], [30.0, 5.0], [-12.0, 40.0], [0.0, -64.0]):
        for t in (1.25, 1.6):
            got = angular_symbol(xi[0], xi[1], t)[0]
            assert abs(got - symbol_oracle(xi, t)) <= 1e-12


def test_squarefn_lattice_wave_closed_form():
    grid = Grid2D.centered(64, np.pi)
    lam = 24.0
    k = (5, 3)  # frequency (10, 6): |xi| ~ 11.7 lies in [lam/4, lam]
    g = Field2D.lattice_wave(grid, *k)
    xi = np.array(k) * grid.frequency_step
    m = np.array([symbol_oracle(xi, t) for t in SQUAREFN_TIMES])
    w = np.full(SQUAREFN_TIMES.size, SQUAREFN_TIMES[1] - SQUAREFN_TIMES[0])
    w[[0, -1]] /= 2
    expected = np.sqrt(lam * np.sum(w * np.abs(m) ** 2))
    for p, q in squarefn_statistic(g, lam, (2.0, 3.0, 4.0)).items():
        assert q == pytest.approx(expected, rel=1e-8)


def test_squarefn_streaming_matches_mixed_norm(rng):
    grid = Grid2D.centered(64, np.pi)
    lam = 24.0
    g = project_annulus(white_noise(grid, rng), lam / 4, lam)
    xi1, xi2 = grid.frequencies()
    layers = []
    spec = forward_transform(g)
    band = (np.hypot(xi1, xi2) >= lam / 4) & (np.hypot(xi1, xi2) <= lam)
    for t in SQUAREFN_TIMES:
        sym = np.zeros(xi1.shape, dtype=complex)
        sym[band] = angular_symbol(xi1[band], xi2[band], t)
        layers.append(inverse_transform(spec.multiply(sym)))
    stack = FieldStack(grid, SQUAREFN_TIMES, layers)
    got = squarefn_statistic(g, lam, (2.0, 4.0))
    for p in (2.0, 4.0):
        want = np.sqrt(lam) * mixed_norm_Lp_L2t(stack, p) / lp_norm(g, p)
        assert got[p] == pytest.approx(want, rel=1e-10)


def test_squarefn_study_small_and_validation():
    res = squarefn_study(16.0, (2.0, 4.0), trials=3, size=128)
    assert res.Q[2.0].shape == (3,) and res.quadrature_error <= 1e-8
    assert res.median(2.0) <= res.max(2.0)
    again = squarefn_study(16.0, (2.0, 4.0), trials=3, size=128)
    assert np.array_equal(res.Q[4.0], again.Q[4.0])
    with pytest.raises(ValueError):
        squarefn_study(64.0, trials=1, size=128)
    with pytest.raises(ValueError):
        squarefn_study(16.0, (5.0,), trials=1, size=128)


def test_study_rng_is_keyed():
    a = study_rng(3, 32, 0).random(4)
    assert np.array_equal(a, study_rng(3, 32, 0).random(4))
    assert not np.array_equal(a, study_rng(3, 32, 1).random(4))
    assert not np.array_equal(a, study_rng(4, 32, 0).random(4))


def test_derivative_ratio_constant_and_wave():
    grid = Grid2D.centered(64, 8.0)
    one = Field2D(grid, np.ones((64, 64)))
    assert all(v <= 1e-13 for v in derivative_ratio(one, 10.0, (2.0, 4.0)).values())
    k = (6, -3)
    w = Field2D.lattice_wave(grid, *k)
    r = np.hypot(*k) * grid.frequency_step
    times = np.linspace(1.0, 2.0, 5)
    expected = np.max(r * np.abs(j1(times * r))) / 10.0
    for v in derivative_ratio(w, 10.0, (2.0, 4.0), times).values():
        assert v == pytest.approx(expected, rel=1e-10)


def test_derivative_bound_study_small():
    res = derivative_bound_study(16.0, trials=2, size=128)
    assert 0 < res.max(2.0) <= 1.5 and 0 < res.max(4.0) <= 1.5
    with pytest.raises(ValueError):
        derivative_bound_study(1e3, trials=1, size=64)


def test_variation_demo_constant():
    d = variation_demo("constant", samples=32, size=64)
    assert all(v <= 1e-12 for v in d.variation.values())
    assert d.sup == pytest.approx(1.0, abs=1e-12)


def test_variation_demo_gaussian_closed_form():
    # the circular mean of exp(-|x|^2) at the origin is exp(-t^2)
    d = variation_demo("gaussian", samples=64)
    assert np.allclose(d.series.values, np.exp(-d.series.times**2), atol=1e-12)
    monotone_drop = np.exp(-1.0) - np.exp(-d.series.times[-1] ** 2)
    for r in (1.0, 2.0, 3.0):
        assert d.variation[r] == pytest.approx(monotone_drop, rel=1e-10)
    # the doubled grid only extends the monotone run to t = 2 - 1/128
    extra = np.exp(-d.series.times[-1] ** 2) - np.exp(-((2 - 1 / 128) ** 2))
    assert all(x == pytest.approx(extra, rel=1e-8) for x in d.refinement.values())
    assert all(dp == bf for _, dp, bf in d.coarse_checks)
    assert d.besov <= d.embedding_bound


def test_variation_demo_rejects_unknown_profile():
    with pytest.raises(ValueError):
        variation_demo("spiky")


def test_wave_demo_variation_is_monotone_in_r():
    d = variation_demo("wave", samples=32, size=64)
    vals = [d.variation[r] for r in sorted(d.variation)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(variation_norm(d.series, 1.0))
