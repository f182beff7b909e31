import numpy as np
import pytest
from scipy.ndimage import map_coordinates

from vkakeya.bessel import bessel_j0, bessel_j1
from vkakeya.field import Field2D, Grid2D, forward_transform, lp_norm, project_ball
from vkakeya.multipliers import (
    BUMP_AT_HALF,
    RadialProfile,
    SectorCutoff,
    apply_radial_profile,
    bump,
    bump_profile,
    circular_average,
    d_dt_circular_average,
    half_wave,
    indicator_profile,
    sector_projection,
    smooth_step,
    stationary_phase_error,
)
from vkakeya.studies import white_noise


def radial_bump(x, y, radius=3.0, centre=(0.4, -0.3)):
    return bump(np.hypot(x - centre[0], y - centre[1]) / radius)


@pytest.fixture(scope="module")
def grid():
    return Grid2D.centered(128, 16.0)


def test_bump_and_step_profiles():
    assert bump(0.0) == 1.0
    assert bump(1.0) == 0.0 and bump(-1.5) == 0.0
    assert bump(0.5) == pytest.approx(BUMP_AT_HALF)
    s = np.linspace(-1, 3, 101)
    step = smooth_step(s)
    assert np.all(step[s <= 0] == 1.0) and np.all(step[s >= 1] == 0.0)
    assert np.all(np.diff(step) <= 0)
    assert smooth_step(0.5) == pytest.approx(0.5)


def test_bump_profile_floor_and_peak():
    u = bump_profile(0.25)
    assert u.check_lower_bound() >= 1.0
    assert u.peak() == pytest.approx(np.exp(1 / 3), rel=1e-6)
    assert u(0.3) == 0.0
    with pytest.raises(ValueError):
        RadialProfile("x", -1.0, np.abs)
    with pytest.raises(ValueError):
        RadialProfile("x", 1.0, np.abs, "wiggly")


def test_circular_average_of_constant(grid):
    one = Field2D(grid, np.full((grid.size, grid.size), 2.5 + 1j))
    for t in (0.0, 0.7, 1.9):
        assert np.allclose(circular_average(one, t).samples, 2.5 + 1j, atol=1e-13)


def test_circular_average_lattice_wave(grid):
    w = Field2D.lattice_wave(grid, 5, -3)
    r = np.hypot(5, 3) * grid.frequency_step
    for t in (0.5, 1.3):
        assert np.allclose(circular_average(w, t).samples, bessel_j0(t * r) * w.samples, atol=1e-12)


def test_circular_average_matches_angular_quadrature(rng):
    # oracle: 2048-point periodic trapezoid in the angle with bicubic sampling of f
    g = Grid2D.centered(512, 16.0)
    f = Field2D.from_function(g, radial_bump)
    out = circular_average(f, 1.0)
    idx = rng.integers(200, 312, size=(10, 2))
    x1, x2 = g.axis()
    a = 2 * np.pi * np.arange(2048) / 2048
    worst = 0.0
    for i, j in idx:
        px = x1[i] - np.cos(a)
        py = x2[j] - np.sin(a)
        coords = [(px - g.origin[0]) / g.spacing, (py - g.origin[1]) / g.spacing]
        vals = map_coordinates(f.samples.real, coords, order=3)
        worst = max(worst, abs(vals.mean() - out.samples[i, j]))
    assert worst <= 1e-6


def test_derivative_of_constant_and_wave(grid):
    one = Field2D(grid, np.ones((grid.size, grid.size)))
    assert np.max(np.abs(d_dt_circular_average(one, 1.2).samples)) <= 1e-13
    w = Field2D.lattice_wave(grid, 4, 1)
    r = np.hypot(4, 1) * grid.frequency_step
    expected = -r * bessel_j1(1.2 * r) * w.samples
    assert np.allclose(d_dt_circular_average(w, 1.2).samples, expected, atol=1e-12)
    with pytest.raises(ValueError):
        d_dt_circular_average(w, 0.0)


def test_derivative_matches_finite_difference(grid, rng):
    f = project_ball(white_noise(grid, rng), 20.0)
    t, d = 1.4, 1e-4
    fd = (circular_average(f, t + d).samples - circular_average(f, t - d).samples) / (2 * d)
    exact = d_dt_circular_average(f, t).samples
    assert np.max(np.abs(fd - exact)) <= 1e-5 * np.max(np.abs(exact))


def test_radial_profile_identity_and_support(grid, rng):
    f = white_noise(grid, rng)
    wide = indicator_profile(2 * grid.nyquist)
    assert np.allclose(apply_radial_profile(f, wide, 0.0).samples, f.samples, atol=1e-12)
    w = Field2D.lattice_wave(grid, 10, 0)
    u = bump_profile(0.5)
    lam = 10 * grid.frequency_step + 2.0
    assert np.max(np.abs(apply_radial_profile(w, u, lam).samples)) <= 1e-14
    with pytest.raises(ValueError):
        apply_radial_profile(f, u, -1.0)


def test_radial_profile_is_coefficientwise(grid, rng):
    f = white_noise(grid, rng)
    u = bump_profile(3.0)
    lam = 12.0
    got = forward_transform(apply_radial_profile(f, u, lam)).coeffs
    want = forward_transform(f).coeffs * u(grid.frequency_modulus() - lam)
    assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))


def test_half_wave_group_and_unitarity(grid, rng):
    f = white_noise(grid, rng)
    assert np.allclose(half_wave(f, 0.0).samples, f.samples, atol=1e-13)
    a = half_wave(half_wave(f, 0.3), 0.9).samples
    b = half_wave(f, 1.2).samples
    assert np.max(np.abs(a - b)) <= 1e-10
    assert lp_norm(half_wave(f, 2.0), 2) == pytest.approx(lp_norm(f, 2), rel=1e-10)


def test_sector_projection(grid):
    c = SectorCutoff((1.0, 0.0), np.pi / 4)
    inside = Field2D.lattice_wave(grid, 10, 1)
    outside = Field2D.lattice_wave(grid, 0, 10)
    assert np.allclose(sector_projection(inside, c).samples, inside.samples, atol=1e-13)
    assert np.max(np.abs(sector_projection(outside, c).samples)) <= 1e-14
    once = sector_projection(inside + outside, c)
    assert np.allclose(sector_projection(once, c).samples, once.samples, atol=1e-13)
    assert c(0.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        SectorCutoff((0.0, 0.0), 0.1)


def test_stationary_phase_remainder():
    v = stationary_phase_error(10.0, 1e4, 100_000)
    assert 0.0 <= v <= 0.3
    assert stationary_phase_error(100.0, 1e4, 100_000) <= v
    with pytest.raises(ValueError):
        stationary_phase_error(5.0, 100.0, 10)


def test_radial_multipliers_commute(grid, rng):
    f = white_noise(grid, rng)
    u = bump_profile(2.0)
    ops = [
        lambda g: circular_average(g, 1.1),
        lambda g: d_dt_circular_average(g, 1.6),
        lambda g: half_wave(g, 0.8),
        lambda g: apply_radial_profile(g, u, 9.0),
    ]
    for i, A in enumerate(ops):
        for B in ops[i + 1 :]:
            assert np.max(np.abs(A(B(f)).samples - B(A(f)).samples)) <= 1e-10 * max(1.0, np.abs(A(B(f)).samples).max())


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_derivative_bound_on_band_limited_fields(grid, rng, p):
    lam = 24.0
    f = project_ball(white_noise(grid, rng), lam)
    ratio = max(lp_norm(d_dt_circular_average(f, t), p) for t in np.arange(1.0, 2.01, 0.25)) / (lam * lp_norm(f, p))
    assert ratio <= 1.5
