import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vkakeya.field import (
    Field2D,
    Grid2D,
    NyquistWarning,
    forward_transform,
    inner_product,
    inverse_transform,
    lp_norm,
    project_annulus,
    project_ball,
    read_field_dump,
    write_field_dump,
    write_pgm,
)


def random_field(grid, rng):
    z = rng.standard_normal((2, grid.size, grid.size))
    return Field2D(grid, z[0] + 1j * z[1])


@pytest.mark.parametrize("size", [0, 6, 12, 100])
def test_grid_rejects_non_power_of_two(size):
    with pytest.raises(ValueError):
        Grid2D(size, 1.0)


def test_grid_rejects_bad_side():
    with pytest.raises(ValueError):
        Grid2D(16, -1.0)
    with pytest.raises(ValueError):
        Grid2D(16, float("nan"))


def test_grid_geometry():
    g = Grid2D.centered(64, 2 * np.pi)
    assert g.spacing == pytest.approx(2 * np.pi / 64)
    assert g.frequency_step == pytest.approx(1.0)
    assert g.nyquist == pytest.approx(32.0)
    x1, _ = g.axis()
    assert x1[0] == pytest.approx(-np.pi)
    assert g.lattice_index(-3, 5) == (61, 5)
    with pytest.raises(ValueError):
        g.lattice_index(32, 0)


def test_field_rejects_non_finite():
    g = Grid2D(8, 1.0)
    bad = np.zeros((8, 8))
    bad[2, 3] = np.nan
    with pytest.raises(ValueError):
        Field2D(g, bad)
    with pytest.raises(ValueError):
        Field2D(g, np.zeros((4, 4)))


def test_field_samples_read_only(rng):
    f = random_field(Grid2D(8, 1.0), rng)
    with pytest.raises(ValueError):
        f.samples[0, 0] = 1.0


def test_forward_matches_direct_double_sum(rng):
    # 8 x 8 oracle: c(xi) = h^2 / (2 pi) sum_x f(x) exp(-i <x, xi>)
    g = Grid2D(8, 3.0, (-1.25, 0.5))
    f = random_field(g, rng)
    X1, X2 = g.points()
    K1, K2 = g.frequencies()
    direct = np.empty((8, 8), dtype=complex)
    for a in range(8):
        for b in range(8):
            phase = np.exp(-1j * (X1 * K1[a, b] + X2 * K2[a, b]))
            direct[a, b] = g.spacing**2 / (2 * np.pi) * np.sum(f.samples * phase)
    assert np.allclose(forward_transform(f).coeffs, direct, rtol=0, atol=1e-12)


def test_parseval_and_round_trip(rng):
    g = Grid2D(256, 7.0, (0.3, -2.0))
    f = random_field(g, rng)
    s = forward_transform(f)
    lhs = np.sum(np.abs(f.samples) ** 2) * g.spacing**2
    rhs = np.sum(np.abs(s.coeffs) ** 2) * g.frequency_step**2
    assert abs(lhs - rhs) <= 1e-10 * lhs
    back = inverse_transform(s)
    assert np.max(np.abs(back.samples - f.samples)) <= 1e-10 * np.max(np.abs(f.samples))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (16, 16), elements=st.floats(-1e3, 1e3)), st.floats(0.1, 50.0))
def test_round_trip_property(values, side):
    f = Field2D(Grid2D(16, side), values)
    back = inverse_transform(forward_transform(f))
    assert np.allclose(back.samples, values, rtol=0, atol=1e-10 * max(1.0, np.abs(values).max()))


def test_lattice_wave_has_single_coefficient():
    g = Grid2D.centered(32, 4.0)
    s = forward_transform(Field2D.lattice_wave(g, 3, -2))
    mags = np.abs(s.coeffs)
    assert mags.argmax() == np.ravel_multi_index(g.lattice_index(3, -2), mags.shape)
    assert np.sum(mags > 1e-9) == 1


def test_inner_product_is_plancherel(rng):
    g = Grid2D(32, 5.0)
    f, h = random_field(g, rng), random_field(g, rng)
    spatial = inner_product(f, h)
    spectral = np.sum(forward_transform(f).coeffs * np.conj(forward_transform(h).coeffs)) * g.frequency_step**2
    assert spatial == pytest.approx(spectral, rel=1e-12)


def test_project_ball_and_annulus():
    g = Grid2D.centered(64, 2 * np.pi)
    low = Field2D.lattice_wave(g, 2, 1)
    high = Field2D.lattice_wave(g, 10, 0)
    both = low + high
    out = project_ball(both, 5.0)
    assert np.allclose(out.samples, low.samples, atol=1e-12)
    ring = project_annulus(both, 8.0, 12.0)
    assert np.allclose(ring.samples, high.samples, atol=1e-12)
    with pytest.raises(ValueError):
        project_annulus(both, 3.0, 2.0)


def test_project_ball_beyond_nyquist_warns():
    g = Grid2D.centered(16, 1.0)
    f = Field2D.lattice_wave(g, 1, 1)
    with pytest.warns(NyquistWarning, match="Nyquist"):
        out = project_ball(f, 10 * g.nyquist)
    assert out is f


def test_lp_norm_constant_and_scaling(rng):
    g = Grid2D(32, 3.0)
    one = Field2D(g, np.ones((32, 32)))
    assert lp_norm(one, 4) == pytest.approx(3.0 ** (2 / 4))
    assert lp_norm(one, np.inf) == 1.0
    f = random_field(g, rng)
    assert lp_norm(f * 3.0, 2.5) == pytest.approx(3.0 * lp_norm(f, 2.5))
    assert lp_norm(f.samples, 3, spacing=g.spacing) == pytest.approx(lp_norm(f, 3))
    with pytest.raises(ValueError):
        lp_norm(f.samples, 2)
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_field_dump_round_trip(tmp_path, rng):
    g = Grid2D(16, 2.5, (1.0, -3.0))
    f = random_field(g, rng)
    path = tmp_path / "f.vk2d"
    write_field_dump(f, path)
    back = read_field_dump(path)
    assert back.grid == g
    assert np.array_equal(back.samples, f.samples)


def test_pgm_output(tmp_path):
    values = np.arange(64.0).reshape(8, 8)
    path = tmp_path / "v.pgm"
    lo, hi = write_pgm(values, path)
    data = path.read_bytes()
    assert data.startswith(b"P5\n")
    assert (lo, hi) == (0.0, 63.0)
    assert len(data.split(b"\n", 3)[3]) == 8 * 8 * 2
    assert (tmp_path / "v.pgm.scale.txt").exists()
