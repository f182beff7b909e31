import json

import numpy as np
import pytest

from vkakeya.besicovitch import (
    GEOMETRY_CONSTANT,
    SCHEME_ID,
    GateViolation,
    LineSegment,
    Triangle,
    TriangleFamily,
    family_from_json,
    family_svg,
    family_to_json,
    keich_family,
    reach_of,
    reaches_disjoint,
    triangle_of,
    union_area,
    union_area_report,
)


def monte_carlo_area(tris, count, rng, chunk=1_000_000):
    """Hit fraction of uniform points in the bounding box, with its standard error."""
    v = np.asarray(tris).reshape(-1, 2)
    lo, hi = v.min(0), v.max(0)
    box = float(np.prod(hi - lo))
    shapes = [Triangle(t) for t in tris]
    hits = 0
    for s in range(0, count, chunk):
        m = min(chunk, count - s)
        pts = lo + (hi - lo) * rng.random((m, 2))
        inside = np.zeros(m, dtype=bool)
        for t in shapes:
            inside |= t.contains(pts)
        hits += int(inside.sum())
    p = hits / count
    return box * p, box * np.sqrt(p * (1 - p) / count)


def test_triangle_of_examples():
    t = triangle_of(LineSegment(0.0, 0.0), 1)
    assert {tuple(v) for v in t.vertices} == {(0.0, 0.0), (0.0, -0.5), (1.0, 0.0)}
    t = triangle_of(LineSegment(1.0, -1.0), 2)
    assert {tuple(v) for v in t.vertices} == {(0.0, -1.0), (0.0, -1.25), (1.0, 0.0)}


def test_triangles_are_counterclockwise_with_exact_area(rng):
    for _ in range(200):
        n = int(rng.integers(1, 13))
        seg = LineSegment(float(rng.random()), -float(rng.random()))
        t = triangle_of(seg, n)
        v = t.vertices
        cross = (v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0])
        assert cross > 0
        assert t.area == pytest.approx(2.0 ** (-n - 1), rel=1e-15, abs=0)


def test_reach_translation():
    t = triangle_of(LineSegment(0.0, -0.5), 3)
    r = reach_of(LineSegment(0.0, -0.5), 3)
    assert np.allclose(r.vertices - t.vertices, [2 * np.sqrt(2), 0.0], atol=1e-15)
    t = triangle_of(LineSegment(1.0, -0.5), 3)
    r = reach_of(LineSegment(1.0, -0.5), 3)
    assert np.allclose(r.vertices - t.vertices, [2.0, 2.0], atol=1e-15)
    assert r.area == pytest.approx(t.area, rel=1e-14)


def test_segment_and_triangle_validation():
    with pytest.raises(ValueError):
        LineSegment(1.5, 0.0)
    with pytest.raises(ValueError):
        LineSegment(0.5, 0.5)
    with pytest.raises(ValueError):
        Triangle.of((0, 0), (1, 1), (2, 2))
    with pytest.raises(ValueError):
        triangle_of(LineSegment(0.0, 0.0), 0)


def test_family_n1():
    fam = keich_family(1)
    assert len(fam) == 2
    assert list(fam.slopes) == [0.0, 0.5]


@pytest.mark.parametrize("n", range(1, 9))
def test_family_invariants_and_gates(n):
    fam = keich_family(n)
    assert len(fam) == 2**n
    assert np.array_equal(fam.slopes, np.arange(2**n) * 2.0**-n)
    assert all(t.area == pytest.approx(2.0 ** (-n - 1), rel=1e-15) for t in fam.triangles)
    assert reaches_disjoint(fam).disjoint
    area = union_area(fam)
    assert area <= 0.5 + 1e-12
    assert n * area <= GEOMETRY_CONSTANT
    assert fam.provenance["scheme"] == SCHEME_ID


def test_family_rejects_wrong_slopes():
    with pytest.raises(ValueError):
        TriangleFamily(1, (LineSegment(0.0, 0.0), LineSegment(0.25, 0.0)), np.zeros(1))
    with pytest.raises(ValueError):
        keich_family(0)
    with pytest.raises(ValueError):
        keich_family(13)


def test_gate_failure_is_loud():
    with pytest.raises(GateViolation) as info:
        keich_family(6, gate_constant=0.5)
    assert "area" in info.value.diagnostics
    # this pivot choice makes two reaches overlap
    with pytest.raises(GateViolation) as info:
        keich_family(3, pivots=[1.0, 0.0, 1.0])
    assert info.value.diagnostics["pair"] is not None


def test_union_area_against_monte_carlo(rng):
    fam = keich_family(3)
    exact = union_area(fam)
    mc, se = monte_carlo_area(fam.vertex_array(), 10_000_000, rng)
    assert abs(exact - mc) <= 3 * se


def test_union_area_random_pair_against_monte_carlo(rng):
    tris = np.array([[[0, 0], [1, 0.2], [0.3, 1]], [[0.5, 0.1], [1.2, 0.9], [0.1, 0.8]]], dtype=float)
    exact = union_area(tris)
    mc, se = monte_carlo_area(tris, 10_000_000, rng)
    assert abs(exact - mc) <= 3 * se


def test_union_area_simple_cases():
    t = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
    far = t + [5.0, 0.0]
    assert union_area(np.stack([t, far])) == pytest.approx(1.0, abs=1e-12)
    assert union_area(np.stack([t, t])) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        union_area(np.array([[[0, 0], [1, 1], [2, 2]]], dtype=float))


def test_union_area_sampled_matches_exact():
    fam = keich_family(7)
    ex = union_area_report(fam, "exact")
    sa = union_area_report(fam, "sampled")
    assert abs(ex.area - sa.area) <= max(5 * sa.error_bound, 1e-9)


def test_union_area_translation_invariant():
    fam = keich_family(4)
    assert union_area(fam.translated([3.7, -1.1])) == pytest.approx(union_area(fam), abs=1e-12)


def test_reaches_disjoint_examples():
    t = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
    assert reaches_disjoint(np.stack([t, t + [10.0, 0.0]])).disjoint
    rep = reaches_disjoint(np.stack([t, t]))
    assert not rep.disjoint and rep.witness == (0, 1)


def _orient(p, q, r):
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def triangles_meet(a, b):
    """Independent oracle: an edge pair crosses, or one triangle holds a vertex of the other."""
    for i in range(3):
        p, q = a[i], a[(i + 1) % 3]
        for j in range(3):
            r, s = b[j], b[(j + 1) % 3]
            if _orient(p, q, r) * _orient(p, q, s) < 0 and _orient(r, s, p) * _orient(r, s, q) < 0:
                return True
    return bool(Triangle(a).contains(b[:1])[0] or Triangle(b).contains(a[:1])[0])


def test_separating_axis_against_oracles(rng):
    checked = 0
    for _ in range(300):
        a = rng.uniform(-1, 1, (3, 2))
        b = rng.uniform(-1, 1, (3, 2)) + rng.uniform(-1.5, 1.5, 2)
        if min(abs(_orient(*a)), abs(_orient(*b))) < 1e-3:
            continue
        ta, tb = Triangle(a), Triangle(b)
        rep = reaches_disjoint(np.stack([ta.vertices, tb.vertices]))
        if abs(rep.min_gap) < 1e-9:
            continue
        assert rep.disjoint == (not triangles_meet(ta.vertices, tb.vertices))
        # containment sampling over the overlap of the bounding boxes
        lo = np.maximum(a.min(0), b.min(0))
        hi = np.minimum(a.max(0), b.max(0))
        if np.all(hi > lo):
            pts = lo + (hi - lo) * rng.random((100_000, 2))
            if np.any(ta.contains(pts) & tb.contains(pts)):
                assert not rep.disjoint
        checked += 1
    assert checked > 250


def test_json_round_trip_and_svg():
    fam = keich_family(3)
    text = family_to_json(fam)
    d = json.loads(text)
    assert set(d) >= {"n", "slopes", "intercepts", "shifts", "scheme"}
    back = family_from_json(text)
    assert np.array_equal(back.intercepts, fam.intercepts)
    assert np.array_equal(back.shifts, fam.shifts)
    svg = family_svg(fam)
    assert svg.count("<polygon") == 2 * len(fam)
    assert svg == family_svg(back)
    with pytest.raises(ValueError):
        family_from_json(json.dumps({**d, "scheme": "other"}))


def test_n_times_area_shape():
    vals = [n * union_area(keich_family(n)) for n in range(2, 9)]
    assert all(b / a <= 1.2 for a, b in zip(vals, vals[1:]))
