"""Perron-tree triangle families with small union area and disjoint reaches.

A family of order ``n`` has ``2**n`` segments ``l_nu(s) = a_nu s + b_nu`` on
``s in [0, 1]`` with slopes ``a_nu = nu / 2**n``.  Writing ``nu`` in binary
(most significant digit first) as ``d_1 ... d_n`` the intercepts are

    b_nu = - sum_k d_k 2**-k x_k ,   so   l_nu(s) = sum_k d_k 2**-k (s - x_k).

At merge level ``k`` the group with digit ``d_k = 1`` is shifted down by
``2**-k x_k``, which makes the two halves of the tree coincide at the pivot
abscissa ``s = x_k``.  The classical schedule overlaps the halves at height
fraction ``alpha = 1 - 2/(level + 2)`` measured from the base, where
``level = n - k + 1`` counts merges from the leaves; this is the pivot
``x_k = 2 / (n - k + 3)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "EPS_GEOM",
    "GEOMETRY_CONSTANT",
    "LineSegment",
    "Triangle",
    "TriangleFamily",
    "GateViolation",
    "UnionArea",
    "triangle_of",
    "reach_of",
    "classical_pivots",
    "keich_pivots",
    "keich_family",
    "union_area",
    "union_area_report",
    "reaches_disjoint",
    "DisjointnessReport",
    "family_to_json",
    "family_from_json",
    "family_svg",
]

EPS_GEOM = 1e-12
# Frozen after calibration on the classical schedule: n * union_area is
# 0.375, 0.556, 0.645, 0.704, 0.760, 0.820, 0.885, 0.957 for n = 1..8 and
# stays below 1.3 up to n = 12.
GEOMETRY_CONSTANT = 2.0
SCHEME_ID = "perron-tree/vertical-shift/v1"


@dataclass(frozen=True)
class LineSegment:
    a: float
    b: float

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"slope must lie in [0, 1], got {self.a}")
        if not -1.0 - EPS_GEOM <= self.b <= EPS_GEOM:
            raise ValueError(f"intercept must lie in [-1, 0], got {self.b}")

    def __call__(self, s):
        return self.a * np.asarray(s) + self.b

    @property
    def direction(self) -> np.ndarray:
        return np.array([1.0, self.a]) / np.hypot(1.0, self.a)


@dataclass(frozen=True, eq=False)
class Triangle:
    vertices: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(3, 2)
        cross = _cross(v)
        if cross < 0:
            v = v[[0, 2, 1]]
        elif cross == 0 and not self.degenerate:
            raise ValueError("degenerate triangle (zero area)")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def of(cls, v0, v1, v2) -> "Triangle":
        return cls(np.array([v0, v1, v2], dtype=float))

    @property
    def v0(self):
        return self.vertices[0]

    @property
    def v1(self):
        return self.vertices[1]

    @property
    def v2(self):
        return self.vertices[2]

    @property
    def area(self) -> float:
        return 0.5 * abs(_cross(self.vertices))

    def translated(self, d) -> "Triangle":
        return Triangle(self.vertices + np.asarray(d, dtype=float), self.degenerate)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Closed containment for an (..., 2) array of points."""
        pts = np.asarray(pts, dtype=float)
        inside = np.ones(pts.shape[:-1], dtype=bool)
        for i in range(3):
            p, q = self.vertices[i], self.vertices[(i + 1) % 3]
            side = (q[0] - p[0]) * (pts[..., 1] - p[1]) - (q[1] - p[1]) * (pts[..., 0] - p[0])
            inside &= side >= 0
        return inside


def _cross(v: np.ndarray) -> float:
    return float((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0]))


def triangle_of(seg: LineSegment, n: int) -> Triangle:
    """Triangle with vertices (0, l(0)), (0, l(0) - 2^-n), (1, l(1))."""
    if n < 1:
        raise ValueError("order must be >= 1")
    b = seg.b
    return Triangle.of((0.0, b), (0.0, b - 2.0**-n), (1.0, seg.a + b))


def reach_of(seg: LineSegment, n: int) -> Triangle:
    """The triangle moved a distance 2*sqrt(2) along the segment's direction."""
    shift = 2.0 * np.sqrt(2.0) / np.sqrt(1.0 + seg.a * seg.a)
    return triangle_of(seg, n).translated((shift, seg.a * shift))


class GateViolation(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True, eq=False)
class TriangleFamily:
    n: int
    segments: tuple[LineSegment, ...]
    shifts: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.segments) != 2**self.n:
            raise ValueError(f"family of order {self.n} needs {2**self.n} segments")
        for nu, seg in enumerate(self.segments):
            if seg.a != nu * 2.0**-self.n:
                raise ValueError(f"segment {nu} has slope {seg.a}, expected {nu}/2^{self.n}")

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def slopes(self) -> np.ndarray:
        return np.array([s.a for s in self.segments])

    @property
    def intercepts(self) -> np.ndarray:
        return np.array([s.b for s in self.segments])

    @property
    def triangles(self) -> list[Triangle]:
        return [triangle_of(s, self.n) for s in self.segments]

    @property
    def reaches(self) -> list[Triangle]:
        return [reach_of(s, self.n) for s in self.segments]

    def vertex_array(self, reaches: bool = False) -> np.ndarray:
        tris = self.reaches if reaches else self.triangles
        return np.stack([t.vertices for t in tris])

    def translated(self, d) -> "TriangleFamily":
        """Rigid translation, kept as raw vertex data (intercepts may leave [-1, 0])."""
        return _Translated(self, np.asarray(d, dtype=float))


@dataclass(frozen=True, eq=False)
class _Translated:
    base: TriangleFamily
    offset: np.ndarray

    def vertex_array(self, reaches: bool = False) -> np.ndarray:
        return self.base.vertex_array(reaches) + self.offset


def classical_pivots(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    return 2.0 / (n - k + 3.0)


def keich_pivots(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / n


def _family_from_pivots(n: int, pivots: np.ndarray, provenance: dict) -> TriangleFamily:
    nu = np.arange(2**n)
    digits = (nu[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    weights = 2.0 ** -np.arange(1, n + 1)
    shifts = -weights * pivots
    b = digits.astype(float) @ shifts
    segs = tuple(LineSegment(int(v) * 2.0**-n, float(bv)) for v, bv in zip(nu, b))
    return TriangleFamily(n, segs, shifts, provenance)


def keich_family(
    n: int,
    schedule: str = "classical",
    pivots=None,
    refine: bool = False,
    gate_constant: float = GEOMETRY_CONSTANT,
    check_gates: bool = True,
) -> TriangleFamily:
    """Build the family of order n and verify its gates.

    ``schedule`` is "classical" or "keich" (pivots k/n); explicit ``pivots``
    override both.  ``refine`` runs a greedy per-level search that rescales
    one pivot at a time and keeps changes that lower the union area without
    breaking reach disjointness.  Raises :class:`GateViolation` when the reaches
    intersect or the union area exceeds ``gate_constant / n``.
    """
    if not 1 <= n <= 12:
        raise ValueError("order must satisfy 1 <= n <= 12")
    if pivots is None:
        pivots = {"classical": classical_pivots, "keich": keich_pivots}[schedule](n)
        label = schedule
    else:
        pivots = np.asarray(pivots, dtype=float)
        label = "explicit"
        if pivots.shape != (n,) or np.any(pivots < 0) or np.any(pivots > 1):
            raise ValueError("pivots must be n numbers in [0, 1]")
    if refine:
        pivots = _refine(n, pivots)
        label += "+greedy"
    prov = {"scheme": SCHEME_ID, "schedule": label, "pivots": [float(x) for x in pivots]}
    fam = _family_from_pivots(n, pivots, prov)
    if check_gates:
        report = reaches_disjoint(fam)
        if not report.disjoint:
            raise GateViolation(
                f"reaches {report.witness} intersect (gap {report.min_gap:.3e})",
                {"pair": report.witness, "min_gap": report.min_gap},
            )
        ua = union_area_report(fam)
        if ua.upper > gate_constant / n:
            raise GateViolation(
                f"union area {ua.area:.6f} exceeds {gate_constant}/{n}",
                {"area": ua.area, "bound": gate_constant / n},
            )
        fam.provenance.update(union_area=ua.area, union_area_method=ua.method, min_reach_gap=report.min_gap)
    return fam


def _refine(n: int, pivots: np.ndarray, factors=(0.85, 0.93, 1.07, 1.15), sweeps: int = 2) -> np.ndarray:
    best = np.array(pivots, dtype=float)
    best_area = union_area(_family_from_pivots(n, best, {}))
    for _ in range(sweeps):
        for k in range(n):
            for f in factors:
                trial = best.copy()
                trial[k] = min(1.0, trial[k] * f)
                fam = _family_from_pivots(n, trial, {})
                area = union_area(fam)
                if area < best_area and reaches_disjoint(fam).disjoint:
                    best, best_area = trial, area
    return best


@dataclass(frozen=True)
class UnionArea:
    area: float
    error_bound: float
    breakpoints: int
    method: str

    @property
    def upper(self) -> float:
        return self.area + self.error_bound


def _as_vertex_array(obj) -> np.ndarray:
    if hasattr(obj, "vertex_array"):
        return obj.vertex_array()
    if isinstance(obj, Triangle):
        return obj.vertices[None]
    arr = np.stack([t.vertices if isinstance(t, Triangle) else np.asarray(t, dtype=float) for t in obj])
    return arr.reshape(-1, 3, 2)


def _edges(tris: np.ndarray) -> np.ndarray:
    return np.stack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=1).reshape(-1, 2, 2)


def _crossing_abscissae(edges: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """x-coordinates of proper intersections between non-vertical edges."""
    p, q = edges[:, 0], edges[:, 1]
    dx = q[:, 0] - p[:, 0]
    keep = np.abs(dx) > 0
    p, q, dx = p[keep], q[keep], dx[keep]
    slope = (q[:, 1] - p[:, 1]) / dx
    icpt = p[:, 1] - slope * p[:, 0]
    xmin, xmax = np.minimum(p[:, 0], q[:, 0]), np.maximum(p[:, 0], q[:, 0])
    out = []
    m = slope.size
    for s in range(0, m, chunk):
        ds = slope[s : s + chunk, None] - slope[None, :]
        di = icpt[None, :] - icpt[s : s + chunk, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = di / ds
        lo = np.maximum(xmin[s : s + chunk, None], xmin[None, :])
        hi = np.minimum(xmax[s : s + chunk, None], xmax[None, :])
        ok = np.isfinite(x) & (x > lo) & (x < hi)
        out.append(x[ok])
    return np.concatenate(out) if out else np.empty(0)


def _vertical_extent(tris: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper boundary of each triangle on the vertical line through each x.

    Returns arrays of shape (len(x), len(tris)); inactive pairs get an empty interval.
    """
    order = np.argsort(tris[:, :, 0], axis=1, kind="stable")
    v = np.take_along_axis(tris, order[:, :, None], axis=1)
    a, b, c = v[:, 0], v[:, 1], v[:, 2]
    X = x[:, None]

    def line(p, q):
        dx = q[:, 0] - p[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(dx > 0, (X - p[:, 0]) / np.where(dx > 0, dx, 1.0), 0.0)
        return p[:, 1] + t * (q[:, 1] - p[:, 1])

    long_edge = line(a, c)
    short = np.where(X < b[:, 0], line(a, b), line(b, c))
    lo = np.minimum(long_edge, short)
    hi = np.maximum(long_edge, short)
    active = (X > a[:, 0]) & (X < c[:, 0])
    return np.where(active, lo, np.inf), np.where(active, hi, -np.inf)


def _union_length(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    order = np.argsort(lo, axis=1, kind="stable")
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    reach = np.maximum.accumulate(hi, axis=1)
    prev = np.concatenate([np.full((lo.shape[0], 1), -np.inf), reach[:, :-1]], axis=1)
    with np.errstate(invalid="ignore"):
        gain = hi - np.maximum(lo, prev)
    return np.where(gain > 0, gain, 0.0).sum(axis=1)


def union_area_report(obj, method: str = "auto", slabs: int | None = None) -> UnionArea:
    """Area of a union of triangles.

    ``exact``: vertical slab sweep over all vertex abscissae and pairwise edge
    crossings; inside a slab every boundary is linear and no two cross, so the
    union length is linear and the midpoint value times the width is exact.
    ``sampled``: the cross-section length is piecewise linear, so trapezoid
    sampling on a uniform grid converges quadratically; the reported error is
    the change against the half-resolution rule.  Used for large families,
    where the crossing count of the exact sweep grows quadratically.  ``auto``
    picks exact up to 512 triangles.
    """
    tris = _as_vertex_array(obj)
    u, v = tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]
    if np.any(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0] == 0):
        raise ValueError("degenerate triangle in union")
    if method == "auto":
        method = "exact" if len(tris) <= 512 else "sampled"
    scale = max(1.0, float(np.abs(tris).max()))
    if method == "exact":
        xs = np.unique(np.concatenate([tris[:, :, 0].ravel(), _crossing_abscissae(_edges(tris))]))
        mids, widths = 0.5 * (xs[1:] + xs[:-1]), np.diff(xs)
        total = 0.0
        for s in range(0, mids.size, 1024):
            lo, hi = _vertical_extent(tris, mids[s : s + 1024])
            total += float(np.dot(_union_length(lo, hi), widths[s : s + 1024]))
        m = 3 * len(tris)
        return UnionArea(total, m * m * np.finfo(float).eps * scale * scale, int(xs.size), "exact")
    if method == "sampled":
        x0, x1 = tris[:, :, 0].min(), tris[:, :, 0].max()
        count = slabs or 65536
        xs = np.linspace(x0, x1, count + 1)
        lengths = np.concatenate(
            [_union_length(*_vertical_extent(tris, xs[s : s + 256])) for s in range(0, xs.size, 256)]
        )
        fine = float(np.trapezoid(lengths, xs))
        coarse = float(np.trapezoid(lengths[::2], xs[::2]))
        return UnionArea(fine, abs(fine - coarse), count + 1, "sampled")
    raise ValueError(f"unknown method {method!r}")


def union_area(obj, method: str = "auto") -> float:
    return union_area_report(obj, method).area


@dataclass(frozen=True)
class DisjointnessReport:
    disjoint: bool
    witness: tuple[int, int] | None
    min_gap: float

    def __bool__(self) -> bool:
        return self.disjoint


def _separation(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Largest separating gap over the six edge normals for each pair (P, 3, 2)."""
    best = np.full(A.shape[0], -np.inf)
    for P in (A, B):
        for e in range(3):
            edge = P[:, (e + 1) % 3] - P[:, e]
            normal = np.stack([-edge[:, 1], edge[:, 0]], axis=1)
            normal /= np.linalg.norm(normal, axis=1)[:, None]
            pa = np.einsum("pkd,pd->pk", A, normal)
            pb = np.einsum("pkd,pd->pk", B, normal)
            gap = np.maximum(pb.min(1) - pa.max(1), pa.min(1) - pb.max(1))
            best = np.maximum(best, gap)
    return best


def reaches_disjoint(obj, chunk: int = 1 << 20) -> DisjointnessReport:
    """Pairwise separating-axis test; touching (gap <= EPS_GEOM) counts as intersecting.

    Accepts a family (its reaches are tested) or a sequence of triangles.
    """
    if isinstance(obj, TriangleFamily):
        tris = obj.vertex_array(reaches=True)
    else:
        tris = _as_vertex_array(obj)
    m = len(tris)
    if m < 2:
        return DisjointnessReport(True, None, np.inf)
    i, j = np.triu_indices(m, 1)
    worst, worst_pair = np.inf, None
    for s in range(0, i.size, chunk):
        gi, gj = i[s : s + chunk], j[s : s + chunk]
        gap = _separation(tris[gi], tris[gj])
        k = int(np.argmin(gap))
        if gap[k] < worst:
            worst, worst_pair = float(gap[k]), (int(gi[k]), int(gj[k]))
    ok = worst > EPS_GEOM
    return DisjointnessReport(ok, None if ok else worst_pair, worst)


def family_to_json(fam: TriangleFamily) -> str:
    return json.dumps(
        {
            "n": fam.n,
            "scheme": SCHEME_ID,
            "slopes": [float(x) for x in fam.slopes],
            "intercepts": [float(x) for x in fam.intercepts],
            "shifts": [float(x) for x in fam.shifts],
            "provenance": fam.provenance,
        },
        indent=1,
    )


def family_from_json(text: str) -> TriangleFamily:
    d = json.loads(text)
    if d.get("scheme") != SCHEME_ID:
        raise ValueError(f"unknown construction scheme {d.get('scheme')!r}")
    segs = tuple(LineSegment(a, b) for a, b in zip(d["slopes"], d["intercepts"]))
    return TriangleFamily(int(d["n"]), segs, np.asarray(d["shifts"], dtype=float), d.get("provenance", {}))


def family_svg(fam: TriangleFamily, width: int = 800) -> str:
    tris = fam.vertex_array()
    reach = fam.vertex_array(reaches=True)
    allv = np.concatenate([tris, reach]).reshape(-1, 2)
    lo, hi = allv.min(0) - 0.1, allv.max(0) + 0.1
    span = hi - lo
    height = int(round(width * span[1] / span[0]))

    def pts(v):
        x = (v[:, 0] - lo[0]) / span[0] * width
        y = (hi[1] - v[:, 1]) / span[1] * height
        return " ".join(f"{a:.4f},{b:.4f}" for a, b in zip(x, y))

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<g id="triangles" fill="#3b6ea5" fill-opacity="0.35" stroke="none">',
    ]
    lines += [f'<polygon data-nu="{k}" points="{pts(v)}"/>' for k, v in enumerate(tris)]
    lines.append('</g>\n<g id="reaches" fill="none" stroke="#b03030" stroke-width="0.6">')
    lines += [f'<polygon data-nu="{k}" points="{pts(v)}"/>' for k, v in enumerate(reach)]
    lines.append("</g>\n</svg>\n")
    return "\n".join(lines)


def write_family(fam: TriangleFamily, json_path: str | Path | None = None, svg_path: str | Path | None = None):
    if json_path:
        Path(json_path).write_text(family_to_json(fam))
    if svg_path:
        Path(svg_path).write_text(family_svg(fam))
