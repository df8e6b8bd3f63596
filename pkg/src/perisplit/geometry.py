"""Planar primitives: points, robust orientation, convex chains, hulls.

Coordinates are doubles. Orientation tests use a floating filter with an
exact rational fallback, so hull combinatorics never depend on rounding.
Length values (perimeters, diameters) are plain floating point; callers
compare them with a relative tolerance of 1e-9.

Degenerate-hull conventions used throughout the package:
  * one point  -> perimeter 0
  * two points -> perimeter 2*distance (the boundary traversed both ways)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySet

__all__ = [
    "Orientation",
    "Point",
    "PointSet",
    "ConvexChain",
    "Partition",
    "orient",
    "convex_hull",
    "perimeter",
    "diameter",
    "rotate",
    "hull_perimeter_xy",
]

# Error coefficient for the 2x2 determinant filter (3 + 16*eps)*eps.
_ORIENT_EPS = 3.3306690738754716e-16


class Orientation(IntEnum):
    RIGHT = -1
    COLLINEAR = 0
    LEFT = 1


@dataclass(frozen=True)
class Point:
    """An input point with its original index."""

    x: float
    y: float
    id: int = -1

    def __getitem__(self, i):
        return (self.x, self.y)[i]

    def __iter__(self):
        yield self.x
        yield self.y

    def pos(self) -> tuple:
        return (self.x, self.y)


def orient(a, b, c) -> Orientation:
    """Sign of the doubled signed area of triangle abc.

    Accepts any indexable pair-like objects. The fast path is a filtered
    float determinant; near-degenerate cases are decided exactly with
    rational arithmetic on the (exactly representable) doubles.
    """
    ax, ay = a[0], a[1]
    bx, by = b[0], b[1]
    cx, cy = c[0], c[1]
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    if detleft > 0.0:
        if detright <= 0.0:
            return _sign(det)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return _sign(det)
        detsum = -detleft - detright
    else:
        return _sign(det)
    if abs(det) >= _ORIENT_EPS * detsum:
        return _sign(det)
    exact = (Fraction(ax) - Fraction(cx)) * (Fraction(by) - Fraction(cy)) - (
        Fraction(ay) - Fraction(cy)
    ) * (Fraction(bx) - Fraction(cx))
    if exact > 0:
        return Orientation.LEFT
    if exact < 0:
        return Orientation.RIGHT
    return Orientation.COLLINEAR


def _sign(v: float) -> Orientation:
    if v > 0.0:
        return Orientation.LEFT
    if v < 0.0:
        return Orientation.RIGHT
    return Orientation.COLLINEAR


class PointSet:
    """An immutable collection of points with unique ids and finite coords."""

    __slots__ = ("points", "_xy", "_ids", "_by_id")

    def __init__(self, points: Iterable[Point]):
        pts = tuple(points)
        seen = set()
        for p in pts:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise ValueError(f"non-finite coordinate in point {p}")
            if p.id in seen:
                raise ValueError(f"duplicate point id {p.id}")
            seen.add(p.id)
        self.points = pts
        self._xy = None
        self._ids = None
        self._by_id = None

    @classmethod
    def from_xy(cls, xy) -> "PointSet":
        """Build from an (n, 2) array-like; ids are the 0-based row order."""
        arr = np.asarray(xy, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("expected an (n, 2) array of coordinates")
        return cls(Point(float(x), float(y), i) for i, (x, y) in enumerate(arr))

    @property
    def xy(self) -> np.ndarray:
        if self._xy is None:
            self._xy = np.array([(p.x, p.y) for p in self.points], dtype=float)
            self._xy.setflags(write=False)
        return self._xy

    @property
    def ids(self) -> np.ndarray:
        if self._ids is None:
            self._ids = np.array([p.id for p in self.points], dtype=np.int64)
            self._ids.setflags(write=False)
        return self._ids

    def by_id(self, pid: int) -> Point:
        if self._by_id is None:
            self._by_id = {p.id: p for p in self.points}
        return self._by_id[pid]

    def subset(self, ids) -> "PointSet":
        want = set(ids)
        return PointSet(p for p in self.points if p.id in want)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __repr__(self):
        return f"PointSet(n={len(self.points)})"


class ConvexChain:
    """A convex polygon as a strictly-CCW vertex cycle with prefix arc lengths.

    prefix_len[i] is the boundary length from vertices[0] to vertices[i]
    walking counterclockwise; prefix_len[0] == 0. No three stored vertices
    are collinear. One- and two-vertex chains represent the degenerate
    hulls of one or two distinct positions.
    """

    __slots__ = ("vertices", "prefix_len", "vx", "vy", "perimeter", "_upper", "_lower")

    def __init__(self, vertices: Sequence[Point], prefix_len=None, validate: bool = False):
        verts = tuple(vertices)
        if not verts:
            raise EmptySet("a convex chain needs at least one vertex")
        self.vertices = verts
        self.vx = np.array([p.x for p in verts], dtype=float)
        self.vy = np.array([p.y for p in verts], dtype=float)
        if prefix_len is None:
            prefix = [0.0]
            for i in range(1, len(verts)):
                prefix.append(prefix[-1] + _dist(verts[i - 1], verts[i]))
            prefix_len = prefix
        self.prefix_len = np.array(prefix_len, dtype=float)
        k = len(verts)
        if k == 1:
            self.perimeter = 0.0
        else:
            self.perimeter = float(self.prefix_len[-1] + _dist(verts[-1], verts[0]))
        if validate:
            self._check()
        self._upper = None
        self._lower = None

    def _check(self):
        verts = self.vertices
        k = len(verts)
        if k >= 3:
            for i in range(k):
                a, b, c = verts[i - 2], verts[i - 1], verts[i]
                if orient(a, b, c) != Orientation.LEFT:
                    raise ValueError(f"vertices {a},{b},{c} are not a strict left turn")
        if np.any(np.diff(self.prefix_len) < 0):
            raise ValueError("prefix_len must be nondecreasing")
        if self.prefix_len[0] != 0.0:
            raise ValueError("prefix_len[0] must be 0")

    @classmethod
    def from_vertices(cls, vertices: Sequence[Point]) -> "ConvexChain":
        return cls(vertices, validate=True)

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"ConvexChain(k={len(self.vertices)}, per={self.perimeter:.6g})"

    # Cyclic arc parameter of a boundary position. A position is either a
    # vertex index or (edge_index, point) for a point on the open edge
    # edge_index -> edge_index+1 (indices mod k).
    def arc_param(self, vertex_index: int, at=None) -> float:
        s = float(self.prefix_len[vertex_index])
        if at is not None:
            v = self.vertices[vertex_index]
            s += math.hypot(at[0] - v.x, at[1] - v.y)
        return s

    def arc_ccw(self, s_from: float, s_to: float) -> float:
        """Boundary length walking CCW from parameter s_from to s_to."""
        if self.perimeter == 0.0:
            return 0.0
        d = (s_to - s_from) % self.perimeter
        return d


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _dedupe_sorted_points(points: Iterable[Point]) -> list:
    """Sort by position, keep one representative (lowest id) per position."""
    best = {}
    for p in points:
        key = (p.x, p.y)
        q = best.get(key)
        if q is None or p.id < q.id:
            best[key] = p
    return sorted(best.values(), key=lambda p: (p.x, p.y))


def convex_hull(points) -> ConvexChain:
    """Convex hull of a point set as a CCW chain, via monotone chain.

    Duplicate positions collapse to one vertex (lowest id wins); collinear
    non-extreme points are dropped. Degenerate inputs yield 1- or 2-vertex
    chains.
    """
    if isinstance(points, PointSet):
        pts = points.points
    else:
        pts = tuple(points)
    if not pts:
        raise EmptySet("convex_hull of an empty set")
    srt = _dedupe_sorted_points(pts)
    if len(srt) == 1:
        return ConvexChain(srt)
    if len(srt) == 2:
        return ConvexChain(srt)
    lower = []
    for p in srt:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) != Orientation.LEFT:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(srt):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) != Orientation.LEFT:
            upper.pop()
        upper.append(p)
    cycle = lower[:-1] + upper[:-1]
    if len(cycle) == 2 and cycle[0].pos() == cycle[1].pos():
        cycle = cycle[:1]
    return ConvexChain(cycle)


def perimeter(chain: ConvexChain) -> float:
    """Closed boundary length; doubled for 2-vertex chains, 0 for a point."""
    return chain.perimeter


def diameter(chain: ConvexChain) -> float:
    """Largest pairwise vertex distance, by rotating calipers."""
    verts = chain.vertices
    k = len(verts)
    if k == 1:
        return 0.0
    if k == 2:
        return _dist(verts[0], verts[1])
    vx, vy = chain.vx, chain.vy

    def area2(i, j, l):
        return (vx[j] - vx[i]) * (vy[l] - vy[i]) - (vy[j] - vy[i]) * (vx[l] - vx[i])

    best = 0.0
    j = 1
    for i in range(k):
        i2 = (i + 1) % k
        while area2(i, i2, (j + 1) % k) > area2(i, i2, j):
            j = (j + 1) % k
        best = max(
            best,
            math.hypot(vx[i] - vx[j], vy[i] - vy[j]),
            math.hypot(vx[i2] - vx[j], vy[i2] - vy[j]),
        )
    return best


def rotate(points: PointSet, angle: float) -> PointSet:
    """Rotate every point about the origin; ids are preserved."""
    if not math.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    c, s = math.cos(angle), math.sin(angle)
    return PointSet(
        Point(c * p.x - s * p.y, s * p.x + c * p.y, p.id) for p in points
    )


def hull_perimeter_xy(xy, presorted: bool = False) -> float:
    """Hull perimeter straight from an (m, 2) coordinate array.

    Fast path used by the oracles and candidate evaluation; follows the
    same degenerate conventions as convex_hull/perimeter. With
    presorted=True the rows must already be lexicographically sorted.
    """
    arr = np.asarray(xy, dtype=float)
    m = arr.shape[0]
    if m == 0:
        raise EmptySet("hull of an empty coordinate array")
    if m == 1:
        return 0.0
    if presorted:
        pts = list(map(tuple, arr))
    else:
        order = np.lexsort((arr[:, 1], arr[:, 0]))
        pts = list(map(tuple, arr[order]))
    return _hull_perimeter_sorted(pts)


def _hull_perimeter_sorted(pts) -> float:
    """Perimeter of the hull of lexicographically sorted (x, y) tuples."""
    # Drop exact duplicates (sorted, so they are adjacent).
    ded = [pts[0]]
    for p in pts[1:]:
        if p != ded[-1]:
            ded.append(p)
    m = len(ded)
    if m == 1:
        return 0.0
    if m == 2:
        return 2.0 * math.hypot(ded[1][0] - ded[0][0], ded[1][1] - ded[0][1])
    total = 0.0
    for seq in (ded, ded[::-1]):
        hull = []
        hlen = 0.0
        for p in seq:
            while len(hull) >= 2:
                v0, v1 = hull[-2], hull[-1]
                cross = (v1[0] - v0[0]) * (p[1] - v0[1]) - (v1[1] - v0[1]) * (
                    p[0] - v0[0]
                )
                if cross <= 0.0:
                    hlen -= math.hypot(v1[0] - v0[0], v1[1] - v0[1])
                    hull.pop()
                else:
                    break
            if hull:
                hlen += math.hypot(p[0] - hull[-1][0], p[1] - hull[-1][1])
            hull.append(p)
        total += hlen
    return total


@dataclass(frozen=True)
class Partition:
    """A bipartition of the input ids with its perimeter-sum cost.

    provenance records which solver branch produced it, e.g.
    "canonical_orientation(3)", "singleton", "candidate(...)", "approx",
    "oracle".
    """

    left_ids: frozenset
    right_ids: frozenset
    cost: float
    per_left: float
    per_right: float
    provenance: str

    @classmethod
    def from_split(cls, points: PointSet, left_ids, provenance: str) -> "Partition":
        left = frozenset(left_ids)
        all_ids = frozenset(p.id for p in points)
        if not left or left == all_ids:
            raise ValueError("both sides of a partition must be nonempty")
        if not left <= all_ids:
            raise ValueError("left ids are not a subset of the input ids")
        right = all_ids - left
        per_l = hull_perimeter_xy(
            [(p.x, p.y) for p in points if p.id in left]
        )
        per_r = hull_perimeter_xy(
            [(p.x, p.y) for p in points if p.id in right]
        )
        return cls(left, right, per_l + per_r, per_l, per_r, provenance)

    def canonical(self) -> "Partition":
        """Put the side containing the smallest id on the left."""
        if min(self.left_ids) < min(self.right_ids):
            return self
        return Partition(
            self.right_ids,
            self.left_ids,
            self.cost,
            self.per_right,
            self.per_left,
            self.provenance,
        )

    def sort_key(self):
        c = self.canonical()
        return (c.cost, tuple(sorted(c.left_ids)))

    def validate(self, points: PointSet, tol: float = 1e-9):
        all_ids = set(p.id for p in points)
        assert self.left_ids and self.right_ids
        assert not (self.left_ids & self.right_ids)
        assert (self.left_ids | self.right_ids) == all_ids
        scale = max(1.0, abs(self.cost))
        assert abs(self.cost - (self.per_left + self.per_right)) <= tol * scale
        return True


def better(a: Partition, b: Partition) -> Partition:
    """Deterministic min: lower cost, ties by lexicographic left ids."""
    if a is None:
        return b
    if b is None:
        return a
    return a if a.sort_key() <= b.sort_key() else b
