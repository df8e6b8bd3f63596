"""Compressed quadtree over normalized points and the base-square families.

Points are first normalized into the interior of the unit square with a
margin (they land in [0.25, 0.75]^2) so that every square the solver ever
looks at stays inside U. Cell arithmetic runs on a 53-bit integer grid,
which makes the XOR/most-significant-bit tricks exact.

The tree follows the standard compressed recursion: a square with points
in at least two quadrants splits into its four quadrants; otherwise it
shrinks to the smallest canonical square containing its points, leaving
an empty donut region. Base squares come in five families: every square
generated by the recursion (B1), a smallest corner-anchored square per
point (B2), a corner-anchored square per shrink (B3), and one square per
touching pair of final regions (B4.1 point/point, B4.2 shrink/shrink,
B4.3 point/shrink). Corner-only contact counts as touching.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

from .errors import EmptySet
from .geometry import Point, PointSet

__all__ = [
    "GRID_BITS",
    "Transform",
    "CanonicalSquare",
    "Square",
    "QuadtreeNode",
    "QuadtreeTree",
    "normalize",
    "smallest_canonical_square",
    "build",
    "base_squares",
    "expand",
    "dump_tree",
]

GRID_BITS = 52
_GRID = 1 << GRID_BITS


@dataclass(frozen=True)
class Transform:
    """Affine map between input coordinates and normalized ones."""

    scale: float
    ox: float
    oy: float
    degenerate: bool = False

    def to_norm(self, x: float, y: float) -> tuple:
        if self.degenerate:
            return (0.5, 0.5)
        return ((x - self.ox) * self.scale, (y - self.oy) * self.scale)

    def from_norm(self, u: float, v: float) -> tuple:
        return (u / self.scale + self.ox, v / self.scale + self.oy)


@dataclass(frozen=True)
class CanonicalSquare:
    """Dyadic square: cell (cell_x, cell_y) at a given level of U.

    Closed on the left and bottom side, open on the right and top side.
    """

    level: int
    cell_x: int
    cell_y: int

    @property
    def size(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def x0(self) -> float:
        return self.cell_x * self.size

    @property
    def y0(self) -> float:
        return self.cell_y * self.size

    def as_square(self) -> "Square":
        s = self.size
        return Square((self.x0 + s / 2.0, self.y0 + s / 2.0), s)

    def corners(self):
        s = self.size
        x0, y0 = self.x0, self.y0
        return ((x0, y0), (x0 + s, y0), (x0, y0 + s), (x0 + s, y0 + s))


@dataclass(frozen=True)
class Square:
    """A free (non-canonical) axis-parallel square."""

    center: tuple
    size: float

    @property
    def x0(self):
        return self.center[0] - self.size / 2.0

    @property
    def x1(self):
        return self.center[0] + self.size / 2.0

    @property
    def y0(self):
        return self.center[1] - self.size / 2.0

    @property
    def y1(self):
        return self.center[1] + self.size / 2.0

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


class QuadtreeNode:
    """A recursion node: a leaf, a quadtree split, or a shrinking step."""

    __slots__ = ("square", "kind", "children", "inner", "point_ids", "pos_index")

    def __init__(self, square, kind, children=(), inner=None, point_ids=(), pos_index=None):
        self.square = square
        self.kind = kind  # "leaf" | "split" | "shrink"
        self.children = children
        self.inner = inner  # CanonicalSquare of the shrink target
        self.point_ids = point_ids
        self.pos_index = pos_index  # distinct-position index for 1-point leaves


class QuadtreeTree:
    """Root node plus flat views used by the base-square construction."""

    def __init__(self, root, nodes, leaf_regions, donut_regions, positions, id_groups, pos_leaf):
        self.root = root
        self.nodes = nodes
        self.leaf_regions = leaf_regions    # (CanonicalSquare, pos_index or None)
        self.donut_regions = donut_regions  # (outer CanonicalSquare, inner CanonicalSquare)
        self.positions = positions          # distinct (x, y) in normalized coords
        self.id_groups = id_groups          # ids per distinct position
        self.pos_leaf = pos_leaf            # pos_index -> leaf CanonicalSquare


def normalize(points: PointSet):
    """Scale points into [0.25, 0.75]^2; returns (normalized, transform).

    All identical points yield a degenerate transform mapping everything
    to the center (callers treat that case upstream).
    """
    if len(points) == 0:
        raise EmptySet("cannot normalize an empty point set")
    xs = points.xy[:, 0]
    ys = points.xy[:, 1]
    w = float(xs.max() - xs.min())
    h = float(ys.max() - ys.min())
    e = max(w, h)
    cx = float(xs.min() + xs.max()) / 2.0
    cy = float(ys.min() + ys.max()) / 2.0
    if e == 0.0:
        tf = Transform(1.0, cx - 0.5, cy - 0.5, degenerate=True)
    else:
        scale = 0.5 / e
        tf = Transform(scale, cx - e, cy - e, degenerate=False)
    normed = PointSet(
        Point(*tf.to_norm(p.x, p.y), p.id) for p in points
    )
    return normed, tf


def _to_grid(v: float) -> int:
    i = int(v * _GRID)
    if i < 0:
        i = 0
    if i >= _GRID:
        i = _GRID - 1
    return i


def smallest_canonical_square(p, q) -> CanonicalSquare:
    """Smallest dyadic square containing two points of (0,1)^2, in O(1).

    Uses the most significant differing bit of the 53-bit grid
    coordinates. Coincident points land in the deepest representable
    cell (level 52).
    """
    ix, iy = _to_grid(p[0]), _to_grid(p[1])
    jx, jy = _to_grid(q[0]), _to_grid(q[1])
    shift = max((ix ^ jx).bit_length(), (iy ^ jy).bit_length())
    level = GRID_BITS - shift
    return CanonicalSquare(level, ix >> shift, iy >> shift)


def _smallest_cell_of_range(min_x, max_x, min_y, max_y) -> tuple:
    shift = max((min_x ^ max_x).bit_length(), (min_y ^ max_y).bit_length())
    return shift, min_x >> shift, min_y >> shift


def build(points: PointSet) -> QuadtreeTree:
    """Compressed quadtree for normalized points (O(n) nodes).

    Duplicate positions travel together: the recursion works on distinct
    positions and a leaf holds at most one of them.
    """
    pos_to_ids = {}
    for p in points:
        pos_to_ids.setdefault((p.x, p.y), []).append(p.id)
    positions = sorted(pos_to_ids.keys())
    id_groups = [sorted(pos_to_ids[pos]) for pos in positions]
    gx = [_to_grid(x) for x, _ in positions]
    gy = [_to_grid(y) for _, y in positions]

    nodes = []
    leaf_regions = []
    donut_regions = []
    pos_leaf = [None] * len(positions)

    def ids_of(idxs):
        out = []
        for i in idxs:
            out.extend(id_groups[i])
        return tuple(out)

    def make(square: CanonicalSquare, idxs) -> QuadtreeNode:
        if len(idxs) <= 1:
            node = QuadtreeNode(square, "leaf", point_ids=ids_of(idxs),
                                pos_index=idxs[0] if idxs else None)
            nodes.append(node)
            leaf_regions.append((square, node.pos_index))
            if idxs:
                pos_leaf[idxs[0]] = square
            return node
        min_x = min(gx[i] for i in idxs)
        max_x = max(gx[i] for i in idxs)
        min_y = min(gy[i] for i in idxs)
        max_y = max(gy[i] for i in idxs)
        shift, cx, cy = _smallest_cell_of_range(min_x, max_x, min_y, max_y)
        level = GRID_BITS - shift
        target = CanonicalSquare(level, cx, cy)
        if target == square:
            bit = GRID_BITS - (square.level + 1)
            quads = [[], [], [], []]
            for i in idxs:
                q = (((gy[i] >> bit) & 1) << 1) | ((gx[i] >> bit) & 1)
                quads[q].append(i)
            children = []
            for q in range(4):
                child_sq = CanonicalSquare(
                    square.level + 1,
                    square.cell_x * 2 + (q & 1),
                    square.cell_y * 2 + (q >> 1),
                )
                children.append(make(child_sq, quads[q]))
            node = QuadtreeNode(square, "split", children=tuple(children),
                                point_ids=ids_of(idxs))
            nodes.append(node)
            return node
        child = make(target, idxs)
        node = QuadtreeNode(square, "shrink", children=(child,), inner=target,
                            point_ids=ids_of(idxs))
        nodes.append(node)
        donut_regions.append((square, target))
        return node

    root = make(CanonicalSquare(0, 0, 0), list(range(len(positions))))
    return QuadtreeTree(root, nodes, leaf_regions, donut_regions,
                        positions, id_groups, pos_leaf)


def expand(sq: Square, c1: float = 0.25) -> Square:
    """Grow a square about its center by the factor 1 + 2/c1 (= 9)."""
    return Square(sq.center, sq.size * (1.0 + 2.0 / c1))


def _corner_square_for_point(px, py, corners) -> Square:
    """Smallest square containing (px,py) with a corner of the cell.

    Nearest corner in the Chebyshev sense; degenerate (zero-size) choices
    fall through to the next corner, ties break lowest-then-leftmost.
    """
    ranked = sorted(
        corners,
        key=lambda c: (max(abs(px - c[0]), abs(py - c[1])), c[1], c[0]),
    )
    for cx, cy in ranked:
        d = max(abs(px - cx), abs(py - cy))
        if d > 0.0:
            sx = 1.0 if px >= cx else -1.0
            sy = 1.0 if py >= cy else -1.0
            return Square((cx + sx * d / 2.0, cy + sy * d / 2.0), d)
    # Point sits exactly on the only corner: emit a minimal useful square.
    cx, cy = ranked[0]
    return Square((cx, cy), 2.0 ** -GRID_BITS)


def _corner_square_for_rect(x0, y0, x1, y1, corners) -> Square:
    """Smallest square containing the rect with a corner of the parent."""
    best = None
    for cx, cy in sorted(corners, key=lambda c: (c[1], c[0])):
        d = max(abs(cx - x0), abs(cx - x1), abs(cy - y0), abs(cy - y1))
        if best is None or d < best[0]:
            best = (d, cx, cy)
    d, cx, cy = best
    mx = (x0 + x1) / 2.0
    my = (y0 + y1) / 2.0
    sx = 1.0 if mx >= cx else -1.0
    sy = 1.0 if my >= cy else -1.0
    return Square((cx + sx * d / 2.0, cy + sy * d / 2.0), d)


def _enclosing_square(x0, y0, x1, y1) -> Square:
    size = max(x1 - x0, y1 - y0)
    return Square(((x0 + x1) / 2.0, (y0 + y1) / 2.0), size)


def _touching_pairs(region_edges, nregions):
    """Pairs of regions whose boundaries share at least one point.

    Regions are axis-parallel; two of them touch exactly when some pair
    of their boundary edges lies on a common supporting line with
    overlapping (closed) spans. Swept per line, O(E log E) overall.
    """
    from collections import defaultdict

    by_line = defaultdict(list)
    for axis, coord, lo, hi, rid in region_edges:
        by_line[(axis, coord)].append((lo, hi, rid))
    pairs = set()
    for segs in by_line.values():
        segs.sort()
        active = []  # (hi, rid)
        for lo, hi, rid in segs:
            active = [(h, r) for (h, r) in active if h >= lo]
            for h, r in active:
                if r != rid:
                    pairs.add((min(r, rid), max(r, rid)))
            active.append((hi, rid))
    return pairs


def base_squares(tree: QuadtreeTree) -> list:
    """All five base-square families, deduplicated; O(n) squares."""
    out = {}

    def add(sq: Square):
        out[(sq.center[0], sq.center[1], sq.size)] = sq

    # B1: every square generated during the recursion.
    for node in tree.nodes:
        add(node.square.as_square())

    # B2: per point, a smallest square sharing a corner with its leaf cell.
    for pos_index, (px, py) in enumerate(tree.positions):
        leaf_sq = tree.pos_leaf[pos_index]
        add(_corner_square_for_point(px, py, leaf_sq.corners()))

    # B3: per shrink, a smallest square containing the inner square and
    # sharing a corner with the parent square.
    for outer, inner in tree.donut_regions:
        s = inner.size
        add(_corner_square_for_rect(inner.x0, inner.y0, inner.x0 + s,
                                    inner.y0 + s, outer.corners()))

    # B4: touching pairs of final regions.
    regions = []
    edges = []

    def rect_edges(rid, x0, y0, x1, y1):
        edges.append((0, x0, y0, y1, rid))
        edges.append((0, x1, y0, y1, rid))
        edges.append((1, y0, x0, x1, rid))
        edges.append((1, y1, x0, x1, rid))

    for square, pos_index in tree.leaf_regions:
        rid = len(regions)
        regions.append(("leaf", square, pos_index))
        s = square.size
        rect_edges(rid, square.x0, square.y0, square.x0 + s, square.y0 + s)
    for outer, inner in tree.donut_regions:
        rid = len(regions)
        regions.append(("donut", outer, inner))
        s = outer.size
        rect_edges(rid, outer.x0, outer.y0, outer.x0 + s, outer.y0 + s)
        s = inner.size
        rect_edges(rid, inner.x0, inner.y0, inner.x0 + s, inner.y0 + s)

    for r1, r2 in _touching_pairs(edges, len(regions)):
        kind1, a1, b1 = regions[r1]
        kind2, a2, b2 = regions[r2]
        if kind1 == "leaf" and b1 is None:
            continue
        if kind2 == "leaf" and b2 is None:
            continue
        if kind1 == "leaf" and kind2 == "leaf":
            p = tree.positions[b1]
            q = tree.positions[b2]
            add(_enclosing_square(min(p[0], q[0]), min(p[1], q[1]),
                                  max(p[0], q[0]), max(p[1], q[1])))
        elif kind1 == "donut" and kind2 == "donut":
            s1, s2 = b1, b2
            add(_enclosing_square(
                min(s1.x0, s2.x0), min(s1.y0, s2.y0),
                max(s1.x0 + s1.size, s2.x0 + s2.size),
                max(s1.y0 + s1.size, s2.y0 + s2.size)))
        else:
            if kind1 == "leaf":
                p = tree.positions[b1]
                s2 = b2
            else:
                p = tree.positions[b2]
                s2 = b1
            add(_enclosing_square(
                min(p[0], s2.x0), min(p[1], s2.y0),
                max(p[0], s2.x0 + s2.size), max(p[1], s2.y0 + s2.size)))

    return [out[k] for k in sorted(out.keys())]


def dump_tree(tree: QuadtreeTree) -> dict:
    """JSON-friendly dump of nodes and regions for the render command."""
    nodes = []
    for node in tree.nodes:
        sq = node.square
        entry = {
            "kind": node.kind,
            "square": {"x0": sq.x0, "y0": sq.y0, "size": sq.size, "level": sq.level},
            "points": list(node.point_ids),
        }
        if node.inner is not None:
            inner = node.inner
            entry["inner"] = {
                "x0": inner.x0, "y0": inner.y0,
                "size": inner.size, "level": inner.level,
            }
        nodes.append(entry)
    return {"nodes": nodes}
