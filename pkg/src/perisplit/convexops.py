"""Tangents, bridges, envelopes, and the hull-of-hulls perimeter merge.

The central routine is hull_of_hulls_perimeter: given pairwise disjoint
convex chains with prefix arc lengths, it computes the perimeter of the
convex hull of their union without ever materializing the union's point
set. It sweeps the upper envelope of the chains, then runs a Graham-like
scan over the envelope slices in which the usual right-turn test is
replaced by a valid-triple test on bridges (upper common tangents), and
reads boundary-portion lengths off the chains' prefix arrays. The same
machinery runs on a y-mirrored view for the lower hull.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import EmptySet, HullsNotDisjoint, InvalidSliceOrder
from .geometry import ConvexChain, Orientation, orient

__all__ = [
    "Slice",
    "TangentDiagnostics",
    "bridge",
    "bridge_points",
    "upper_envelope",
    "hull_of_hulls_perimeter",
    "tangent_diagnostics",
]

LEFT = Orientation.LEFT
RIGHT = Orientation.RIGHT
COLLINEAR = Orientation.COLLINEAR


class _BoundaryView:
    """One chain's upper (or mirrored lower) boundary, left to right.

    Positions along the view have strictly increasing x. With flip=True
    the view walks the chain's lower boundary with y negated, so the same
    upper-hull code serves both passes.
    """

    __slots__ = ("chain", "flip", "seq", "ux", "uy")

    def __init__(self, chain: ConvexChain, flip: bool = False):
        self.chain = chain
        self.flip = flip
        vx, vy = chain.vx, chain.vy
        k = len(vx)
        sign = -1.0 if flip else 1.0
        keys = [(vx[i], -sign * vy[i]) for i in range(k)]
        i_l = min(range(k), key=lambda i: keys[i])
        i_r = max(range(k), key=lambda i: (vx[i], sign * vy[i]))
        step = 1 if flip else -1
        seq = [i_l]
        i = i_l
        while i != i_r:
            i = (i + step) % k
            seq.append(i)
        self.seq = seq
        self.ux = np.array([vx[i] for i in seq])
        self.uy = np.array([sign * vy[i] for i in seq])

    def __len__(self):
        return len(self.seq)

    def vertex_pos(self, t: int) -> "_Pos":
        return _Pos(float(self.ux[t]), float(self.uy[t]),
                    float(self.chain.prefix_len[self.seq[t]]))

    def cut_pos(self, t: int, x: float) -> "_Pos":
        """Point at abscissa x on the view edge between seq[t], seq[t+1]."""
        x0, y0 = self.ux[t], self.uy[t]
        x1, y1 = self.ux[t + 1], self.uy[t + 1]
        y = y0 + (x - x0) * (y1 - y0) / (x1 - x0)
        sign = -1.0 if self.flip else 1.0
        if self.flip:
            base = self.seq[t]
        else:
            base = self.seq[t + 1]
        bx = self.chain.vx[base]
        by = self.chain.vy[base]
        s = float(self.chain.prefix_len[base]) + math.hypot(x - bx, sign * y - by)
        return _Pos(float(x), float(y), s)

    def y_at(self, x: float) -> float:
        """Boundary height at abscissa x (x must be inside the x-range)."""
        t = bisect_left(self.ux, x)
        if t < len(self.ux) and self.ux[t] == x:
            return float(self.uy[t])
        x0, y0 = self.ux[t - 1], self.uy[t - 1]
        x1, y1 = self.ux[t], self.uy[t]
        return float(y0 + (x - x0) * (y1 - y0) / (x1 - x0))

    def arc(self, left: "_Pos", right: "_Pos") -> float:
        """Boundary length from position `left` to position `right`."""
        per = self.chain.perimeter
        if per == 0.0:
            return 0.0
        if self.flip:
            return (right.s - left.s) % per
        return (left.s - right.s) % per


@dataclass(frozen=True)
class _Pos:
    """A boundary position: view coordinates plus the chain arc parameter."""

    x: float
    y: float
    s: float

    def __getitem__(self, i):
        return (self.x, self.y)[i]

    def same_point(self, other: "_Pos") -> bool:
        return self.x == other.x and self.y == other.y


class Slice:
    """A vertical slice of one chain: the part inside a closed x-slab.

    x_range is the slab; upper_index_range is the (inclusive) range of
    positions of the source's upper-boundary sequence strictly inside the
    slab, empty when the slab cuts a single edge. Virtual positions 0 and
    n-1 are the slab-boundary points, which may be edge cut points rather
    than vertices.
    """

    __slots__ = ("source", "x_range", "upper_index_range", "view", "_inner_lo",
                 "_inner_n", "_left", "_right", "n")

    def __init__(self, view: _BoundaryView, x_lo: float, x_hi: float):
        if x_lo > x_hi:
            raise InvalidSliceOrder(f"empty slab [{x_lo}, {x_hi}]")
        self.view = view
        self.source = view.chain
        self.x_range = (x_lo, x_hi)
        ux = view.ux
        if x_lo == x_hi:
            t = bisect_left(ux, x_lo)
            if t < len(ux) and ux[t] == x_lo:
                self._left = view.vertex_pos(t)
            else:
                self._left = view.cut_pos(t - 1, x_lo)
            self._right = self._left
            self._inner_lo, self._inner_n = t, 0
            self.n = 1
            self.upper_index_range = (t, t - 1)
            return
        lo = bisect_right(ux, x_lo)
        hi = bisect_left(ux, x_hi) - 1
        t0 = bisect_left(ux, x_lo)
        if t0 < len(ux) and ux[t0] == x_lo:
            self._left = view.vertex_pos(t0)
        else:
            self._left = view.cut_pos(t0 - 1, x_lo)
        t1 = bisect_left(ux, x_hi)
        if t1 < len(ux) and ux[t1] == x_hi:
            self._right = view.vertex_pos(t1)
        else:
            self._right = view.cut_pos(t1 - 1, x_hi)
        self._inner_lo = lo
        self._inner_n = max(0, hi - lo + 1)
        self.n = self._inner_n + 2
        self.upper_index_range = (lo, hi)

    def pt(self, i: int) -> _Pos:
        if i == 0:
            return self._left
        if i == self.n - 1:
            return self._right
        return self.view.vertex_pos(self._inner_lo + i - 1)

    @property
    def left(self) -> _Pos:
        return self._left

    @property
    def right(self) -> _Pos:
        return self._right

    def arc(self, a: _Pos, b: _Pos) -> float:
        return self.view.arc(a, b)

    def __repr__(self):
        return f"Slice(x=[{self.x_range[0]:.4g},{self.x_range[1]:.4g}], n={self.n})"


# ---------------------------------------------------------------------------
# Bridges (upper common tangents between x-ordered slices)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Bridge:
    ia: int
    ib: int
    pa: _Pos
    pb: _Pos

    @property
    def length(self) -> float:
        return math.hypot(self.pb.x - self.pa.x, self.pb.y - self.pa.y)


def _tangent_from_left(q: _Pos, b: Slice) -> int:
    """Index of b's upper tangent point seen from a point q on its left."""
    lo, hi = 0, b.n - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if orient(q, b.pt(mid), b.pt(mid + 1)) == LEFT:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _is_tangent(a: Slice, i: int, b: Slice, j: int) -> bool:
    pa, pb = a.pt(i), b.pt(j)
    if i > 0 and orient(pa, pb, a.pt(i - 1)) == LEFT:
        return False
    if i < a.n - 1 and orient(pa, pb, a.pt(i + 1)) == LEFT:
        return False
    if j > 0 and orient(pa, pb, b.pt(j - 1)) == LEFT:
        return False
    if j < b.n - 1 and orient(pa, pb, b.pt(j + 1)) == LEFT:
        return False
    return True


def _bridge_linear(a: Slice, b: Slice) -> tuple:
    """Two-pointer upper tangent walk; linear fallback kept for testing."""
    i, j = a.n - 1, 0
    # Start off a vertical line (coincident slab boundary x).
    while a.pt(i).x == b.pt(j).x:
        if a.pt(i).y < b.pt(j).y:
            if i == 0:
                break
            i -= 1
        else:
            if j == b.n - 1:
                break
            j += 1
    moved = True
    while moved:
        moved = False
        while i > 0 and orient(a.pt(i), b.pt(j), a.pt(i - 1)) == LEFT:
            i -= 1
            moved = True
        while j < b.n - 1 and orient(a.pt(i), b.pt(j), b.pt(j + 1)) == LEFT:
            j += 1
            moved = True
    return i, j


def _bridge_binary(a: Slice, b: Slice) -> tuple:
    """Nested binary search for the upper tangent, O(log^2) probes."""
    lo, hi = 0, a.n - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        pa = a.pt(mid)
        j = _tangent_from_left(pa, b)
        pb = b.pt(j)
        if pa.x == pb.x:
            # Vertical probe line: the tangent point on a lies further left.
            hi = mid - 1
            continue
        if mid < a.n - 1 and orient(pa, pb, a.pt(mid + 1)) == LEFT:
            lo = mid + 1
        elif mid > 0 and orient(pa, pb, a.pt(mid - 1)) == LEFT:
            hi = mid - 1
        else:
            lo = hi = mid
    i = lo
    j = _tangent_from_left(a.pt(i), b)
    if not _is_tangent(a, i, b, j):
        return _bridge_linear(a, b)
    return i, j


def bridge(a: Slice, b: Slice) -> tuple:
    """Endpoint indices of the upper common tangent segment from a to b.

    Every other position of both slices lies on or below the bridge line;
    collinear ties resolve to the extreme (innermost) positions. The
    slices must be x-ordered: a's slab left of b's, overlapping in at
    most one abscissa.
    """
    if b.x_range[1] < a.x_range[0] or a.x_range[1] > b.x_range[0]:
        raise InvalidSliceOrder(
            f"slabs {a.x_range} and {b.x_range} are not x-ordered"
        )
    return _bridge_binary(a, b)


def bridge_points(a: Slice, b: Slice) -> tuple:
    i, j = bridge(a, b)
    return a.pt(i), b.pt(j)


def _bridge_obj(a: Slice, b: Slice) -> _Bridge:
    i, j = _bridge_binary(a, b)
    return _Bridge(i, j, a.pt(i), b.pt(j))


# ---------------------------------------------------------------------------
# Upper envelope sweep
# ---------------------------------------------------------------------------


def _seg_y(view: _BoundaryView, x: float) -> float:
    """Height of the L-R segment of a view at abscissa x."""
    x0, y0 = float(view.ux[0]), float(view.uy[0])
    x1, y1 = float(view.ux[-1]), float(view.uy[-1])
    if x1 == x0:
        return max(y0, y1)
    t = (x - x0) / (x1 - x0)
    return y0 + t * (y1 - y0)


def _envelope_slices(views) -> list:
    """Left-to-right maximal slices forming the upper envelope."""
    events = []
    for vi, view in enumerate(views):
        events.append((float(view.ux[0]), 0, vi))
        events.append((float(view.ux[-1]), 1, vi))
    events.sort()

    def above(vi, vj) -> bool:
        vwi, vwj = views[vi], views[vj]
        lo = max(float(vwi.ux[0]), float(vwj.ux[0]))
        hi = min(float(vwi.ux[-1]), float(vwj.ux[-1]))
        xm = 0.5 * (lo + hi)
        yi, yj = vwi.y_at(xm), vwj.y_at(xm)
        if yi != yj:
            return yi > yj
        yi, yj = _seg_y(vwi, xm), _seg_y(vwj, xm)
        if yi != yj:
            return yi > yj
        return vi > vj

    sigma = []  # bottom to top
    out = []
    top = None
    top_since = 0.0

    def emit(vi, x_lo, x_hi):
        if out and out[-1][0] == vi and out[-1][2] == x_lo:
            out[-1] = (vi, out[-1][1], x_hi)
        else:
            out.append((vi, x_lo, x_hi))

    for x, kind, vi in events:
        if kind == 0:
            lo, hi = 0, len(sigma)
            while lo < hi:
                mid = (lo + hi) // 2
                if above(vi, sigma[mid]):
                    lo = mid + 1
                else:
                    hi = mid
            sigma.insert(lo, vi)
            if lo == len(sigma) - 1:
                if top is not None:
                    emit(top, top_since, x)
                top = vi
                top_since = x
        else:
            idx = sigma.index(vi)
            sigma.pop(idx)
            if vi == top:
                emit(vi, top_since, x)
                top = sigma[-1] if sigma else None
                top_since = x
    return [Slice(views[vi], x_lo, x_hi) for vi, x_lo, x_hi in out]


def upper_envelope(chains) -> list:
    """Envelope slices of pairwise disjoint chains, left to right.

    Intersecting or touching chains violate the precondition; the result
    is undefined for them (checked only in tests).
    """
    views = [_BoundaryView(c, flip=False) for c in chains]
    return _envelope_slices(views)


# ---------------------------------------------------------------------------
# Graham-like scan over slices and the perimeter merge
# ---------------------------------------------------------------------------


def _valid_triple(b1: _Bridge, b2: _Bridge) -> bool:
    if b1.pb.x < b2.pa.x:
        return True
    if b1.pb.same_point(b2.pa):
        return orient(b1.pa, b1.pb, b2.pb) == RIGHT
    return False


def _hull_pass(views):
    """Length of the upper hull over the views, plus its two endpoints."""
    slices = _envelope_slices(views)
    stack = [slices[0]]
    brs = []
    for s in slices[1:]:
        b = _bridge_obj(stack[-1], s)
        while brs and not _valid_triple(brs[-1], b):
            stack.pop()
            brs.pop()
            b = _bridge_obj(stack[-1], s)
        stack.append(s)
        brs.append(b)
    total = 0.0
    entry = stack[0].left
    for t, s in enumerate(stack):
        if t < len(brs):
            exit_pos = brs[t].pa
        else:
            exit_pos = s.right
        total += s.arc(entry, exit_pos)
        if t < len(brs):
            total += brs[t].length
            entry = brs[t].pb
    return total, stack[0].left, stack[-1].right


def hull_of_hulls_perimeter(chains) -> float:
    """Perimeter of the convex hull of a union of disjoint convex chains.

    Each chain must carry prefix arc lengths. Runs the envelope sweep and
    bridge scan twice (upper and mirrored lower), then closes the two
    monotone hull chains with the vertical extreme edges.
    """
    chains = list(chains)
    if not chains:
        raise EmptySet("hull of zero chains")
    if len(chains) == 1:
        return chains[0].perimeter
    xmin = min(float(np.min(c.vx)) for c in chains)
    xmax = max(float(np.max(c.vx)) for c in chains)
    ymin = min(float(np.min(c.vy)) for c in chains)
    ymax = max(float(np.max(c.vy)) for c in chains)
    if xmin == xmax:
        return 2.0 * (ymax - ymin)
    if ymin == ymax:
        return 2.0 * (xmax - xmin)
    up_len, up_l, up_r = _hull_pass([_BoundaryView(c, flip=False) for c in chains])
    lo_len, lo_l, lo_r = _hull_pass([_BoundaryView(c, flip=True) for c in chains])
    # Lower-pass y values are mirrored.
    left_edge = up_l.y - (-lo_l.y)
    right_edge = up_r.y - (-lo_r.y)
    return up_len + lo_len + left_edge + right_edge


# ---------------------------------------------------------------------------
# Tangent diagnostics for two disjoint hulls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TangentDiagnostics:
    """Inner/outer common tangents and the separation quantities.

    separation_angle is the opening of the empty wedges formed by the two
    inner tangents; outer_angle is the opening of the hull-containing
    wedge of the outer tangents (0 when they are parallel).
    """

    inner_tangents: tuple
    outer_tangents: tuple
    separation_angle: float
    outer_angle: float
    separation_distance: float


def _point_in_chain(p, chain: ConvexChain) -> bool:
    verts = chain.vertices
    k = len(verts)
    if k == 1:
        return p[0] == verts[0].x and p[1] == verts[0].y
    if k == 2:
        return _point_on_segment(p, verts[0], verts[1])
    for i in range(k):
        if orient(verts[i], verts[(i + 1) % k], p) == RIGHT:
            return False
    return True


def _point_on_segment(p, a, b) -> bool:
    if orient(a, b, p) != COLLINEAR:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 == LEFT and d2 == RIGHT) or (d1 == RIGHT and d2 == LEFT)) and (
        (d3 == LEFT and d4 == RIGHT) or (d3 == RIGHT and d4 == LEFT)
    ):
        return True
    if d1 == COLLINEAR and _point_on_segment(p1, q1, q2):
        return True
    if d2 == COLLINEAR and _point_on_segment(p2, q1, q2):
        return True
    if d3 == COLLINEAR and _point_on_segment(q1, p1, p2):
        return True
    if d4 == COLLINEAR and _point_on_segment(q2, p1, p2):
        return True
    return False


def _edges(chain: ConvexChain):
    verts = chain.vertices
    k = len(verts)
    if k == 1:
        yield verts[0], verts[0]
    elif k == 2:
        yield verts[0], verts[1]
    else:
        for i in range(k):
            yield verts[i], verts[(i + 1) % k]


def hulls_disjoint(a: ConvexChain, b: ConvexChain) -> bool:
    """True when the two hulls share no point (touching counts as overlap)."""
    for p1, p2 in _edges(a):
        for q1, q2 in _edges(b):
            if _segments_intersect(p1, p2, q1, q2):
                return False
    if _point_in_chain(a.vertices[0], b) or _point_in_chain(b.vertices[0], a):
        return False
    return True


def _point_segment_dist(p, a, b) -> float:
    ax, ay, bx, by = a[0], a[1], b[0], b[1]
    px, py = p[0], p[1]
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _min_hull_distance(a: ConvexChain, b: ConvexChain) -> float:
    best = math.inf
    for p in a.vertices:
        for q1, q2 in _edges(b):
            best = min(best, _point_segment_dist(p, q1, q2))
    for p in b.vertices:
        for q1, q2 in _edges(a):
            best = min(best, _point_segment_dist(p, q1, q2))
    return best


def _unilateral_side(va, vb, chain: ConvexChain):
    """+1 all vertices left-or-on, -1 all right-or-on, 0 all on, None mixed."""
    has_left = has_right = False
    for p in chain.vertices:
        o = orient(va, vb, p)
        if o == LEFT:
            has_left = True
        elif o == RIGHT:
            has_right = True
        if has_left and has_right:
            return None
    if has_left:
        return 1
    if has_right:
        return -1
    return 0


def _angle_between(u, v) -> float:
    nu = math.hypot(*u)
    nv = math.hypot(*v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    c = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
    c = min(1.0, max(-1.0, c))
    return math.acos(c)


def _line_intersection(a1, a2, b1, b2):
    d1 = (a2[0] - a1[0], a2[1] - a1[1])
    d2 = (b2[0] - b1[0], b2[1] - b1[1])
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if den == 0.0:
        return None
    t = ((b1[0] - a1[0]) * d2[1] - (b1[1] - a1[1]) * d2[0]) / den
    return (a1[0] + t * d1[0], a1[1] + t * d1[1])


def tangent_diagnostics(a: ConvexChain, b: ConvexChain) -> TangentDiagnostics:
    """Common tangents, separation angle, and distance of two disjoint hulls.

    Brute force over vertex pairs; intended for diagnostics and audits at
    desk scale, not for the solver's hot path.
    """
    if not hulls_disjoint(a, b):
        raise HullsNotDisjoint("tangent diagnostics need disjoint hulls")
    inner = {}
    outer = {}
    for va in a.vertices:
        for vb in b.vertices:
            sa = _unilateral_side(va, vb, a)
            if sa is None:
                continue
            sb = _unilateral_side(va, vb, b)
            if sb is None:
                continue
            key = (
                frozenset(i for i, p in enumerate(a.vertices)
                          if orient(va, vb, p) == COLLINEAR),
                frozenset(i for i, p in enumerate(b.vertices)
                          if orient(va, vb, p) == COLLINEAR),
            )
            if sa * sb <= 0:
                inner.setdefault(key, (va, vb))
            if sa * sb >= 0:
                outer.setdefault(key, (va, vb))
    inner_t = tuple(inner.values())
    outer_t = tuple(outer.values())
    dist = _min_hull_distance(a, b)

    if len(inner_t) < 2:
        beta = math.pi
    else:
        (a1, b1), (a2, b2) = inner_t[0], inner_t[1]
        c = _line_intersection(a1, b1, a2, b2)
        if c is None:
            beta = math.pi
        else:
            u1 = (a1[0] - c[0], a1[1] - c[1])
            u2 = (a2[0] - c[0], a2[1] - c[1])
            if math.hypot(*u1) < 1e-12 or math.hypot(*u2) < 1e-12:
                u1 = (c[0] - b1[0], c[1] - b1[1])
                u2 = (c[0] - b2[0], c[1] - b2[1])
            beta = math.pi - _angle_between(u1, u2)

    if len(outer_t) < 2:
        alpha = 0.0
    else:
        (a1, b1), (a2, b2) = outer_t[0], outer_t[1]
        d1 = (b1[0] - a1[0], b1[1] - a1[1])
        d2 = (b2[0] - a2[0], b2[1] - a2[1])
        cr = d1[0] * d2[1] - d1[1] * d2[0]
        scale = math.hypot(*d1) * math.hypot(*d2)
        if scale == 0.0 or abs(cr) <= 1e-12 * scale:
            alpha = 0.0
        else:
            c34 = _line_intersection(a1, b1, a2, b2)
            mx = (float(np.mean(a.vx)) + float(np.mean(b.vx))) / 2.0
            my = (float(np.mean(a.vy)) + float(np.mean(b.vy))) / 2.0
            w = (mx - c34[0], my - c34[1])
            if d1[0] * w[0] + d1[1] * w[1] < 0:
                d1 = (-d1[0], -d1[1])
            if d2[0] * w[0] + d2[1] * w[1] < 0:
                d2 = (-d2[0], -d2[1])
            alpha = _angle_between(d1, d2)

    return TangentDiagnostics(inner_t, outer_t, beta, alpha, dist)
