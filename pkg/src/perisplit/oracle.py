"""Ground-truth solvers and property checkers.

oracle_line_partitions enumerates every bipartition induced by a line:
for each point pair it classifies sides, then realizes all assignments
of collinear points reachable by an infinitesimal rotation about a pivot
on the line. Recomputing hulls from scratch per candidate makes this the
O(n^3 log n)-class reference the fast solver is certified against.

oracle_exhaustive tries all 2^(n-1) - 1 bipartitions outright; agreement
between the two validates restricting the search to line partitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convexops import tangent_diagnostics
from .errors import OracleTooLarge, TooFewPoints
from .geometry import Partition, PointSet, better, convex_hull, hull_perimeter_xy

__all__ = [
    "oracle_line_partitions",
    "oracle_exhaustive",
    "check_separation_theorem",
    "SeparationReport",
    "f_sep",
]

LINE_ORACLE_GUARD = 512
EXHAUSTIVE_GUARD = 14


def _sorted_order(points: PointSet):
    xy = points.xy
    return np.lexsort((xy[:, 1], xy[:, 0]))


def _cost_of_mask(sorted_xy: np.ndarray, order, mask: np.ndarray):
    """(cost, per_in, per_out) for a boolean membership mask over points."""
    sel = mask[order]
    per_a = hull_perimeter_xy(sorted_xy[sel], presorted=True)
    per_b = hull_perimeter_xy(sorted_xy[~sel], presorted=True)
    return per_a + per_b, per_a, per_b


def oracle_line_partitions(points: PointSet) -> Partition:
    """Best partition over all line-induced bipartitions.

    For each point pair the line through them is perturbed both ways;
    collinear points split at every pivot position along the line, which
    realizes all distinct line partitions including axis-parallel splits.
    """
    n = len(points)
    if n < 2:
        raise TooFewPoints("need at least two points")
    if n > LINE_ORACLE_GUARD:
        raise OracleTooLarge(f"line oracle guard is n <= {LINE_ORACLE_GUARD}")
    xy = points.xy
    ids = points.ids
    order = _sorted_order(points)
    sorted_xy = xy[order]
    seen = set()
    masks = []

    def push(mask: np.ndarray):
        if not mask.any() or mask.all():
            return
        if not mask[0]:
            mask = ~mask
        key = np.packbits(mask).tobytes()
        if key not in seen:
            seen.add(key)
            masks.append(mask)

    for i in range(n):
        di = xy - xy[i]
        for j in range(i + 1, n):
            d = xy[j] - xy[i]
            cr = d[0] * di[:, 1] - d[1] * di[:, 0]
            left = cr > 0
            on_idx = np.flatnonzero(cr == 0)
            t = di[on_idx] @ d
            on_sorted = on_idx[np.argsort(t, kind="mergesort")]
            for k in range(len(on_sorted) + 1):
                m1 = left.copy()
                m1[on_sorted[:k]] = True
                push(m1)
                m2 = left.copy()
                m2[on_sorted[k:]] = True
                push(m2)

    best = None
    for mask in masks:
        cost, per_a, per_b = _cost_of_mask(sorted_xy, order, mask)
        part = Partition(
            frozenset(ids[mask].tolist()),
            frozenset(ids[~mask].tolist()),
            cost,
            per_a,
            per_b,
            "oracle",
        )
        best = better(best, part)
    return best.canonical()


def oracle_exhaustive(points: PointSet) -> Partition:
    """Best partition over every bipartition; guard n <= 14."""
    n = len(points)
    if n < 2:
        raise TooFewPoints("need at least two points")
    if n > EXHAUSTIVE_GUARD:
        raise OracleTooLarge(f"exhaustive oracle guard is n <= {EXHAUSTIVE_GUARD}")
    ids = points.ids
    order = _sorted_order(points)
    sorted_xy = points.xy[order]
    best = None
    for bits in range(1, 1 << (n - 1)):
        mask = np.zeros(n, dtype=bool)
        mask[0] = True
        for k in range(n - 1):
            if bits & (1 << k):
                mask[k + 1] = True
        if mask.all():
            continue
        cost, per_a, per_b = _cost_of_mask(sorted_xy, order, mask)
        part = Partition(
            frozenset(ids[mask].tolist()),
            frozenset(ids[~mask].tolist()),
            cost,
            per_a,
            per_b,
            "oracle",
        )
        best = better(best, part)
    return best.canonical()


@dataclass(frozen=True)
class SeparationReport:
    angle: float
    distance: float
    per_min: float
    satisfied: bool


def check_separation_theorem(points: PointSet, partition: Partition) -> SeparationReport:
    """Audit the separation property of a (purportedly optimal) partition.

    satisfied when the separation angle reaches pi/6 or the separation
    distance reaches min(per)/250, each with a 1e-9 slack.
    """
    left = convex_hull(points.subset(partition.left_ids))
    right = convex_hull(points.subset(partition.right_ids))
    diag = tangent_diagnostics(left, right)
    per_min = min(partition.per_left, partition.per_right)
    ok = (diag.separation_angle >= math.pi / 6 - 1e-9) or (
        diag.separation_distance >= per_min / 250.0 - 1e-9 * per_min
    )
    return SeparationReport(diag.separation_angle, diag.separation_distance, per_min, ok)


def f_sep(phi: float) -> float:
    """The increasing angle-to-distance factor on [0, pi].

    f(phi) = sin(phi/4)/(1+sin(phi/4)) * sin(phi/2)/(1+sin(phi/2))
             * (1-cos(phi/4))/2
    """
    if not 0.0 <= phi <= math.pi:
        raise ValueError("argument must lie in [0, pi]")
    s4 = math.sin(phi / 4.0)
    s2 = math.sin(phi / 2.0)
    return (s4 / (1.0 + s4)) * (s2 / (1.0 + s2)) * ((1.0 - math.cos(phi / 4.0)) / 2.0)
