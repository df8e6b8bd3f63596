"""Candidate 5-gons: boundary grids on squares and halfplane pairs.

For a square sigma the grid Q_sigma holds `count` points spread
equidistantly around its boundary, starting at the lower-left corner and
walking counterclockwise. Every unordered pair of grid points defines a
line, and both closed halfplanes of that line become candidates
(sigma, h); the subset of interest is P(sigma cap h). The paper-exact
profile uses 18001 grid points per square (= 4*c_star/c_sep + 1), which
makes neighbor spacing smaller than c_sep/c_star times the square size;
the practical profile uses a small grid plus refinement, certified
against the oracles at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .quadtree import Square

__all__ = [
    "C_SEP",
    "C_STAR",
    "C1",
    "C2",
    "PAPER_GRID_COUNT",
    "Halfplane",
    "Candidate",
    "SolverConfig",
    "boundary_grid",
    "halfplanes_for",
    "orientation_classes",
]

C_SEP = 1.0 / 250.0
C_STAR = 18.0
C1 = 0.25
C2 = 4.0
PAPER_GRID_COUNT = int(4 * C_STAR / C_SEP) + 1  # 18001


@dataclass(frozen=True)
class Halfplane:
    """A closed halfplane given by an anchor, a unit boundary direction,
    and which side is kept.

    Membership: side * cross(direction, p - anchor) >= 0, so points
    exactly on the boundary belong to both halfplanes of a line.
    """

    anchor: tuple
    direction: tuple
    side: int

    def contains(self, x: float, y: float) -> bool:
        dx, dy = self.direction
        c = dx * (y - self.anchor[1]) - dy * (x - self.anchor[0])
        return self.side * c >= 0.0

    @property
    def orientation(self) -> float:
        """Boundary-line angle in [0, pi)."""
        dx, dy = self.direction
        if dx < 0 or (dx == 0 and dy < 0):
            dx, dy = -dx, -dy
        a = math.atan2(dy, dx)
        if a < 0:
            a += math.pi
        if a >= math.pi:
            a -= math.pi
        return a


@dataclass(frozen=True)
class Candidate:
    square: Square
    halfplane: Halfplane


@dataclass
class SolverConfig:
    """Knobs of the exact solver's candidate stage.

    profile "paper" pins grid_count to 18001; "practical" keeps the given
    grid_count and relies on refinement (grid doublings confirmed by a
    probe) for desk-scale exactness. backend picks how candidates are
    evaluated; "auto" chooses direct filtering unless the range-tree
    estimate is cheaper.
    """

    profile: str = "practical"
    grid_count: int = 64
    backend: str = "auto"  # direct | rangetree | auto
    refinement: int = 2
    threads: int = 1
    c_sep: float = C_SEP
    c_star: float = C_STAR
    c1: float = C1
    c2: float = C2

    def __post_init__(self):
        if self.profile not in ("paper", "practical"):
            raise ConfigError(f"unknown profile {self.profile!r}")
        if self.profile == "paper":
            self.grid_count = PAPER_GRID_COUNT
        if self.grid_count < 5:
            raise ConfigError("grid_count must be at least 5")
        if self.backend not in ("direct", "rangetree", "auto"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.refinement < 0:
            raise ConfigError("refinement must be nonnegative")
        for name in ("c_sep", "c_star", "c1", "c2"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")

    def as_dict(self) -> dict:
        return {
            "profile": self.profile,
            "grid_count": self.grid_count,
            "backend": self.backend,
            "refinement": self.refinement,
            "threads": self.threads,
        }


def boundary_grid(sq: Square, count: int) -> list:
    """`count` points equally spaced around the square boundary.

    Walks counterclockwise from the lower-left corner; neighbor spacing
    is 4*size/count.
    """
    if count < 4:
        raise ConfigError("boundary grid needs at least 4 points")
    s = sq.size
    x0, y0 = sq.x0, sq.y0
    step = 4.0 * s / count
    pts = []
    for k in range(count):
        t = k * step
        if t < s:
            pts.append((x0 + t, y0))
        elif t < 2 * s:
            pts.append((x0 + s, y0 + (t - s)))
        elif t < 3 * s:
            pts.append((x0 + s - (t - 2 * s), y0 + s))
        else:
            pts.append((x0, y0 + s - (t - 3 * s)))
    return pts


def halfplanes_for(sq: Square, cfg: SolverConfig):
    """Stream both halfplanes of every grid-point pair, in a fixed order.

    Pairs at identical positions are skipped. All grid points sit on the
    square boundary, so every remaining boundary line meets the square
    and no candidate is vacuous. Duplicate point subsets are not
    deduplicated here; the evaluation cache takes care of that.
    """
    pts = boundary_grid(sq, cfg.grid_count)
    m = len(pts)
    for i in range(m):
        ax, ay = pts[i]
        for j in range(i + 1, m):
            bx, by = pts[j]
            dx, dy = bx - ax, by - ay
            norm = math.hypot(dx, dy)
            if norm == 0.0:
                continue
            direction = (dx / norm, dy / norm)
            yield Candidate(sq, Halfplane((ax, ay), direction, +1))
            yield Candidate(sq, Halfplane((ax, ay), direction, -1))


def orientation_classes(cfg: SolverConfig) -> list:
    """Distinct boundary-line orientations the grid can generate.

    Square-independent by similarity: computed on the unit square and
    snapped to 1e-12 radians.
    """
    pts = boundary_grid(Square((0.5, 0.5), 1.0), cfg.grid_count)
    seen = set()
    for i in range(len(pts)):
        ax, ay = pts[i]
        for j in range(i + 1, len(pts)):
            dx, dy = pts[j][0] - ax, pts[j][1] - ay
            if dx == 0.0 and dy == 0.0:
                continue
            if dx < 0 or (dx == 0 and dy < 0):
                dx, dy = -dx, -dy
            a = math.atan2(dy, dx)
            if a < 0:
                a += math.pi
            if a >= math.pi:
                a -= math.pi
            seen.add(round(a / 1e-12) * 1e-12)
    return sorted(seen)
