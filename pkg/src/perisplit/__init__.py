"""Minimum perimeter-sum bipartition of planar point sets.

Split a point set P into two nonempty parts P1, P2 minimizing
per(ch(P1)) + per(ch(P2)). The package ships an exact solver built from
a seven-orientation sweep, a best-singleton-removal branch, and a
quadtree-driven candidate search; a (1+eps)-approximation via a grid
coreset; brute-force oracles that certify optimality at small n; and a
scikit-learn style estimator plus a CLI.
"""

from .errors import (
    ConfigError,
    EmptySet,
    HullsNotDisjoint,
    InvalidSliceOrder,
    NotSorted,
    OracleTooLarge,
    PerisplitError,
    TooFewPoints,
    WrongIndex,
)
from .geometry import (
    ConvexChain,
    Orientation,
    Partition,
    Point,
    PointSet,
    convex_hull,
    diameter,
    orient,
    perimeter,
    rotate,
)
from .convexops import (
    Slice,
    TangentDiagnostics,
    bridge,
    hull_of_hulls_perimeter,
    tangent_diagnostics,
    upper_envelope,
)
from .candidates import SolverConfig
from .exact import solve_exact
from .approx import solve_approx
from .oracle import (
    check_separation_theorem,
    f_sep,
    oracle_exhaustive,
    oracle_line_partitions,
)
from .estimator import MinPerimeterBipartition

__version__ = "0.1.0"

__all__ = [
    "Point",
    "PointSet",
    "ConvexChain",
    "Partition",
    "Orientation",
    "Slice",
    "TangentDiagnostics",
    "SolverConfig",
    "MinPerimeterBipartition",
    "orient",
    "convex_hull",
    "perimeter",
    "diameter",
    "rotate",
    "bridge",
    "upper_envelope",
    "hull_of_hulls_perimeter",
    "tangent_diagnostics",
    "solve_exact",
    "solve_approx",
    "oracle_line_partitions",
    "oracle_exhaustive",
    "check_separation_theorem",
    "f_sep",
    "PerisplitError",
    "EmptySet",
    "TooFewPoints",
    "InvalidSliceOrder",
    "HullsNotDisjoint",
    "WrongIndex",
    "NotSorted",
    "ConfigError",
    "OracleTooLarge",
]
