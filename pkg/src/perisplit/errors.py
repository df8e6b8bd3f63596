"""Exception types shared across the package."""


class PerisplitError(Exception):
    """Base class for all package errors."""


class EmptySet(PerisplitError):
    """An operation that needs at least one point received none."""


class TooFewPoints(PerisplitError):
    """A bipartition needs at least two points."""


class InvalidSliceOrder(PerisplitError):
    """Bridge endpoints must be x-ordered slices with non-overlapping slabs."""


class HullsNotDisjoint(PerisplitError):
    """Tangent diagnostics require two disjoint convex hulls."""


class WrongIndex(PerisplitError):
    """Query halfplane orientation does not match the index orientation."""


class NotSorted(PerisplitError):
    """Prefix scans require input sorted by the sweep coordinate."""


class ConfigError(PerisplitError):
    """Invalid solver or grid configuration."""


class OracleTooLarge(PerisplitError):
    """Brute-force oracles refuse inputs beyond their size guard."""
