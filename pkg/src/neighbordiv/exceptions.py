"""Exception types raised by the package.

All inherit from :class:`NeighborDivError` so callers can catch the package's
failures with a single except clause. Input-format problems are separated from
mathematically degenerate situations because the command line maps them to
different exit codes.
"""

from __future__ import annotations


class NeighborDivError(Exception):
    """Base class for every error raised by this package."""


class GraphInputError(NeighborDivError, ValueError):
    """Malformed or inconsistent input files / arrays (bad tokens, shape
    mismatches, non-finite feature values, out-of-range node ids)."""


class DegenerateGraphError(NeighborDivError, ValueError):
    """The graph admits no defined answer: no valid nodes for calibration,
    no edges where an edge-based quantity is requested, and similar."""


class UndefinedMetricError(NeighborDivError, ValueError):
    """An evaluation metric is undefined for the given labels, e.g. ranking
    metrics with a single class present."""


class InfeasibleSpecError(NeighborDivError, ValueError):
    """A synthetic-benchmark specification cannot be realised, e.g. edge
    probabilities outside [0, 1] or more anomalies than eligible nodes."""
