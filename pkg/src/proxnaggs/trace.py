"""Per-iteration trace records shared by solvers, certificates and I/O."""

from dataclasses import astuple, dataclass, fields
from typing import Optional

TRACE_HEADER = ("k", "F_x", "F_v", "gap_x", "gap_v", "V", "X", "D", "R", "M",
                "lyap", "energy", "elapsed_s")


@dataclass(frozen=True)
class TraceRow:
    """Metrics of the state ``(x_k, v_k)``; ``None`` marks an unavailable column.

    ``R`` and ``M`` describe the step that produced the state, so they are
    empty on the initial row.
    """

    k: int
    F_x: Optional[float] = None
    F_v: Optional[float] = None
    gap_x: Optional[float] = None
    gap_v: Optional[float] = None
    V: Optional[float] = None
    X: Optional[float] = None
    D: Optional[float] = None
    R: Optional[float] = None
    M: Optional[float] = None
    lyap: Optional[float] = None
    energy: Optional[float] = None
    elapsed_s: Optional[float] = None

    def as_tuple(self):
        return astuple(self)


assert tuple(f.name for f in fields(TraceRow)) == TRACE_HEADER


def column(trace, name):
    """List of values of one column, in row order."""
    return [getattr(row, name) for row in trace]


def first_crossing(trace, tol, column_name="gap_x"):
    """First ``k`` whose ``column_name`` is at or below ``tol``; None if never."""
    for row in trace:
        val = getattr(row, column_name)
        if val is not None and val <= tol:
            return row.k
    return None
