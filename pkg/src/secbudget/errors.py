"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: I/O failures -> 1, ValidationError -> 2,
SolverError -> 3, SizingError -> 4.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Invalid scenario data or operation input; the message names the offending field."""


class SolverError(RuntimeError):
    """Solver failed to certify a solution; carries the best incumbent found."""

    def __init__(self, message: str, incumbent=None, gap: float | None = None):
        super().__init__(message)
        self.incumbent = incumbent
        self.gap = gap


class SizingError(RuntimeError):
    """Instance exceeds a hard size cap; rejected rather than degraded silently."""
