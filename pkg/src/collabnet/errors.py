"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, DataError 2,
NumericError 3.
"""


class CollabnetError(Exception):
    """Base class for all package-specific errors."""


class DataError(CollabnetError):
    """Malformed, missing, or inconsistent input data."""


class NumericError(CollabnetError):
    """A numeric procedure failed (non-convergence, degenerate system)."""


class ConvergenceError(NumericError):
    """Iterative solver did not reach tolerance; carries the last residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
