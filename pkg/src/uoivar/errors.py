"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems exit 3, numerical failures exit 4.
"""


class UoivarError(Exception):
    """Base class for all package errors."""


class InvalidParamsError(UoivarError):
    """A type invariant or configuration constraint was violated."""


class InsufficientDataError(UoivarError):
    """The series is too short for the requested operation."""


class DataError(UoivarError):
    """Malformed input data (NaN cells, parse failures, shape mismatches)."""


class SingularDesignError(UoivarError):
    """The design matrix is rank deficient where full rank is required.

    Carries a condition-number estimate of the offending design.
    """

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class NumericalError(UoivarError):
    """A numerical routine failed (Cholesky breakdown, divergence, ...)."""
