"""Exception types shared across the package."""

from __future__ import annotations


class RieoptError(Exception):
    """Base class for errors raised by this package."""


class NumericError(RieoptError):
    """A computation produced non-finite values or a factorization failed."""


class DomainError(RieoptError):
    """Inputs are outside the domain of a geometric operation."""


class InvalidPointError(DomainError):
    """An array does not satisfy the manifold's point constraint."""


class InvalidTangentError(DomainError):
    """An array is not tangent at the given base point."""


class NotPositiveDefiniteError(DomainError):
    """A matrix expected to be SPD has a non-positive eigenvalue."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class CalibrationError(RieoptError):
    """Noise calibration could not satisfy the privacy budget."""
