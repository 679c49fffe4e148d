"""Exception types shared across the package."""

from __future__ import annotations


class ExactAlgebraError(Exception):
    """Base class for all domain errors raised by this package."""


class OrderMismatchError(ExactAlgebraError):
    """Binary operation on series with different truncation orders."""


class NotAUnitError(ExactAlgebraError):
    """Inversion of a series whose constant term vanishes."""


class CompositionError(ExactAlgebraError):
    """Composition f(lam) with lam(0) != 0."""


class NotInvertibleError(ExactAlgebraError):
    """Map or matrix with non-invertible leading data."""


class T1DegreeError(ExactAlgebraError):
    """Operation would exceed degree 1 in the first coordinate."""


class ShapeError(ExactAlgebraError):
    """Input data is not of the required shape."""


class FlatnessError(ExactAlgebraError):
    """Structure equations are violated (non-flat input)."""


class NoFormalSolutionError(ExactAlgebraError):
    """Linear recursion hits an inconsistent singular step."""


class UnsupportedShapeError(ExactAlgebraError):
    """Right-hand side outside the solvable catalogue."""


class NoExtensionError(ExactAlgebraError):
    """No compatible pole-part extension exists."""


class UnfoldingError(ExactAlgebraError):
    """Span condition fails at the base point."""


class ExactFieldError(ExactAlgebraError):
    """A required root does not exist in the Gaussian rationals."""


class ReductionFailedError(ExactAlgebraError):
    """Pole reduction obstructed at a reported order."""

    def __init__(self, message: str, order: int | None = None):
        super().__init__(message)
        self.order = order


class NormalizationRequiredError(ExactAlgebraError):
    """Family matrix not in one of the supported normal shapes."""


class DocumentError(ExactAlgebraError):
    """Malformed structure document."""
