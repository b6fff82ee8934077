"""Exception types raised across the package."""


class TwoParamError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMatrix(TwoParamError):
    """Input is not a finite, square, (symmetrizable) real matrix."""


class InvalidVector(TwoParamError):
    """Vector input is zero, non-finite, or has the wrong shape."""


class NotPositiveDefinite(TwoParamError):
    """A matrix required to be positive definite is not (definiteness
    assumptions violated at the current iterate)."""


class IndexOutOfRange(TwoParamError):
    """Requested eigenvalue index lies outside 1..order."""


class NotRightDefinite(TwoParamError):
    """Neither the coupling operator nor its negation is definite, so the
    problem cannot be normalized."""


class DegenerateForm(TwoParamError):
    """A quadratic form that must be nonzero vanished."""


class InvalidMetric(TwoParamError):
    """Separable metric samples are not strictly positive."""


class TooLarge(TwoParamError):
    """Dense operator assembly would exceed the configured memory cap."""


class NotEnoughData(TwoParamError):
    """Too few qualifying trace points for a convergence fit."""
