"""Exception hierarchy shared by all firreg modules."""


class FirRegError(Exception):
    """Base class for every error raised by firreg."""


class ParameterError(FirRegError, ValueError):
    """A hyperparameter or argument lies outside its valid domain."""


class SingularityError(FirRegError, ArithmeticError):
    """A matrix that must be invertible is (numerically) singular."""


class FactorizationError(SingularityError):
    """Triangular factorisation failed on a non-positive pivot.

    ``pivot`` is the 0-based index of the failing pivot in the original
    (un-reversed) ordering of the matrix.
    """

    def __init__(self, message, pivot):
        super().__init__(message)
        self.pivot = pivot


class DesignError(FirRegError):
    """A filter/system design produced an unusable (e.g. unstable) result."""


class TuningError(FirRegError):
    """Every hyperparameter candidate failed to evaluate."""
