"""Exception hierarchy shared by all modules."""


class ShrinkerSpectraError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(ShrinkerSpectraError, ValueError):
    """Invalid model, grid or solver parameter."""


class DomainError(ShrinkerSpectraError, ValueError):
    """A point lies outside the coordinate chart of a model."""


class TabulationMiss(ShrinkerSpectraError, KeyError):
    """A tabulated potential was evaluated off its grid."""


class RefusalError(ShrinkerSpectraError):
    """Assembly refused: truncating a noncompact direction is unsafe."""


class CapabilityError(ShrinkerSpectraError):
    """Operation not supported on this geometry."""


class ResourceError(ShrinkerSpectraError):
    """A configured size cap was exceeded."""


class ConstraintError(ShrinkerSpectraError, ValueError):
    """Input violates a normalization or sign constraint."""


class IndefiniteWeightError(ShrinkerSpectraError, ValueError):
    """Mass weights must be strictly positive."""


class ConvergenceError(ShrinkerSpectraError):
    """Iterative eigensolver did not reach tolerance.

    The best iterate is kept on ``best`` (a :class:`SpectralResult`).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ExpressionError(ShrinkerSpectraError, ValueError):
    """Malformed potential expression."""
