"""Exception hierarchy shared by all modules."""


class GconicError(Exception):
    """Base class for domain and precondition errors."""


class InvalidBody(GconicError, ValueError):
    pass


class InvalidMeasure(GconicError, ValueError):
    pass


class DegenerateMeasure(GconicError):
    """Computed mass is not positive."""


class UnsupportedMeasureKind(GconicError, TypeError):
    """Operation needs a product measure."""


class NotProbabilityMeasure(GconicError):
    pass


class RejectionStall(GconicError, RuntimeError):
    """Too many consecutive rejected proposals."""


class StartNotInBody(GconicError, ValueError):
    pass


class PreconditionError(GconicError, ValueError):
    pass


class SceneError(Exception):
    """Scene file could not be parsed or failed validation."""


class NonUniqueMinimizer(UserWarning):
    """The minimizer set is a non-degenerate rectangle."""
