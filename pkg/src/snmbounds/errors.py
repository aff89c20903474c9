"""Exception types shared across the package."""


class SnmBoundsError(Exception):
    """Base class for all package errors."""


class NotPositiveDefiniteError(SnmBoundsError):
    """A matrix required to be (strictly) positive definite is not."""


class DimensionMismatchError(SnmBoundsError):
    """Operands have incompatible shapes."""


class ParamOutOfRangeError(SnmBoundsError):
    """A scalar parameter lies outside its admissible range."""


class SchemaMismatchError(SnmBoundsError):
    """Tabular results with different schemas cannot be combined."""
