"""Exception hierarchy.

Every error raised for bad input derives from ``ValueError`` so callers that
only care about "invalid argument" can catch that.
"""


class QMeterError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QMeterError, ValueError):
    """An operator, vector or scenario failed its construction-time checks."""


class DimensionError(ValidationError):
    """Operands have incompatible dimensions."""


class NullConditioningError(QMeterError, ValueError):
    """Conditioning on an event of (numerically) zero probability."""

    def __init__(self, message="conditioning on null event"):
        super().__init__(message)


class UndefinedWeakValueError(QMeterError, ValueError):
    """Weak values requested for orthogonal preparation and postselection."""


class DegenerateSpectrumError(ValidationError):
    def __init__(self, message="degenerate spectrum unsupported"):
        super().__init__(message)


class OffLatticeError(ValidationError):
    def __init__(self, message="off-lattice coupling"):
        super().__init__(message)
