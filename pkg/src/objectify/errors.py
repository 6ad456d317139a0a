"""Exception types shared across the package."""


class ObjectifyError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ObjectifyError, ValueError):
    """Operand shapes do not fit together."""


class ValidationError(ObjectifyError, ValueError):
    """An object violates one of its defining invariants.

    ``violations`` holds ``(name, magnitude)`` pairs so callers can report
    every problem at once instead of the first one.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class PreconditionError(ObjectifyError):
    """Inputs are individually valid but the requested operation is not defined for them."""
