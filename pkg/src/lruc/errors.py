"""Exception hierarchy shared by all modules."""


class LrucError(Exception):
    """Base class for library errors."""


class ShapeError(LrucError, ValueError):
    """Operand dimensions do not match."""


class DomainError(LrucError, ValueError):
    """An argument lies outside the admissible range."""


class InvalidStateError(LrucError, ValueError):
    """A matrix or vector is not a valid quantum state."""


class NumericError(LrucError, ArithmeticError):
    """An iterative routine failed to converge."""


class ResourceError(LrucError, RuntimeError):
    """A computation would exceed its configured budget.

    ``estimate`` carries the required size when it is known and ``partial``
    any result collected before the budget ran out.
    """

    def __init__(self, message, estimate=None, partial=None):
        super().__init__(message)
        self.estimate = estimate
        self.partial = partial


class ConfigError(LrucError, ValueError):
    """An experiment configuration field is missing or invalid."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
