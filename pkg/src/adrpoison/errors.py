"""Exception hierarchy shared across the package."""


class ADRError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(ADRError, ValueError):
    """A numeric parameter violates its precondition."""


class InvalidInputError(ADRError, ValueError):
    """Input data is empty, malformed or inconsistent."""


class SingularConfigurationError(ADRError, ArithmeticError):
    """A closed-form expression has a vanishing denominator."""


class SizeLimitError(ADRError, ValueError):
    """The requested computation exceeds a hard size guard."""


class ConfigError(ADRError, ValueError):
    """A scenario configuration cannot be satisfied."""


class HistoryParseError(InvalidInputError):
    """A history file row could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ReferentialError(InvalidInputError):
    """A record references an unknown customer."""


class OrderingError(InvalidInputError):
    """Event indices are not strictly increasing."""
