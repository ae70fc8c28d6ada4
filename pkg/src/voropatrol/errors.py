class PatrolError(Exception):
    """Base class for all package errors."""


class ValidationError(PatrolError, ValueError):
    """Input data violates a model invariant."""


class GraphFormatError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapExceededError(PatrolError):
    """Instance is larger than an exact solver accepts."""
