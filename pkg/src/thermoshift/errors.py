"""Exception types shared across the package."""


class ThermoshiftError(Exception):
    """Base class for all package-specific errors."""


class InadmissibleWordError(ThermoshiftError, ValueError):
    """A word, splice, or cylinder violates the transition matrix."""


class NonPrimitiveError(ThermoshiftError, RuntimeError):
    """The operation needs a primitive (topologically mixing) transition matrix."""


class PotentialTableError(ThermoshiftError, ValueError):
    """A potential table is missing entries, has extra entries, or has bad values."""


class WordLengthError(ThermoshiftError, ValueError):
    """A word is too short for the requested Birkhoff sum."""

    def __init__(self, message: str, required: int):
        super().__init__(message)
        self.required = required


class ConvergenceError(ThermoshiftError, RuntimeError):
    """An iterative solver did not reach the requested residual."""

    def __init__(self, message: str, residual: float | None = None,
                 iterations: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ExactArithmeticError(ThermoshiftError, RuntimeError):
    """Exact rational arithmetic was requested but is unavailable for this input."""


class ConfigError(ThermoshiftError, ValueError):
    """An experiment configuration failed to parse or validate."""
