from typing import Any, Optional


class OnesidedError(Exception):
    """Base class for every error raised by the services."""


class ConfigError(OnesidedError, ValueError):
    """Structural problem with a config document or an argument out of range."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}" if field else message)


class ConjugacyError(OnesidedError, ArithmeticError):
    """Imaginary residue of a power sum exceeded the tolerance."""

    def __init__(self, k: int, residue: float, tolerance: float):
        self.k = k
        self.residue = residue
        self.tolerance = tolerance
        super().__init__(
            f"Imaginary residue {residue:.3e} at k={k} exceeds {tolerance:.3e}; "
            "the config is not conjugate-closed."
        )


class ClosedFormError(OnesidedError, ArithmeticError):
    """Closed-form partial sum disagrees with direct summation."""


class HypothesisError(OnesidedError, ValueError):
    """A theorem hypothesis required by the operation does not hold."""


class PrecisionError(OnesidedError, ValueError):
    """Requested accuracy cannot be reached at the given precision or resolution."""


class QuadratureError(OnesidedError, ArithmeticError):
    def __init__(self, message: str, value: float, error_estimate: float):
        self.value = value
        self.error_estimate = error_estimate
        super().__init__(f"{message} (value={value!r}, error estimate={error_estimate:.3e})")


class BudgetExhausted(OnesidedError):
    """Search effort ran out; `best` holds the closest report found."""

    def __init__(self, message: str, best: Any = None):
        self.best = best
        super().__init__(message)
