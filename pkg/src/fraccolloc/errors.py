"""Exception hierarchy shared by all modules."""


class FracCollocError(Exception):
    """Base class for errors raised by this package."""


class PoleError(FracCollocError, ValueError):
    """Gamma function evaluated at zero or a negative integer."""


class DomainError(FracCollocError, ValueError):
    """An argument lies outside the admissible range of an operation."""


class DuplicateNodeError(FracCollocError, ValueError):
    """Interpolation nodes are not pairwise distinct."""


class AnchorMismatchError(FracCollocError, ValueError):
    """Power-basis coefficients do not match the requested side or grid."""


class SingularSystemError(FracCollocError, ArithmeticError):
    """A linear system could not be solved."""

    def __init__(self, message: str, condition: float | None = None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class ConvergenceError(FracCollocError, ArithmeticError):
    """An iteration did not reach its tolerance within the iteration cap."""

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (final residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual
