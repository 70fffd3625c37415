class CritLabError(Exception):
    """Base class for every error raised by critlab."""

    exit_code = 1


class ValidationError(CritLabError, ValueError):
    """Bad input: a precondition of an operation does not hold."""

    exit_code = 1


class NumericalError(CritLabError, ArithmeticError):
    """A numerical procedure failed or hit a singular configuration."""

    exit_code = 2


class ConfigError(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class InvalidRadii(ValidationError):
    pass


class InvalidPolynomial(ValidationError):
    pass


class SizeMismatch(ValidationError):
    pass


class EmptySet(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class ZeroEndCoefficient(ValidationError):
    pass


class AtomAtOrigin(ValidationError):
    pass


class DegreeTooLarge(ValidationError):
    pass


class InvalidAtomFile(ValidationError):
    pass


class TooLarge(ValidationError):
    """Exact transport would exceed the configured pair budget; use w1_sliced."""


class DidNotConverge(NumericalError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PoleHit(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class SingularityOnCircle(NumericalError):
    pass


class ZeroAtEvaluationPoint(NumericalError):
    pass
