"""Exception types raised across the package."""

from __future__ import annotations


class BetaForgeError(Exception):
    """Base class for every error raised by betaforge."""


class ValidationError(BetaForgeError, ValueError):
    """Input failed a structural invariant."""


class LengthMismatch(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class NonPositiveOffDiagonal(ValidationError):
    pass


class DuplicateAtoms(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    """The Jacobi matrix has a spectrum not contained in (0, inf)."""


class NotInUnitInterval(ValidationError):
    """A canonical moment fell outside (0, 1)."""


class NumericalBreakdown(BetaForgeError, ArithmeticError):
    pass


class SingularJacobian(BetaForgeError, ArithmeticError):
    pass


class ConvergenceFailure(BetaForgeError, ArithmeticError):
    pass


class NotLogConcave(BetaForgeError):
    """The log-concavity certificate of a conditional density failed."""


class UnsupportedPotential(BetaForgeError):
    pass


class NoSoftEdge(BetaForgeError):
    pass


class ConfigError(BetaForgeError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ParseError(BetaForgeError):
    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
