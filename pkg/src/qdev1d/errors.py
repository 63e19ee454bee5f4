"""Exception and warning types shared across the package."""


class QdevError(Exception):
    """Base class for all qdev1d errors."""


class SingularSystem(QdevError):
    """Linear solve hit a (numerically) zero pivot or produced non-finite values."""


class DegenerateDenominator(QdevError):
    """A boundary-closure denominator vanished; the requested row is undefined."""


class PreconditionViolated(QdevError):
    """Input violates a documented precondition (e.g. energy below the contact band)."""


class MaxIterationsExceeded(QdevError):
    """Newton iteration failed to reach tolerance within the iteration cap."""


class OuterMaxIterations(QdevError):
    """Outer charge-potential fixed-point loop failed to converge within its cap."""


class UnknownPreset(QdevError):
    """Requested device preset name is not registered."""


class ParseError(QdevError):
    """Run configuration file could not be parsed.

    Carries ``line``/``column`` when the underlying TOML parser provides them.
    """

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(QdevError):
    """Run configuration parsed but contains an invalid or inconsistent field."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DepthExceeded(UserWarning):
    """Adaptive quadrature hit its recursion-depth cap on some panel.

    Issued via :mod:`warnings`; the integrator still returns its best estimate.
    """
