"""Exception hierarchy shared by all modules."""


class QposcError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QposcError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class NumericError(QposcError, ArithmeticError):
    """A solver failed to converge or an integrator gave up.

    ``residual`` carries the best residual reached, when one is known.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class HorizonError(NumericError):
    """No event was found before the configured time cap."""


class InvariantBreach(QposcError, RuntimeError):
    """A guaranteed inequality failed during a computation.

    This points at thresholds that were sized too small for the forcing.
    """


class ConfigError(QposcError, ValueError):
    """Invalid run configuration."""
