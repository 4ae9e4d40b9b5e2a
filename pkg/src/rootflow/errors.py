"""Exception types raised across rootflow."""


class RootflowError(Exception):
    """Base class for all rootflow errors."""


class DomainError(RootflowError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateMeasureError(DomainError):
    """A measure cannot produce the requested sample (e.g. a point mass at 0)."""


class NumericalFailure(RootflowError, ArithmeticError):
    """An iterative solver failed to converge or produced invalid output.

    Attributes
    ----------
    interval : tuple of float or None
        The bracket being solved when the failure happened, if any.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ConfigError(RootflowError, ValueError):
    """An experiment configuration is malformed or violates a precondition."""
