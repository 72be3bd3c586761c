"""Exception hierarchy shared by the numerical modules and the CLI."""


class TasepError(Exception):
    """Base class for all package errors."""


class ConfigError(TasepError, ValueError):
    """Invalid model, configuration or schema."""


class DomainError(TasepError, ValueError):
    """Argument outside the domain where a function is defined."""


class AssumptionError(TasepError):
    """A model fails a structural assumption required by an operation."""


class ConvergenceError(TasepError, ArithmeticError):
    """A numerical procedure did not reach its tolerance.

    ``estimates`` holds the last values produced before giving up.
    """

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class NegativeProbabilityError(TasepError, ArithmeticError):
    """A computed probability fell below zero beyond the roundoff tolerance."""


class SizeCapError(TasepError, ValueError):
    """The requested problem exceeds the supported enumeration size."""
