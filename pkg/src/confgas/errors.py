"""Exception types shared across the package."""


class ConfgasError(Exception):
    """Base class for all package errors."""


class DomainError(ConfgasError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ToleranceError(ConfgasError, RuntimeError):
    """A numerical routine could not reach its requested tolerance."""


class ConvergenceError(ToleranceError):
    """An iterative expansion (series or continued fraction) failed to converge."""


class BracketError(ConfgasError, RuntimeError):
    """A root finder could not bracket a sign change."""


class ConfigError(ConfgasError, ValueError):
    """An experiment configuration failed validation."""
