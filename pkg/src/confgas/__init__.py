"""Edge statistics of planar Coulomb gases with a scale of boundary confinements."""

from . import ginibre, orthopoly, potential, profiles, sampler, specfun, ward
from .errors import (
    BracketError,
    ConfgasError,
    ConfigError,
    ConvergenceError,
    DomainError,
    ToleranceError,
)

__all__ = [
    "specfun",
    "profiles",
    "potential",
    "ginibre",
    "orthopoly",
    "ward",
    "sampler",
    "ConfgasError",
    "DomainError",
    "ToleranceError",
    "ConvergenceError",
    "BracketError",
    "ConfigError",
]
