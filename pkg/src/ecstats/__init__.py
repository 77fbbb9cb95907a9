"""Elliptic curves with level structure: finite-field censuses, cusps, fibers, families
over Q with prescribed torsion, trace-formula checks and explicit-formula sums."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .errors import (BadInputError, CoprimalityError, EcstatsError, InvariantViolation,
                     MissingCacheError, ResourceLimitError, UnsupportedLevelError)
from .levels import LevelSpec, full_gamma, gamma1, parse_level

__all__ = [
    "__version__", "LevelSpec", "gamma1", "full_gamma", "parse_level", "EcstatsError",
    "InvariantViolation", "ResourceLimitError", "BadInputError", "CoprimalityError",
    "UnsupportedLevelError", "MissingCacheError",
]
