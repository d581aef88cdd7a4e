"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class so
that library users can catch precisely what they care about instead of
pattern-matching message strings.
"""

from __future__ import annotations


class OdescoutError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(OdescoutError, ValueError):
    """A state or parameter vector has the wrong length for the system."""


class SingularInputError(OdescoutError, ValueError):
    """A right-hand side was evaluated at a state where it is undefined."""


class ConfigError(OdescoutError, ValueError):
    """A configuration value violates its documented constraints."""


class DegenerateAxisError(ConfigError):
    """A grid axis has zero or negative extent."""


class SingularMatrixError(OdescoutError, RuntimeError):
    """A linear stage system could not be solved."""


class NoCycleError(OdescoutError, RuntimeError):
    """No limit cycle was detected within the time budget."""


class DomainViolationError(OdescoutError, RuntimeError):
    """A trajectory left the domain on which the model is meaningful."""


class HyperbolicDomainError(OdescoutError, RuntimeError):
    """Too many sampled parameter points failed to produce a limit cycle."""


class ExtrapolationError(OdescoutError, ValueError):
    """An interpolation query fell outside the hull of the available data."""
