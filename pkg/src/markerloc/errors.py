"""Exception types shared across the toolkit."""


class MarkerLocError(Exception):
    """Base class for all toolkit errors."""


class InvalidRotationError(MarkerLocError):
    """A matrix handed in as a rotation is not orthonormal with det +1."""


class DegenerateGeometryError(MarkerLocError):
    """A pose cannot be recovered because the geometry is singular."""


class NotInitializedError(MarkerLocError):
    """A filter was stepped before it received its first measurement."""


class NumericalFailureError(MarkerLocError):
    """A linear solve or factorization failed (singular innovation covariance)."""


class InfeasibleTrackError(MarkerLocError):
    """A reference track violates the platform's kinematic envelope."""


class AmbiguousTargetError(MarkerLocError):
    """A scan window contains more than one well-separated point cluster."""


class InsufficientDataError(MarkerLocError):
    """Too few samples to fit a reference trajectory."""


class ConfigError(MarkerLocError):
    """An experiment config is missing, malformed, or references missing files."""


class LogParseError(ConfigError):
    """A sensor log row could not be parsed.  Carries the 1-based row number."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row
