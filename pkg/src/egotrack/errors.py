"""Exception types shared across the package."""


class EgoTrackError(Exception):
    """Base class for all package-specific errors."""


class FrameMismatchError(EgoTrackError):
    """A transform was applied to data expressed in a different frame."""


class DegenerateGeometryError(EgoTrackError):
    """Geometry input that has no well-defined answer (empty set, zero weights, ...)."""


class InvalidDepthError(EgoTrackError):
    """A depth value that violates the camera model (non-positive or behind near plane)."""


class NumericalError(EgoTrackError):
    """A numerically ill-posed linear-algebra step (singular or indefinite matrix)."""


class ConfigError(EgoTrackError):
    """Malformed or incomplete run configuration."""
