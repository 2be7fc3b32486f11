"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Inconsistent dimensions, flags, or argument combinations."""


class DegenerateInputError(ValueError):
    """Input data that cannot be encoded, e.g. an all-zero vector."""


class DegeneratePredictionError(RuntimeError):
    """A prediction branch carries no amplitude, so no token state exists."""


class NumericFailureError(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class CompatibilityError(RuntimeError):
    """Checkpoint, model, and dataset combinations that do not fit together."""


class UnsupportedVersionError(CompatibilityError):
    """Checkpoint schema version not handled by this build."""


class CheckpointFormatError(CompatibilityError):
    """Checkpoint file is truncated or not valid JSON."""
