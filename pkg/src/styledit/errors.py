"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, MissingArtifactError -> 3,
TrainingDivergedError -> 4.
"""


class StyleditError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(StyleditError):
    """Invalid configuration value or schema violation (names the field path)."""


class MissingArtifactError(StyleditError):
    """A required upstream artifact (dataset/checkpoint) does not exist."""


class TrainingDivergedError(StyleditError):
    """Training produced a non-finite loss and was aborted."""


class CheckpointError(StyleditError):
    """Corrupt checkpoint file or manifest mismatch (names the offending field)."""
