"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the command line can
print a single parseable line before the human-readable message.
"""


class AnxeegError(Exception):
    code = "error"


class EdfFormatError(AnxeegError, ValueError):
    code = "edf_format"


class ColumnarFormatError(AnxeegError, ValueError):
    code = "columnar_format"


class FilterError(AnxeegError, ValueError):
    code = "filter"


class SegmentationError(AnxeegError, ValueError):
    code = "segmentation"


class DegenerateSignalError(AnxeegError, ValueError):
    """Input for which a feature is mathematically undefined (e.g. constant)."""

    code = "degenerate_signal"


class DegenerateSignalWarning(UserWarning):
    pass


class FeatureError(AnxeegError, ValueError):
    code = "feature"


class LabelingError(AnxeegError, ValueError):
    code = "labeling"


class TrainingError(AnxeegError, RuntimeError):
    code = "training"


class ConfigError(AnxeegError, ValueError):
    code = "config"


class StageArtifactError(AnxeegError):
    code = "missing_stage_artifact"


class StaleArtifactError(StageArtifactError):
    """Upstream artifact exists but was produced under a different configuration."""

    code = "stale_stage_artifact"
