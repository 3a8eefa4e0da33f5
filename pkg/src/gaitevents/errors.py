"""Exception hierarchy shared across the package.

CLI exit-code contract: format/config problems map to exit 2,
detection failures (no gait period, no progression, ...) to exit 3.
"""


class GaitError(Exception):
    """Base class for all package errors."""


class TrialFormatError(GaitError):
    """Input file does not conform to the trial or events CSV format."""


class ConfigError(GaitError):
    """Invalid configuration value or option."""


class ParameterError(GaitError):
    """Invalid parameter passed to a signal kernel."""


class DetectionError(GaitError):
    """Detection could not be performed on an otherwise valid trial."""


class MissingMarkerError(DetectionError):
    """A marker required by an operation is absent from the trial."""


class NoProgressionError(DetectionError):
    """Net pelvis displacement too small to define a walking direction."""


class NoDominantPeriodError(DetectionError):
    """Autocorrelation shows no usable gait periodicity."""


class GroundTruthUnavailableError(DetectionError):
    """Trial carries no ground reaction force channels."""
