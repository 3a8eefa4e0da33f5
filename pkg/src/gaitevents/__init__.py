"""Marker-based gait event detection.

Seven kinematic heel-strike/toe-off detectors, force-plate ground
truth, a temporal-error evaluation harness, and a deterministic
synthetic gait generator, tied together by a small CLI (``gaitevents``).
"""

from .config import DetectorConfig
from .detectors import (
    DETECTORS,
    METHOD_NAMES,
    DetectionResult,
    detect,
    detect_bonci,
    detect_desailly,
    detect_ghoussayni,
    detect_hreljac,
    detect_hsue,
    detect_oconnor,
    detect_zeni,
)
from .errors import (
    ConfigError,
    DetectionError,
    GaitError,
    GroundTruthUnavailableError,
    MissingMarkerError,
    NoDominantPeriodError,
    NoProgressionError,
    ParameterError,
    TrialFormatError,
)
from .evaluation import (
    EvaluationReport,
    MatchedPair,
    MatchResult,
    default_window,
    export_report,
    load_report,
    match_events,
    merge_matches,
    summarize,
)
from .ground_truth import events_from_grf
from .kernels import (
    GaitContext,
    Series,
    backend_name,
    butterworth_zero_phase,
    derivative,
    estimate_gait_context,
    local_extrema,
    set_backend,
    threshold_crossings,
)
from .synth import SyntheticSpec, TruthSchedule, generate
from .trial import (
    REQUIRED_MARKERS,
    CoordinateFrame,
    GaitEvent,
    MarkerTrajectory,
    Trial,
    fill_gaps,
    load_events,
    load_trial,
    normalize_coordinates,
    pelvis_centroid,
    write_events,
    write_trial,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DetectorConfig",
    "DETECTORS",
    "METHOD_NAMES",
    "DetectionResult",
    "detect",
    "detect_zeni",
    "detect_desailly",
    "detect_oconnor",
    "detect_ghoussayni",
    "detect_hreljac",
    "detect_hsue",
    "detect_bonci",
    "GaitError",
    "TrialFormatError",
    "ConfigError",
    "ParameterError",
    "DetectionError",
    "MissingMarkerError",
    "NoProgressionError",
    "NoDominantPeriodError",
    "GroundTruthUnavailableError",
    "EvaluationReport",
    "MatchedPair",
    "MatchResult",
    "match_events",
    "merge_matches",
    "summarize",
    "default_window",
    "export_report",
    "load_report",
    "events_from_grf",
    "Series",
    "GaitContext",
    "backend_name",
    "set_backend",
    "butterworth_zero_phase",
    "derivative",
    "local_extrema",
    "threshold_crossings",
    "estimate_gait_context",
    "SyntheticSpec",
    "TruthSchedule",
    "generate",
    "Trial",
    "MarkerTrajectory",
    "CoordinateFrame",
    "GaitEvent",
    "REQUIRED_MARKERS",
    "load_trial",
    "write_trial",
    "load_events",
    "write_events",
    "normalize_coordinates",
    "pelvis_centroid",
    "fill_gaps",
]
