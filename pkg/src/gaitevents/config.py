"""Detector configuration: every tunable constant used by the detectors.

All values are in canonical units (meters, seconds, newtons, Hz).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class DetectorConfig:
    """Numeric constants for the event detectors and ground-truth extraction.

    ghoussayni_speed_threshold : sagittal marker speed threshold, m/s
    grf_threshold : vertical force contact threshold, N
    desailly_hs_cutoff_mult : high-pass cutoff as a multiple of gait frequency (HS)
    desailly_to_cutoff_mult : high-pass cutoff as a multiple of gait frequency (TO)
    bonci_rearfoot_mult : heel-speed threshold as a multiple of walking speed
        (rearfoot contacts)
    bonci_mult : marker-speed threshold as a multiple of walking speed
        (forefoot contacts and toe off)
    smoothing_cutoff : low-pass cutoff applied to marker series, Hz
    min_event_separation_frac : minimum spacing of same-kind events as a
        fraction of the gait period
    debounce : minimum dwell time for threshold crossings, s
    extrema_prominence : absolute prominence floor for extrema candidates;
        None selects the adaptive per-series default (see kernels.local_extrema)
    subframe_refinement : parabolic sub-frame refinement of event times
        (off by default; event times are reported on the frame grid)
    """

    ghoussayni_speed_threshold: float = 0.5
    grf_threshold: float = 20.0
    desailly_hs_cutoff_mult: float = 0.5
    desailly_to_cutoff_mult: float = 1.1
    bonci_rearfoot_mult: float = 0.5
    bonci_mult: float = 0.8
    smoothing_cutoff: float = 7.0
    min_event_separation_frac: float = 0.4
    debounce: float = 0.05
    extrema_prominence: float | None = None
    subframe_refinement: bool = False

    def __post_init__(self):
        for name in (
            "ghoussayni_speed_threshold",
            "grf_threshold",
            "smoothing_cutoff",
            "debounce",
        ):
            if getattr(self, name) < 0 or (
                name != "debounce" and getattr(self, name) == 0
            ):
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in (
            "desailly_hs_cutoff_mult",
            "desailly_to_cutoff_mult",
            "bonci_rearfoot_mult",
            "bonci_mult",
        ):
            value = getattr(self, name)
            if not 0 < value <= 2:
                raise ConfigError(f"{name} must be in (0, 2], got {value}")
        if not 0 < self.min_event_separation_frac < 1:
            raise ConfigError(
                "min_event_separation_frac must be in (0, 1), "
                f"got {self.min_event_separation_frac}"
            )
        if self.extrema_prominence is not None and self.extrema_prominence <= 0:
            raise ConfigError("extrema_prominence must be positive or None")

    def replace(self, **overrides) -> "DetectorConfig":
        return dataclasses.replace(self, **overrides)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_json(cls, path) -> "DetectorConfig":
        """Load overrides from a JSON file mirroring the field names."""
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config JSON must be an object")
        unknown = set(data) - set(cls.field_names())
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
        return cls(**data)
