"""Signal primitives shared by all detectors.

Everything here operates on uniformly sampled 1-D series. The two scan
kernels (extrema candidates, debounced threshold transitions) have a
numba and a pure-numpy implementation with bit-identical outputs; the
active one is chosen by the GAITEVENTS_BACKEND environment variable
(auto, numba, numpy; unset means auto) or at runtime via
:func:`set_backend`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .errors import ConfigError, MissingMarkerError, NoDominantPeriodError, ParameterError

__all__ = [
    "Series",
    "GaitContext",
    "backend_name",
    "set_backend",
    "butterworth_zero_phase",
    "derivative",
    "local_extrema",
    "threshold_crossings",
    "estimate_gait_context",
]

_BACKEND_NAMES = ("auto", "numba", "numpy")
_active: Optional[tuple] = None  # (name, module), resolved lazily


def _load_backend(name: str):
    if name == "numpy":
        from . import _kernels_numpy as mod
    else:
        try:
            from . import _kernels_numba as mod
        except ImportError as exc:
            raise ConfigError(
                "backend 'numba' requested but numba is not importable"
            ) from exc
    return mod


def _resolve() -> tuple:
    global _active
    if _active is not None:
        return _active
    env = os.environ.get("GAITEVENTS_BACKEND", "auto").strip().lower()
    if env not in _BACKEND_NAMES:
        raise ConfigError(
            f"GAITEVENTS_BACKEND must be one of {_BACKEND_NAMES}, got {env!r}"
        )
    if env == "auto":
        try:
            _active = ("numba", _load_backend("numba"))
        except ConfigError:
            _active = ("numpy", _load_backend("numpy"))
    else:
        _active = (env, _load_backend(env))
    return _active


def backend_name() -> str:
    """Name of the kernel backend currently in use ('numba' or 'numpy')."""
    return _resolve()[0]


def set_backend(name: str) -> str:
    """Switch the kernel backend at runtime; returns the previous name."""
    global _active
    if name not in ("numba", "numpy"):
        raise ConfigError(f"backend must be 'numba' or 'numpy', got {name!r}")
    previous = _resolve()[0]
    _active = (name, _load_backend(name))
    return previous


@dataclass(frozen=True)
class Series:
    """A finite, uniformly sampled scalar signal."""

    values: np.ndarray
    sample_rate: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ParameterError(f"series must be 1-D, got shape {values.shape}")
        if not (self.sample_rate > 0):
            raise ParameterError(f"sample rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(values)):
            raise ParameterError(
                "series contains non-finite values; resolve gaps before filtering"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class GaitContext:
    """Dominant gait period/frequency and walking speed of a trial."""

    gait_period: float
    gait_frequency: float
    walking_speed: float

    def __post_init__(self):
        if not (self.gait_period > 0 and self.gait_frequency > 0):
            raise ParameterError("gait period and frequency must be positive")
        if self.walking_speed < 0:
            raise ParameterError("walking speed must be non-negative")


def butterworth_zero_phase(
    series: Series, cutoff_hz: float, kind: str = "low", order: int = 4
) -> Series:
    """Zero-phase Butterworth filter (forward-backward, SOS form).

    Two passes double the attenuation, so the amplitude ratio at the
    cutoff is 0.5 rather than the single-pass 1/sqrt(2). Edges are
    odd-reflected, which preserves linear trends and keeps constant and
    straight-line segments exact.
    """
    if kind not in ("low", "high"):
        raise ParameterError(f"filter kind must be 'low' or 'high', got {kind!r}")
    if order < 1:
        raise ParameterError(f"filter order must be >= 1, got {order}")
    nyquist = series.sample_rate / 2.0
    if not (0.0 < cutoff_hz < nyquist):
        raise ParameterError(
            f"cutoff must lie in (0, {nyquist}) Hz, got {cutoff_hz}"
        )
    padlen = 3 * order
    if len(series) <= padlen:
        raise ParameterError(
            f"series too short to filter: {len(series)} samples, need > {padlen}"
        )
    sos = butter(order, cutoff_hz, btype=kind, fs=series.sample_rate, output="sos")
    filtered = sosfiltfilt(sos, series.values, padtype="odd", padlen=padlen)
    return Series(filtered, series.sample_rate)


def derivative(series: Series) -> Series:
    """First time derivative: central differences, one-sided at the ends."""
    if len(series) < 3:
        raise ParameterError(f"need at least 3 samples, got {len(series)}")
    return Series(
        np.gradient(series.values, 1.0 / series.sample_rate), series.sample_rate
    )


def _adaptive_prominence(values: np.ndarray) -> float:
    # default gate: 10% of the interquartile range of the series
    q75, q25 = np.percentile(values, [75.0, 25.0])
    return 0.1 * float(q75 - q25)


def _prune_separation(idx: np.ndarray, score: np.ndarray, min_sep: int) -> np.ndarray:
    """Greedy separation pruning: stronger candidates silence the span
    (idx - min_sep, idx + min_sep) around them; ties go to the earlier
    frame. ``idx`` must be ascending."""
    if min_sep <= 1 or idx.size < 2:
        return idx
    order = np.lexsort((idx, -score))
    keep = np.ones(idx.size, dtype=bool)
    for k in order:
        if not keep[k]:
            continue
        lo = np.searchsorted(idx, idx[k] - min_sep + 1, side="left")
        hi = np.searchsorted(idx, idx[k] + min_sep, side="left")
        keep[lo:hi] = False
        keep[k] = True
    return idx[keep]


def local_extrema(
    series: Series,
    kind: str = "max",
    min_separation: int = 1,
    prominence: Optional[float] = None,
    relative_prominence: Optional[float] = None,
) -> np.ndarray:
    """Frames of strict local extrema, plateau centers reported once.

    Endpoints never qualify. Candidates below the prominence gate are
    dropped (default gate: 10% of the interquartile range);
    ``relative_prominence`` additionally drops candidates below that
    fraction of the most prominent one, which suppresses filter-edge
    echoes of a repetitive signal. Among survivors closer than
    ``min_separation`` frames the more extreme one wins. Minima are
    maxima of the negated series, exactly.
    """
    if kind not in ("max", "min"):
        raise ParameterError(f"extrema kind must be 'max' or 'min', got {kind!r}")
    if min_separation < 1:
        raise ParameterError(f"min_separation must be >= 1, got {min_separation}")
    if prominence is not None and prominence < 0:
        raise ParameterError(f"prominence must be >= 0, got {prominence}")
    if relative_prominence is not None and not 0 <= relative_prominence < 1:
        raise ParameterError(
            f"relative_prominence must lie in [0, 1), got {relative_prominence}"
        )
    y = series.values if kind == "max" else -series.values
    if prominence is None:
        prominence = _adaptive_prominence(series.values)
    idx, prom = _resolve()[1].extrema_candidates(np.ascontiguousarray(y, np.float64))
    if idx.size == 0:
        return idx
    ok = prom >= prominence
    if relative_prominence is not None and ok.any():
        ok &= prom >= relative_prominence * prom[ok].max()
    idx, score = idx[ok], y[idx[ok]]
    return _prune_separation(idx, score, int(min_separation))


def threshold_crossings(
    series: Series,
    threshold: float,
    direction: str = "rising",
    debounce: float = 0.05,
) -> np.ndarray:
    """Frames of debounced threshold crossings in one direction.

    The series is partitioned into runs above (value > threshold) and
    below (value <= threshold); only runs lasting at least ``debounce``
    seconds count. The state starts at the side of the first solid run,
    and each solid run on the opposite side yields one crossing at its
    first frame, so rising and falling crossings alternate and chatter
    shorter than the debounce window is ignored.
    """
    if direction not in ("rising", "falling"):
        raise ParameterError(
            f"direction must be 'rising' or 'falling', got {direction!r}"
        )
    if debounce < 0:
        raise ParameterError(f"debounce must be >= 0, got {debounce}")
    if not np.isfinite(threshold):
        raise ParameterError(f"threshold must be finite, got {threshold}")
    min_run = max(1, int(round(debounce * series.sample_rate)))
    above = series.values > threshold
    frames, rising = _resolve()[1].debounced_transitions(above, min_run)
    want = 1 if direction == "rising" else 0
    return frames[rising == want]


_CONTEXT_SMOOTH_HZ = 7.0
_MIN_PERIOD_S = 0.4
_MAX_PERIOD_S = 2.5
_MIN_AUTOCORR = 0.3


def _bridged(samples: np.ndarray) -> Optional[np.ndarray]:
    """Linearly bridge NaN stretches (edge-hold at the ends); None if
    fewer than 3 finite samples."""
    finite = np.isfinite(samples)
    if finite.sum() < 3:
        return None
    if finite.all():
        return samples
    t = np.arange(samples.size, dtype=np.float64)
    return np.interp(t, t[finite], samples[finite])


def _context_smooth(x: np.ndarray, fs: float) -> np.ndarray:
    if fs > 4 * _CONTEXT_SMOOTH_HZ and x.size > 12:
        return butterworth_zero_phase(Series(x, fs), _CONTEXT_SMOOTH_HZ).values
    return x


def estimate_gait_context(trial) -> GaitContext:
    """Estimate gait period and walking speed from heel and pelvis motion.

    The trial must be in the canonical frame (X forward, Z up). The
    period is the strongest normalized-autocorrelation lag of the heel
    height (bounded and strongly periodic regardless of how steady the
    progression is), averaged over the available sides, searched between
    0.4 s and 2.5 s; a peak below 0.3 means no dominant period. Walking
    speed is the median per-frame forward pelvis speed.
    """
    from .trial import pelvis_centroid

    fs = trial.sample_rate
    pelvis = _bridged(pelvis_centroid(trial).samples[:, 0])
    if pelvis is None:
        raise NoDominantPeriodError("pelvis trajectory has too few finite frames")
    pelvis = _context_smooth(pelvis, fs)
    n = pelvis.size

    corrs = []
    for name in ("LFCC", "RFCC"):
        marker = trial.markers.get(name)
        if marker is None:
            continue
        heel_z = _bridged(marker.samples[:, 2])
        if heel_z is None:
            continue
        rel = _context_smooth(heel_z, fs)
        rel = rel - rel.mean()
        energy = float(np.dot(rel, rel))
        if energy <= 1e-12 * n:
            continue
        corrs.append(np.correlate(rel, rel, mode="full")[n - 1 :] / energy)
    if not corrs:
        if trial.markers.get("LFCC") is None and trial.markers.get("RFCC") is None:
            raise MissingMarkerError("missing marker: LFCC or RFCC")
        raise NoDominantPeriodError("heel motion carries no periodic signal")

    r = np.mean(corrs, axis=0)
    lo = int(round(_MIN_PERIOD_S * fs))
    hi = min(int(round(_MAX_PERIOD_S * fs)), n - 1)
    if lo < 1 or hi < lo:
        raise NoDominantPeriodError(
            "trial too short to resolve a gait period between "
            f"{_MIN_PERIOD_S} s and {_MAX_PERIOD_S} s"
        )
    lag = lo + int(np.argmax(r[lo : hi + 1]))
    if r[lag] < _MIN_AUTOCORR:
        raise NoDominantPeriodError(
            f"no dominant gait period: autocorrelation peak {r[lag]:.2f} < {_MIN_AUTOCORR}"
        )
    period = lag / fs

    speed = float(np.median(np.abs(np.gradient(pelvis, 1.0 / fs))))
    return GaitContext(
        gait_period=period, gait_frequency=1.0 / period, walking_speed=speed
    )
