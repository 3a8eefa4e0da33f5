"""Kinematic heel-strike / toe-off detectors.

Seven marker-only methods, one function each. All of them share the
same preprocessing (gap bridging, zero-phase low-pass smoothing of the
marker paths, central-difference derivatives) and the same event
assembly: candidates are gated, separated by a fraction of the gait
period, stripped of anything inside unresolved marker gaps or within
half a period of either end of the trial (filter transients and
truncated cycles make boundary candidates unreliable), and forced to
alternate HS/TO per side.

========== ============================================== =============
method     heel strike                                    toe off
========== ============================================== =============
zeni       pelvis-relative forward heel maxima            pelvis-relative forward toe minima
desailly   high-passed forward heel maxima (0.5 x f_gait) high-passed forward toe minima (1.1 x f_gait)
oconnor    midfoot vertical velocity minima               midfoot vertical velocity maxima
ghoussayni heel sagittal speed falling through threshold  toe sagittal speed rising through threshold
hreljac    heel vertical acceleration maxima + jerk zero  toe forward acceleration maxima + jerk zero
hsue       heel forward acceleration minima               toe forward acceleration maxima
bonci      zeni seed refined by heel 3-D speed drop       zeni seed refined by toe 3-D speed rise
========== ============================================== =============

Trials must be in the canonical frame (X forward, Z up, meters); run
``normalize_coordinates`` first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from difflib import get_close_matches
from typing import Optional

import numpy as np

from .config import DetectorConfig
from .errors import ConfigError, DetectionError
from .kernels import (
    GaitContext,
    Series,
    butterworth_zero_phase,
    derivative,
    estimate_gait_context,
    local_extrema,
    threshold_crossings,
)
from .trial import GaitEvent, Trial

METHOD_NAMES = (
    "zeni", "desailly", "oconnor", "ghoussayni", "hreljac", "hsue", "bonci"
)

_SIDES = ("L", "R")
_IMPULSE_PROMINENCE_FRAC = 0.25  # of max |signal - median|, for impact spikes
_BOUNDARY_GUARD_FRAC = 0.5       # candidates this close to either end, in
                                 # periods, are dropped
_BONCI_WINDOW_FRAC = 0.25        # search window around the seed, in periods
_BONCI_PEAK_PROMINENCE_FRAC = 0.1  # of walking speed; smaller heel-speed
                                   # peaks do not arm the decrease check
_BONCI_PEAK_MIN_FRAC = 0.5       # arming peaks must also reach this speed,
                                 # as a fraction of walking speed
_DESAILLY_RELATIVE_PROMINENCE = 0.35  # of the strongest peak; high-pass
                                      # onset echoes stay well below real
                                      # strides


@dataclass
class DetectionResult:
    """Events found by one method on one trial, plus bookkeeping."""

    method: str
    events: list
    diagnostics: dict = field(default_factory=dict)

    def frames(self, side: str, kind: str) -> np.ndarray:
        return np.array(
            [e.frame for e in self.events if e.side == side and e.kind == kind],
            dtype=np.int64,
        )


class _SideSignals:
    """Smoothed heel/toe kinematics of one side, with an invalid-frame
    mask covering unresolved marker gaps (dilated by half a period)."""

    def __init__(self, trial: Trial, side: str, cfg: DetectorConfig, ctx: GaitContext):
        fs = trial.sample_rate
        trial.require_markers((f"{side}FCC", f"{side}FMT2"))
        heel_raw = trial.markers[f"{side}FCC"].samples
        toe_raw = trial.markers[f"{side}FMT2"].samples
        gaps = np.isnan(heel_raw[:, 0]) | np.isnan(toe_raw[:, 0])
        self.invalid = _dilate(gaps, int(round(0.5 * ctx.gait_period * fs)))
        self.heel = _smooth_xyz(_bridge_xyz(heel_raw), fs, cfg.smoothing_cutoff)
        self.toe = _smooth_xyz(_bridge_xyz(toe_raw), fs, cfg.smoothing_cutoff)
        self.heel_vel = _velocity_xyz(self.heel, fs)
        self.toe_vel = _velocity_xyz(self.toe, fs)
        self.fs = fs


def _dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if not mask.any() or radius <= 0:
        return mask
    out = mask.copy()
    for frame in np.flatnonzero(mask):
        out[max(0, frame - radius) : frame + radius + 1] = True
    return out


def _bridge_column(column: np.ndarray) -> np.ndarray:
    finite = np.isfinite(column)
    if finite.all():
        return column
    if finite.sum() < 2:
        raise DetectionError("marker trajectory has fewer than 2 finite frames")
    t = np.arange(column.size, dtype=np.float64)
    return np.interp(t, t[finite], column[finite])


def _bridge_xyz(samples: np.ndarray) -> np.ndarray:
    return np.column_stack([_bridge_column(samples[:, a]) for a in range(3)])


def _smooth_xyz(samples: np.ndarray, fs: float, cutoff: float) -> np.ndarray:
    return np.column_stack(
        [
            butterworth_zero_phase(Series(samples[:, a], fs), cutoff).values
            for a in range(3)
        ]
    )


def _velocity_xyz(samples: np.ndarray, fs: float) -> np.ndarray:
    return np.column_stack(
        [derivative(Series(samples[:, a], fs)).values for a in range(3)]
    )


def _pelvis_forward(trial: Trial, cfg: DetectorConfig) -> np.ndarray:
    from .trial import pelvis_centroid

    column = pelvis_centroid(trial).samples[:, 0]
    return butterworth_zero_phase(
        Series(_bridge_column(column), trial.sample_rate), cfg.smoothing_cutoff
    ).values


def _impulse_prominence(values: np.ndarray) -> float:
    return _IMPULSE_PROMINENCE_FRAC * float(np.max(np.abs(values - np.median(values))))


def _min_separation(ctx: GaitContext, cfg: DetectorConfig, fs: float) -> int:
    return max(1, int(round(cfg.min_event_separation_frac * ctx.gait_period * fs)))


def _subframe_extremum(values: np.ndarray, frame: int) -> int:
    # parabola through the three samples around the extremum
    if frame <= 0 or frame >= values.size - 1:
        return frame
    left, mid, right = values[frame - 1 : frame + 2]
    denom = left - 2.0 * mid + right
    if denom == 0.0:
        return frame
    shift = 0.5 * (left - right) / denom
    return int(round(frame + float(np.clip(shift, -0.5, 0.5))))


@dataclass
class _Candidates:
    kind: str
    frames: np.ndarray
    scores: np.ndarray


def _extrema_candidates(
    series_values: np.ndarray,
    fs: float,
    kind: str,
    mode: str,
    ctx: GaitContext,
    cfg: DetectorConfig,
    prominence: Optional[float],
    subframe: bool,
    relative: Optional[float] = None,
) -> _Candidates:
    series = Series(series_values, fs)
    frames = local_extrema(
        series,
        kind=mode,
        min_separation=_min_separation(ctx, cfg, fs),
        prominence=cfg.extrema_prominence if prominence is None else prominence,
        relative_prominence=relative,
    )
    if subframe and cfg.subframe_refinement:
        frames = np.array(
            sorted({_subframe_extremum(series_values, int(f)) for f in frames}),
            dtype=np.int64,
        )
    sign = 1.0 if mode == "max" else -1.0
    return _Candidates(kind, frames, sign * series_values[frames])


def _crossing_candidates(
    series_values: np.ndarray,
    fs: float,
    kind: str,
    direction: str,
    threshold: float,
    cfg: DetectorConfig,
) -> _Candidates:
    frames = threshold_crossings(
        Series(series_values, fs), threshold, direction, cfg.debounce
    )
    return _Candidates(kind, frames, -frames.astype(np.float64))


def _assemble(
    method: str,
    trial: Trial,
    ctx: GaitContext,
    per_side: dict,
    keep_policy: Optional[dict] = None,
    diagnostics: Optional[dict] = None,
) -> DetectionResult:
    """Merge per-side candidates into a sorted, alternating event list."""
    policy = {"HS": "best", "TO": "best"}
    if keep_policy:
        policy.update(keep_policy)
    guard = int(round(_BOUNDARY_GUARD_FRAC * ctx.gait_period * trial.sample_rate))
    diag = diagnostics if diagnostics is not None else {}
    events = []
    for side, (candidates, invalid) in per_side.items():
        items = []
        dropped = 0
        at_boundary = 0
        for cand in candidates:
            for frame, score in zip(cand.frames, cand.scores):
                if frame < guard or frame >= trial.n_frames - guard:
                    at_boundary += 1
                    continue
                if invalid is not None and invalid[int(frame)]:
                    dropped += 1
                    continue
                items.append((int(frame), cand.kind, float(score)))
        kept, removed = _alternate(items, policy)
        side_diag = diag.setdefault(side, {})
        side_diag["n_candidates"] = len(items)
        side_diag["dropped_at_boundary"] = at_boundary
        side_diag["dropped_in_gaps"] = dropped
        side_diag["alternation_removed"] = removed
        for frame, kind in kept:
            events.append(
                GaitEvent.at_frame(side, kind, frame, trial.sample_rate, source=method)
            )
    return DetectionResult(method=method, events=sorted(events), diagnostics=diag)


def _alternate(items: list, policy: dict) -> tuple:
    """Collapse runs of same-kind candidates so HS and TO alternate.

    'best' keeps the highest score (ties: earliest frame), 'first' and
    'last' keep the run's extreme frames.
    """
    items = sorted(items, key=lambda it: (it[0], it[1] != "HS"))
    kept = []
    removed = 0
    i = 0
    while i < len(items):
        j = i
        while j + 1 < len(items) and items[j + 1][1] == items[i][1]:
            j += 1
        run = items[i : j + 1]
        how = policy[items[i][1]]
        if how == "first":
            choice = run[0]
        elif how == "last":
            choice = run[-1]
        else:
            choice = min(run, key=lambda it: (-it[2], it[0]))
        kept.append((choice[0], choice[1]))
        removed += len(run) - 1
        i = j + 1
    return kept, removed


def _context(trial: Trial, ctx: Optional[GaitContext]) -> GaitContext:
    return ctx if ctx is not None else estimate_gait_context(trial)


def _check_canonical(trial: Trial) -> None:
    if not trial.coordinate_frame.is_canonical:
        raise DetectionError(
            "trial is not in the canonical frame; run normalize_coordinates first"
        )


def detect_zeni(
    trial: Trial, ctx: Optional[GaitContext] = None, cfg: Optional[DetectorConfig] = None
) -> DetectionResult:
    """Pelvis-relative forward foot position extrema.

    HS at maxima of heel minus pelvis forward position, TO at minima of
    the same signal for the toe.
    """
    cfg = cfg or DetectorConfig()
    _check_canonical(trial)
    ctx = _context(trial, ctx)
    pelvis = _pelvis_forward(trial, cfg)
    per_side = {}
    for side in _SIDES:
        sig = _SideSignals(trial, side, cfg, ctx)
        hs = _extrema_candidates(
            sig.heel[:, 0] - pelvis, sig.fs, "HS", "max", ctx, cfg, None, True
        )
        to = _extrema_candidates(
            sig.toe[:, 0] - pelvis, sig.fs, "TO", "min", ctx, cfg, None, True
        )
        per_side[side] = ([hs, to], sig.invalid)
    return _assemble("zeni", trial, ctx, per_side)


def detect_desailly(
    trial: Trial, ctx: Optional[GaitContext] = None, cfg: Optional[DetectorConfig] = None
) -> DetectionResult:
    """High-pass filtered forward position peaks.

    The forward heel position is high-passed at ``hs_mult`` times the
    gait frequency (default 0.5) and HS taken at its maxima; the forward
    toe position is high-passed at ``to_mult`` times the gait frequency
    (default 1.1) and TO taken at its minima. Peaks far less prominent
    than the strongest one are ignored: a high-pass filter echoes the
    onset and end of a walking bout, and those echoes never reach real
    stride prominence. Runs of same-kind candidates keep the first HS
    and the last TO.
    """
    cfg = cfg or DetectorConfig()
    _check_canonical(trial)
    ctx = _context(trial, ctx)
    per_side = {}
    for side in _SIDES:
        sig = _SideSignals(trial, side, cfg, ctx)
        heel_hp = butterworth_zero_phase(
            Series(sig.heel[:, 0], sig.fs),
            cfg.desailly_hs_cutoff_mult * ctx.gait_frequency,
            kind="high",
        ).values
        toe_hp = butterworth_zero_phase(
            Series(sig.toe[:, 0], sig.fs),
            cfg.desailly_to_cutoff_mult * ctx.gait_frequency,
            kind="high",
        ).values
        hs = _extrema_candidates(
            heel_hp, sig.fs, "HS", "max", ctx, cfg, None, True,
            relative=_DESAILLY_RELATIVE_PROMINENCE,
        )
        to = _extrema_candidates(
            toe_hp, sig.fs, "TO", "min", ctx, cfg, None, True,
            relative=_DESAILLY_RELATIVE_PROMINENCE,
        )
        per_side[side] = ([hs, to], sig.invalid)
    return _assemble(
        "desailly", trial, ctx, per_side, keep_policy={"HS": "first", "TO": "last"}
    )


def detect_oconnor(
    trial: Trial, ctx: Optional[GaitContext] = None, cfg: Optional[DetectorConfig] = None
) -> DetectionResult:
    """Midfoot vertical velocity extrema: minima at HS, maxima at TO.

    The midfoot is the midpoint of the heel and toe markers. Like the
    acceleration methods, the prominence gate is scaled to the largest
    excursion: landing and push-off spikes dominate the signal, so an
    interquartile-range gate would let filter side lobes through.
    """
    cfg = cfg or DetectorConfig()
    _check_canonical(trial)
    ctx = _context(trial, ctx)
    per_side = {}
    for side in _SIDES:
        sig = _SideSignals(trial, side, cfg, ctx)
        mid_vz = 0.5 * (sig.heel_vel[:, 2] + sig.toe_vel[:, 2])
        prom = (
            cfg.extrema_prominence
            if cfg.extrema_prominence is not None
            else _impulse_prominence(mid_vz)
        )
        hs = _extrema_candidates(mid_vz, sig.fs, "HS", "min", ctx, cfg, prom, True)
        to = _extrema_candidates(mid_vz, sig.fs, "TO", "max", ctx, cfg, prom, True)
        per_side[side] = ([hs, to], sig.invalid)
    return _assemble("oconnor", trial, ctx, per_side)


def detect_ghoussayni(
    trial: Trial, ctx: Optional[GaitContext] = None, cfg: Optional[DetectorConfig] = None
) -> DetectionResult:
    """Sagittal-plane foot speed against a fixed threshold.

    HS when the heel speed falls below the threshold (default 0.5 m/s),
    TO when the toe speed rises above it; crossings are debounced.
    """
    cfg = cfg or DetectorConfig()
    _check_canonical(trial)
    ctx = _context(trial, ctx)
    per_side = {}
    for side in _SIDES:
        sig = _SideSignals(trial, side, cfg, ctx)
        heel_speed = np.hypot(sig.heel_vel[:, 0], sig.heel_vel[:, 2])
        toe_speed = np.hypot(sig.toe_vel[:, 0], sig.toe_vel[:, 2])
        hs = _crossing_candidates(
            heel_speed, sig.fs, "HS", "falling", cfg.ghoussayni_speed_threshold, cfg
        )
        to = _crossing_candidates(
            toe_speed, sig.fs, "TO", "rising", cfg.ghoussayni_speed_threshold, cfg
        )
        per_side[side] = ([hs, to], sig.invalid)
    return _assemble("ghoussayni", trial, ctx, per_side)


def _jerk_validated(frames: np.ndarray, acc: np.ndarray, fs: float) -> tuple:
    """Keep acceleration peaks with a jerk sign change within one frame
    and snap each to the frame nearest the interpolated jerk zero."""
    jerk = np.gradient(acc, 1.0 / fs)
    snapped = []
    rejected = 0
    for m in frames:
        best = None
        for j in (int(m) - 1, int(m)):
            if j < 0 or j + 1 >= acc.size:
                continue
            a, b = jerk[j], jerk[j + 1]
            if a == 0.0 and b == 0.0:
                zero = float(j)
            elif a * b <= 0.0:
                zero = j + a / (a - b)
            else:
                continue
            if best is None or abs(zero - m) < abs(best - m):
                best = zero
        if best is None:
            rejected += 1
            continue
        snapped.append(int(round(best)))
    frames_out = np.array(sorted(set(snapped)), dtype=np.int64)
    return frames_out, rejected


def detect_hreljac(
    trial: Trial, ctx: Optional[GaitContext] = None, cfg: Optional[DetectorConfig] = None
) -> DetectionResult:
    """Acceleration extrema validated by a jerk zero crossing.

    HS at heel vertical acceleration maxima, TO at toe forward
    acceleration maxima; each peak must have a jerk sign change within
    one frame and is snapped to the frame nearest the interpolated zero.
    The prominence gate is scaled to the largest acceleration excursion
    because impact spikes dwarf the interquartile range.
    """
    cfg = cfg or DetectorConfig()
    _check_canonical(trial)
    ctx = _context(trial, ctx)
    per_side = {}
    diag = {}
    for side in _SIDES:
        sig = _SideSignals(trial, side, cfg, ctx)
        heel_az = _velocity_xyz(sig.heel_vel, sig.fs)[:, 2]
        toe_ax = _velocity_xyz(sig.toe_vel, sig.fs)[:, 0]
        candidates = []
        rejected = {}
        for kind, series, mode in (("HS", heel_az, "max"), ("TO", toe_ax, "max")):
            prom = (
                cfg.extrema_prominence
                if cfg.extrema_prominence is not None
                else _impulse_prominence(series)
            )
            cand = _extrema_candidates(
                series, sig.fs, kind, mode, ctx, cfg, prom, False
            )
            frames, n_rejected = _jerk_validated(cand.frames, series, sig.fs)
            sign = 1.0 if mode == "max" else -1.0
            candidates.append(_Candidates(kind, frames, sign * series[frames]))
            rejected[kind] = n_rejected
        diag[side] = {"jerk_rejected": rejected}
        per_side[side] = (candidates, sig.invalid)
    return _assemble("hreljac", trial, ctx, per_side, diagnostics=diag)


def detect_hsue(
    trial: Trial, ctx: Optional[GaitContext] = None, cfg: Optional[DetectorConfig] = None
) -> DetectionResult:
    """Forward acceleration extrema: heel minima at HS (the landing
    deceleration), toe maxima at TO (the push-off), with the same
    impulse-scaled prominence gate as hreljac."""
    cfg = cfg or DetectorConfig()
    _check_canonical(trial)
    ctx = _context(trial, ctx)
    per_side = {}
    for side in _SIDES:
        sig = _SideSignals(trial, side, cfg, ctx)
        heel_ax = _velocity_xyz(sig.heel_vel, sig.fs)[:, 0]
        toe_ax = _velocity_xyz(sig.toe_vel, sig.fs)[:, 0]
        candidates = []
        for kind, series, mode in (("HS", heel_ax, "min"), ("TO", toe_ax, "max")):
            prom = (
                cfg.extrema_prominence
                if cfg.extrema_prominence is not None
                else _impulse_prominence(series)
            )
            candidates.append(
                _extrema_candidates(series, sig.fs, kind, mode, ctx, cfg, prom, True)
            )
        per_side[side] = (candidates, sig.invalid)
    return _assemble("hsue", trial, ctx, per_side)


def _last_armed_peak(
    speed: np.ndarray, start: int, stop: int, prominence: float, min_value: float
) -> Optional[int]:
    """Most recent local speed peak in [start, stop) that is prominent
    and fast enough to be a real swing, or None. Stance-phase ripple
    stays below both floors and does not arm the decrease check."""
    from .kernels import _resolve

    window = np.ascontiguousarray(speed[start:stop], np.float64)
    if window.size < 3:
        return None
    idx, prom = _resolve()[1].extrema_candidates(window)
    idx = idx[(prom >= prominence) & (window[idx] >= min_value)]
    if idx.size == 0:
        return None
    return start + int(idx[-1])


def detect_bonci(
    trial: Trial, ctx: Optional[GaitContext] = None, cfg: Optional[DetectorConfig] = None
) -> DetectionResult:
    """Zeni seeds refined by 3-D foot marker speed.

    HS: first frame after the seed (within a quarter period) where the
    heel speed drops below ``rearfoot_mult * walking_speed`` for a
    rearfoot contact (heel lower than toe at the seed), or
    ``mult * walking_speed`` otherwise. TO: first frame within a quarter
    period of the seed where the toe speed exceeds
    ``mult * walking_speed``, provided the heel speed has already fallen
    off its last genuine peak inside the window (prominent and at least
    half the walking speed; no such peak: the check is vacuous). Seeds
    with no qualifying frame are kept as-is and flagged as fallbacks.
    """
    cfg = cfg or DetectorConfig()
    _check_canonical(trial)
    ctx = _context(trial, ctx)
    seeds = detect_zeni(trial, ctx, cfg)
    fs = trial.sample_rate
    window = max(1, int(round(_BONCI_WINDOW_FRAC * ctx.gait_period * fs)))
    peak_prominence = _BONCI_PEAK_PROMINENCE_FRAC * ctx.walking_speed
    peak_min_speed = _BONCI_PEAK_MIN_FRAC * ctx.walking_speed

    signals = {side: _SideSignals(trial, side, cfg, ctx) for side in _SIDES}
    speeds = {
        side: (
            np.linalg.norm(sig.heel_vel, axis=1),
            np.linalg.norm(sig.toe_vel, axis=1),
        )
        for side, sig in signals.items()
    }
    events = []
    fallbacks = []
    for seed in seeds.events:
        sig = signals[seed.side]
        heel_speed, toe_speed = speeds[seed.side]
        n = sig.heel.shape[0]
        refined = None
        if seed.kind == "HS":
            rearfoot = sig.heel[seed.frame, 2] < sig.toe[seed.frame, 2]
            mult = cfg.bonci_rearfoot_mult if rearfoot else cfg.bonci_mult
            threshold = mult * ctx.walking_speed
            stop = min(n, seed.frame + window + 1)
            below = np.flatnonzero(heel_speed[seed.frame + 1 : stop] < threshold)
            if below.size:
                refined = seed.frame + 1 + int(below[0])
        else:
            threshold = cfg.bonci_mult * ctx.walking_speed
            start = max(0, seed.frame - window)
            stop = min(n, seed.frame + window + 1)
            for g in range(start, stop):
                if toe_speed[g] <= threshold:
                    continue
                peak = _last_armed_peak(
                    heel_speed, start, g, peak_prominence, peak_min_speed
                )
                if peak is None or heel_speed[g] < heel_speed[peak]:
                    refined = g
                    break
        if refined is None:
            fallbacks.append((seed.side, seed.kind, seed.frame))
            refined = seed.frame
        events.append(
            GaitEvent.at_frame(seed.side, seed.kind, refined, fs, source="bonci")
        )

    per_side = {}
    for side in _SIDES:
        items = [
            _Candidates(
                kind,
                np.array(
                    [e.frame for e in events if e.side == side and e.kind == kind],
                    dtype=np.int64,
                ),
                np.array(
                    [-e.frame for e in events if e.side == side and e.kind == kind],
                    dtype=np.float64,
                ),
            )
            for kind in ("HS", "TO")
        ]
        per_side[side] = (items, signals[side].invalid)
    diag = {"fallbacks": fallbacks, "n_seeds": len(seeds.events)}
    return _assemble("bonci", trial, ctx, per_side, diagnostics=diag)


DETECTORS = {
    "zeni": detect_zeni,
    "desailly": detect_desailly,
    "oconnor": detect_oconnor,
    "ghoussayni": detect_ghoussayni,
    "hreljac": detect_hreljac,
    "hsue": detect_hsue,
    "bonci": detect_bonci,
}


def detect(
    trial: Trial,
    method: str,
    ctx: Optional[GaitContext] = None,
    cfg: Optional[DetectorConfig] = None,
) -> DetectionResult:
    """Run one named detector on a normalized trial."""
    key = method.strip().lower()
    if key not in DETECTORS:
        hint = get_close_matches(key, METHOD_NAMES, n=1)
        suffix = f" (did you mean {hint[0]!r}?)" if hint else ""
        raise ConfigError(
            f"unknown method {method!r}; valid methods: "
            f"{', '.join(METHOD_NAMES)}{suffix}"
        )
    return DETECTORS[key](trial, ctx=ctx, cfg=cfg)
