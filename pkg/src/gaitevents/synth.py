"""Deterministic synthetic walking trials with an exact event schedule.

The generator builds marker trajectories from closed-form piecewise
profiles so that every detector's defining signature lands at the
scheduled instant, and nothing else looks like one:

* each foot's forward motion is stationary in stance and a trapezoidal
  velocity profile in swing. The heel gets a sharp (10 ms) deceleration
  ramp into the plant and a gentle takeoff; the toe gets a sharp
  takeoff ramp and a gentle landing. The two sharp ramps are the only
  impulsive features in the trial, producing the forward-acceleration
  spikes at heel strike (heel) and toe off (toe);
* vertical profiles are velocity-continuous everywhere, so the
  zero-phase smoothing filter never rings: feet rise smoothly after toe
  off (the toe quickly, peaking its vertical velocity just after the
  scheduled toe off) and land on a raised-cosine, touching down at zero
  vertical velocity, which puts a symmetric vertical velocity minimum
  mid-fall and the braking acceleration spike at heel strike;
* the pelvis advances at exactly the requested walking speed;
* vertical force is a trapezoid per stance, zero outside support.

Both sides open mid-approach and close mid-swing with generous margins,
so a trial contains exactly ``n_cycles`` heel strikes and toe offs per
side and nothing else. The approach and exit segments move at twice the
walking speed (not the swing peak) to keep boundary filter transients
small, and the heel stays grounded after its last toe off. All profiles
are evaluated in closed form on the frame grid; equal specs produce
bit-identical trials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .trial import CoordinateFrame, GaitEvent, MarkerTrajectory, Trial

FOOT_LENGTH = 0.15
TOE_STANCE_HEIGHT = 0.02
FOOT_LATERAL = 0.10
PELVIS_HEIGHT = 1.0
GRF_PLATEAU_N = 720.0
GRF_RAMP_S = 0.030

_SHARP_RAMP_S = 0.010   # impulsive forward-velocity ramp (heel landing, toe takeoff)
_GENTLE_FRAC = 0.30     # smooth forward ramp, fraction of swing (the other end)
_HEEL_RISE_FRAC = 0.65  # smooth heel lift, fraction of swing
_TOE_RISE_FRAC = 0.12   # fast (but smooth) toe lift right after toe off
_FALL_FRAC = 0.20       # raised-cosine landing, fraction of swing
_BOUNDARY_SPEED_MULT = 2.0  # approach/exit forward speed, in walking speeds
_LEAD_FRAC = 0.60       # first left heel strike, in gait periods
_TAIL_FRAC = 0.75       # margin after the last toe off, in gait periods

_MARKER_ORDER = (
    "LASIS", "LPSIS", "RASIS", "RPSIS", "LFCC", "LFMT2", "RFCC", "RFMT2"
)
_PELVIS_OFFSETS = {
    "LASIS": (0.10, 0.12, -0.025),
    "RASIS": (0.10, -0.12, -0.025),
    "LPSIS": (-0.10, 0.06, 0.025),
    "RPSIS": (-0.10, -0.06, 0.025),
}


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic trial."""

    n_cycles: int = 10
    gait_period: float = 1.1
    stance_fraction: float = 0.62
    walking_speed: float = 1.2
    step_height: float = 0.05
    sample_rate: float = 200.0
    noise_std: float = 0.0
    seed: int = 0
    phase_offset_lr: float = 0.5

    def __post_init__(self):
        checks = (
            (self.n_cycles >= 2, "n_cycles must be >= 2"),
            (0.4 <= self.gait_period <= 2.5, "gait_period must lie in [0.4, 2.5] s"),
            (
                0.45 <= self.stance_fraction <= 0.8,
                "stance_fraction must lie in [0.45, 0.8]",
            ),
            (0 < self.walking_speed <= 5, "walking_speed must lie in (0, 5] m/s"),
            (0.005 <= self.step_height <= 0.2, "step_height must lie in [0.005, 0.2] m"),
            (50 <= self.sample_rate <= 2000, "sample_rate must lie in [50, 2000] Hz"),
            (0 <= self.noise_std <= 0.02, "noise_std must lie in [0, 0.02] m"),
            (0 < self.phase_offset_lr < 1, "phase_offset_lr must lie in (0, 1)"),
        )
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)


@dataclass(frozen=True)
class TruthSchedule:
    """Continuous-time event schedule of a generated trial (seconds)."""

    left_hs: tuple
    left_to: tuple
    right_hs: tuple
    right_to: tuple

    def times(self, side: str, kind: str) -> tuple:
        return getattr(self, f"{'left' if side == 'L' else 'right'}_{kind.lower()}")

    def events(self, sample_rate: float, source: str = "schedule") -> list:
        """Frame-snapped schedule as GaitEvents, sorted by time."""
        out = []
        for side in ("L", "R"):
            for kind, attr in (("HS", "hs"), ("TO", "to")):
                for t in self.times(side, kind):
                    out.append(
                        GaitEvent.at_frame(
                            side, kind, int(round(t * sample_rate)), sample_rate, source
                        )
                    )
        return sorted(out)


def _ramp_distance(tau: np.ndarray, peak: float, ramp_s: float) -> np.ndarray:
    """Distance covered ``tau`` seconds into a quarter-sine velocity ramp
    that reaches ``peak`` after ``ramp_s`` and stays there. Also the
    distance still to go ``tau`` seconds before the mirrored stop."""
    c = 2.0 * ramp_s * peak / np.pi
    return np.where(
        tau <= ramp_s,
        c * (1.0 - np.cos(np.pi * np.minimum(tau, ramp_s) / (2.0 * ramp_s))),
        c + peak * (tau - ramp_s),
    )


def _swing_fraction(u: np.ndarray, rho_up: float, rho_dn: float) -> np.ndarray:
    """Fraction of the stride covered at normalized swing time u.

    The swing velocity is an asymmetric trapezoid: quarter-sine ramp up
    over rho_up, flat, quarter-sine ramp down over rho_dn.
    S(0) = 0, S(1) = 1, S'(0) = S'(1) = 0.
    """
    c_up = 2.0 * rho_up / np.pi
    c_dn = 2.0 * rho_dn / np.pi
    qint = c_up + (1.0 - rho_up - rho_dn) + c_dn
    s = np.empty_like(u)
    head = u < rho_up
    s[head] = c_up * (1.0 - np.cos(np.pi * u[head] / (2.0 * rho_up)))
    mid = (u >= rho_up) & (u <= 1.0 - rho_dn)
    s[mid] = c_up + (u[mid] - rho_up)
    tail = u > 1.0 - rho_dn
    s[tail] = (
        c_up
        + (1.0 - rho_up - rho_dn)
        + c_dn * np.cos(np.pi * (1.0 - u[tail]) / (2.0 * rho_dn))
    )
    return s / qint


def _foot_forward(t, hs, to, plant0, stride, t_swing, rho_up, rho_dn, v_bound):
    """Forward position of one foot marker: plants at ``plant0 + i*stride``
    joined by trapezoid-velocity swings. The approach and exit segments
    run at ``v_bound`` with the matching end ramps; keeping that speed
    moderate keeps boundary filter transients small."""
    x = np.empty_like(t)
    plants = plant0 + stride * np.arange(hs.size)
    approach = t < hs[0]
    x[approach] = plants[0] - _ramp_distance(
        hs[0] - t[approach], v_bound, rho_dn * t_swing
    )
    for i in range(hs.size):
        stance = (t >= hs[i]) & (t < to[i])
        x[stance] = plants[i]
        if i + 1 < hs.size:
            swing = (t >= to[i]) & (t < hs[i + 1])
            u = (t[swing] - to[i]) / t_swing
            x[swing] = plants[i] + stride * _swing_fraction(u, rho_up, rho_dn)
    exit_ = t >= to[-1]
    x[exit_] = plants[-1] + _ramp_distance(t[exit_] - to[-1], v_bound, rho_up * t_swing)
    return x


def _lift_profile(
    u: np.ndarray, height: float, rise_frac: float, land: bool
) -> np.ndarray:
    """Vertical clearance at normalized swing time u (u may exceed 1 on
    the exit swing, which never lands). The landing is a raised cosine:
    the vertical velocity dips symmetrically mid-fall and returns to
    zero exactly at touchdown."""
    z = np.full(u.shape, height)
    rise = u < rise_frac
    z[rise] = height * np.sin(np.pi * u[rise] / (2.0 * rise_frac)) ** 2
    if land:
        fall = u > 1.0 - _FALL_FRAC
        z[fall] = (height / 2.0) * (
            1.0 + np.cos(np.pi * (u[fall] - (1.0 - _FALL_FRAC)) / _FALL_FRAC)
        )
    return z


def _foot_vertical(t, hs, to, height, t_swing, rise_frac, base, exit_lift):
    z = np.full(t.shape, base, dtype=np.float64)
    fall_s = _FALL_FRAC * t_swing
    plateau = t < hs[0] - fall_s
    z[plateau] = base + height
    dropping = (t >= hs[0] - fall_s) & (t < hs[0])
    z[dropping] = base + (height / 2.0) * (
        1.0 + np.cos(np.pi * (t[dropping] - (hs[0] - fall_s)) / fall_s)
    )
    for i in range(hs.size):
        landing = i + 1 < hs.size
        if not landing and not exit_lift:
            break
        end = hs[i + 1] if landing else np.inf
        swing = (t >= to[i]) & (t < end)
        u = (t[swing] - to[i]) / t_swing
        z[swing] = base + _lift_profile(u, height, rise_frac, landing)
    return z


def _grf_channel(t, hs, to):
    force = np.zeros_like(t)
    for start, end in zip(hs, to):
        stance = (t >= start) & (t <= end)
        shape = np.minimum((t[stance] - start), (end - t[stance])) / GRF_RAMP_S
        force[stance] = GRF_PLATEAU_N * np.minimum(1.0, shape)
    return force


def generate(spec: SyntheticSpec) -> tuple:
    """Build (Trial, TruthSchedule) for a synthetic spec.

    The trial is already in the canonical frame (X forward, Z up), in
    meters, with both vertical GRF channels populated.
    """
    period, fs = spec.gait_period, spec.sample_rate
    t_swing = (1.0 - spec.stance_fraction) * period
    stride = spec.walking_speed * period
    sharp = _SHARP_RAMP_S / t_swing

    starts = {"L": _LEAD_FRAC * period,
              "R": (_LEAD_FRAC + spec.phase_offset_lr) * period}
    hs = {s: starts[s] + period * np.arange(spec.n_cycles) for s in ("L", "R")}
    to = {s: hs[s] + spec.stance_fraction * period for s in ("L", "R")}
    last_event = max(to["L"][-1], to["R"][-1])
    n_frames = int(round((last_event + _TAIL_FRAC * period) * fs)) + 1
    t = np.arange(n_frames) / fs

    heel_x = {}
    toe_x = {}
    heel_z = {}
    toe_z = {}
    v_bound = _BOUNDARY_SPEED_MULT * spec.walking_speed
    for side, plant0 in (("L", 0.0), ("R", 0.5 * stride)):
        # heel: gentle takeoff, sharp landing; toe: sharp takeoff, gentle
        # landing. Only the toe lifts on the exit swing: no detector needs
        # heel signatures after the last toe off, and a grounded heel
        # keeps the exit free of acceleration bumps.
        heel_x[side] = _foot_forward(
            t, hs[side], to[side], plant0, stride, t_swing, _GENTLE_FRAC, sharp,
            v_bound,
        )
        toe_x[side] = _foot_forward(
            t, hs[side], to[side], plant0 + FOOT_LENGTH, stride, t_swing,
            sharp, _GENTLE_FRAC, v_bound,
        )
        heel_z[side] = _foot_vertical(
            t, hs[side], to[side], spec.step_height, t_swing, _HEEL_RISE_FRAC,
            0.0, exit_lift=False,
        )
        toe_z[side] = _foot_vertical(
            t, hs[side], to[side], spec.step_height, t_swing, _TOE_RISE_FRAC,
            TOE_STANCE_HEIGHT, exit_lift=True,
        )

    pelvis_x = spec.walking_speed * (t - starts["L"])
    pelvis_y = 0.03 * np.sin(2.0 * np.pi * (t - starts["L"]) / period)
    pelvis_z = PELVIS_HEIGHT + 0.02 * np.cos(4.0 * np.pi * (t - starts["L"]) / period)
    pelvis = np.column_stack((pelvis_x, pelvis_y, pelvis_z))

    tracks = {}
    for name, offset in _PELVIS_OFFSETS.items():
        tracks[name] = pelvis + np.asarray(offset)
    for side, lateral in (("L", FOOT_LATERAL), ("R", -FOOT_LATERAL)):
        y = np.full(n_frames, lateral)
        tracks[f"{side}FCC"] = np.column_stack((heel_x[side], y, heel_z[side]))
        tracks[f"{side}FMT2"] = np.column_stack((toe_x[side], y, toe_z[side]))

    if spec.noise_std > 0:
        rng = np.random.default_rng(spec.seed)
        for name in _MARKER_ORDER:
            tracks[name] = tracks[name] + rng.normal(
                0.0, spec.noise_std, size=(n_frames, 3)
            )

    markers = {name: MarkerTrajectory(name, tracks[name]) for name in _MARKER_ORDER}
    trial = Trial(
        trial_id=f"synth_{spec.seed:04d}",
        sample_rate=fs,
        markers=markers,
        grf_left=_grf_channel(t, hs["L"], to["L"]),
        grf_right=_grf_channel(t, hs["R"], to["R"]),
        coordinate_frame=CoordinateFrame(progression=(0, 1), vertical=(2, 1)),
    )
    schedule = TruthSchedule(
        left_hs=tuple(hs["L"]),
        left_to=tuple(to["L"]),
        right_hs=tuple(hs["R"]),
        right_to=tuple(to["R"]),
    )
    return trial, schedule
