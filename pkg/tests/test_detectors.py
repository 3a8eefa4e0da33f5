"""The seven detectors: accuracy on the synthetic oracle, invariances,
degenerate cases, and dispatch."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_array_equal

import gaitevents.detectors as detectors
from gaitevents import (
    ConfigError,
    CoordinateFrame,
    DetectionError,
    DetectorConfig,
    GaitContext,
    MarkerTrajectory,
    METHOD_NAMES,
    MissingMarkerError,
    ParameterError,
    Series,
    Trial,
    detect,
    detect_bonci,
    detect_ghoussayni,
    detect_zeni,
    local_extrema,
)

from conftest import crop_trial, event_tuples, mirror_trial, rebuild, translate_trial

FS = 200.0


def truth_frames(schedule, side, kind):
    return np.round(np.array(schedule.times(side, kind)) * FS).astype(np.int64)


@pytest.mark.parametrize("method", METHOD_NAMES)
def test_every_cycle_found_within_tolerance(method, base_result, default_schedule):
    result = base_result(method)
    limit_ms = 10.0 if method == "zeni" else 60.0
    for side in ("L", "R"):
        for kind in ("HS", "TO"):
            got = result.frames(side, kind)
            want = truth_frames(default_schedule, side, kind)
            assert got.size == want.size, (method, side, kind)
            worst = np.max(np.abs(got - want)) * 1000.0 / FS
            assert worst <= limit_ms, (method, side, kind, worst)


@pytest.mark.parametrize("method", METHOD_NAMES)
def test_events_alternate_and_keep_separation(method, base_result, default_ctx):
    result = base_result(method)
    min_sep = 0.4 * default_ctx.gait_period * FS
    for side in ("L", "R"):
        side_events = [e for e in result.events if e.side == side]
        kinds = [e.kind for e in side_events]
        assert all(a != b for a, b in zip(kinds, kinds[1:])), method
        for kind in ("HS", "TO"):
            frames = result.frames(side, kind)
            if frames.size > 1:
                assert np.diff(frames).min() >= min_sep


@pytest.mark.parametrize("method", METHOD_NAMES)
def test_translation_invariance(method, base_result, default_trial):
    moved = translate_trial(default_trial, (12.3, -4.56, 0.789))
    assert event_tuples(detect(moved, method)) == event_tuples(base_result(method))


@pytest.mark.parametrize("method", METHOD_NAMES)
def test_mirror_symmetry(method, base_result, default_trial):
    swap = {"L": "R", "R": "L"}
    mirrored = detect(mirror_trial(default_trial), method)
    got = sorted((swap[s], k, f) for s, k, f in event_tuples(mirrored))
    want = sorted(event_tuples(base_result(method)))
    assert got == want


@pytest.mark.parametrize("method", METHOD_NAMES)
def test_time_shift_equivariance(method, base_result, default_trial):
    k = 5
    shifted = detect(crop_trial(default_trial, k), method)
    got = event_tuples(shifted, frame_shift=k)
    want = event_tuples(base_result(method))
    assert len(got) == len(want)
    for (gs, gk, gf), (ws, wk, wf) in zip(got, want):
        assert (gs, gk) == (ws, wk)
        assert abs(gf - wf) <= 1, method


def test_determinism(default_trial, base_result):
    again = detect_zeni(default_trial)
    assert event_tuples(again) == event_tuples(base_result("zeni"))


def test_diagnostics_shape(base_result):
    diag = base_result("zeni").diagnostics
    for side in ("L", "R"):
        assert diag[side]["n_candidates"] >= 20
        assert diag[side]["dropped_at_boundary"] >= 0
        assert diag[side]["dropped_in_gaps"] == 0
        assert diag[side]["alternation_removed"] >= 0


def test_gap_invalidates_overlapping_cycle(default_case):
    trial, schedule = default_case
    gap_frame = int(round(schedule.left_hs[4] * FS))
    samples = trial.markers["LFCC"].samples.copy()
    samples[gap_frame - 3 : gap_frame + 3] = np.nan
    markers = dict(trial.markers)
    markers["LFCC"] = MarkerTrajectory("LFCC", samples)
    gappy = rebuild(trial, markers)

    result = detect_zeni(gappy)
    assert result.frames("L", "HS").size == 9  # the covered cycle is out
    assert result.frames("R", "HS").size == 10
    assert result.diagnostics["L"]["dropped_in_gaps"] >= 1


# ------------------------------------------------------------------ bonci


def hover_trial():
    """A trial whose heel never slows below and whose toe never speeds
    above any plausible refinement threshold: every event falls back."""
    fs, n = 100.0, 1200
    t = np.arange(n) / fs
    markers = {}
    pelvis = {
        "LASIS": (0.1, 0.1, 1.0),
        "RASIS": (0.1, -0.1, 1.0),
        "LPSIS": (-0.1, 0.1, 1.0),
        "RPSIS": (-0.1, -0.1, 1.0),
    }
    for name, pos in pelvis.items():
        markers[name] = MarkerTrajectory(name, np.tile(np.asarray(pos), (n, 1)))
    for side, lateral in (("L", 0.2), ("R", -0.2)):
        heel = np.column_stack(
            (
                0.5 * np.cos(2 * np.pi * t),
                lateral + 0.5 * np.sin(2 * np.pi * t),
                np.full(n, 0.3),
            )
        )
        toe = np.column_stack(
            (
                0.1 * np.cos(2 * np.pi * t),
                np.full(n, lateral),
                np.zeros(n),
            )
        )
        markers[f"{side}FCC"] = MarkerTrajectory(f"{side}FCC", heel)
        markers[f"{side}FMT2"] = MarkerTrajectory(f"{side}FMT2", toe)
    return Trial(
        trial_id="hover",
        sample_rate=fs,
        markers=markers,
        coordinate_frame=CoordinateFrame(progression=(0, 1), vertical=(2, 1)),
    )


def test_bonci_falls_back_to_zeni_when_nothing_qualifies():
    trial = hover_trial()
    ctx = GaitContext(gait_period=1.0, gait_frequency=1.0, walking_speed=1.0)
    cfg = DetectorConfig()
    seeds = detect_zeni(trial, ctx, cfg)
    result = detect_bonci(trial, ctx, cfg)
    assert event_tuples(result) == event_tuples(seeds)
    assert len(result.events) > 10
    assert len(result.diagnostics["fallbacks"]) == len(result.events)


def test_bonci_per_kind_fallback(default_trial, default_ctx, base_result):
    zeni = base_result("zeni")
    # a huge walking speed puts the toe threshold out of reach: TO falls back
    fast = GaitContext(
        gait_period=default_ctx.gait_period,
        gait_frequency=default_ctx.gait_frequency,
        walking_speed=1e6,
    )
    result = detect_bonci(default_trial, fast)
    for side in ("L", "R"):
        assert_array_equal(result.frames(side, "TO"), zeni.frames(side, "TO"))
    to_fallbacks = [f for f in result.diagnostics["fallbacks"] if f[1] == "TO"]
    assert len(to_fallbacks) == 20

    # a vanishing walking speed makes the heel threshold unreachable: HS
    slow = GaitContext(
        gait_period=default_ctx.gait_period,
        gait_frequency=default_ctx.gait_frequency,
        walking_speed=1e-9,
    )
    result = detect_bonci(default_trial, slow)
    for side in ("L", "R"):
        assert_array_equal(result.frames(side, "HS"), zeni.frames(side, "HS"))
    hs_fallbacks = [f for f in result.diagnostics["fallbacks"] if f[1] == "HS"]
    assert len(hs_fallbacks) == 20


def test_bonci_refines_hs_later_than_seed(base_result):
    zeni = base_result("zeni")
    bonci = base_result("bonci")
    for side in ("L", "R"):
        seeds = zeni.frames(side, "HS")
        refined = bonci.frames(side, "HS")
        assert refined.size == seeds.size
        assert np.all(refined >= seeds)
    assert bonci.diagnostics["fallbacks"] == []


# ------------------------------------------------------------- each method


def test_ghoussayni_flat_speed_gives_empty_result(default_trial, default_ctx):
    cfg = DetectorConfig(ghoussayni_speed_threshold=50.0)  # unreachably high
    result = detect_ghoussayni(default_trial, default_ctx, cfg)
    assert result.events == []
    for side in ("L", "R"):
        assert result.diagnostics[side]["n_candidates"] == 0


def test_ghoussayni_to_is_early_on_average(base_result, default_schedule):
    result = base_result("ghoussayni")
    deltas = []
    for side in ("L", "R"):
        got = result.frames(side, "TO")
        want = truth_frames(default_schedule, side, "TO")
        deltas.extend((got - want) / FS)
    assert np.mean(deltas) < 0.0  # crosses the threshold during pre-swing


def test_jerk_validation_on_sinusoid():
    fs = 100.0
    t = np.arange(300) / fs
    acc = np.gradient(np.gradient(np.sin(2 * np.pi * t), 1 / fs), 1 / fs)
    frames = local_extrema(Series(acc, fs), kind="max", prominence=10.0)
    snapped, rejected = detectors._jerk_validated(frames, acc, fs)
    assert rejected == 0
    assert snapped.size == 3
    for got, want in zip(snapped, (75, 175, 275)):
        assert abs(int(got) - want) <= 1


def test_desailly_propagates_absurd_cutoff(default_trial):
    ctx = GaitContext(gait_period=1 / 91.0, gait_frequency=91.0, walking_speed=1.2)
    with pytest.raises(ParameterError):
        detect(default_trial, "desailly", ctx=ctx)


# --------------------------------------------------------------- dispatch


def test_dispatch_matches_direct_call(default_trial, default_ctx, base_result):
    via_name = detect(default_trial, "zeni", ctx=default_ctx)
    assert event_tuples(via_name) == event_tuples(base_result("zeni"))
    shouty = detect(default_trial, "  ZENI ", ctx=default_ctx)
    assert event_tuples(shouty) == event_tuples(base_result("zeni"))


def test_dispatch_suggests_near_miss(default_trial):
    with pytest.raises(ConfigError, match="zeni"):
        detect(default_trial, "zenith")
    with pytest.raises(ConfigError, match="valid methods"):
        detect(default_trial, "fourier")


def test_missing_marker_is_reported(default_trial, default_ctx):
    markers = {n: m for n, m in default_trial.markers.items() if n != "LFMT2"}
    bare = rebuild(default_trial, markers)
    with pytest.raises(MissingMarkerError, match="missing marker: LFMT2"):
        detect_zeni(bare, default_ctx)


def test_non_canonical_trial_is_rejected(default_trial):
    markers = dict(default_trial.markers)
    raw = Trial(
        trial_id="raw",
        sample_rate=default_trial.sample_rate,
        markers=markers,
        grf_left=default_trial.grf_left,
        grf_right=default_trial.grf_right,
        coordinate_frame=CoordinateFrame(),  # progression unknown
    )
    with pytest.raises(DetectionError, match="normalize"):
        detect_zeni(raw)
