"""Release gate. One test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines. Every
tolerance is pinned here; nothing is derived at runtime from the code
under test.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from gaitevents import (
    GaitEvent,
    METHOD_NAMES,
    Series,
    SyntheticSpec,
    detect,
    detect_bonci,
    detect_zeni,
    estimate_gait_context,
    events_from_grf,
    generate,
    butterworth_zero_phase,
    local_extrema,
    match_events,
    summarize,
)
from gaitevents.cli import main as cli_main

from conftest import crop_trial, event_tuples, mirror_trial, translate_trial
from oracles import brute_extrema, smooth_random_series
from test_detectors import hover_trial

SWEEP_SEED = 20260815
N_SWEEP = 100
MATCH_WINDOW_S = 0.06

MEAN_ABS_LIMIT_MS = {m: 60.0 for m in METHOD_NAMES}
MEAN_ABS_LIMIT_MS["zeni"] = 10.0  # 2 frames at 200 Hz

SWEEP_RUNTIME_LIMIT_S = 30.0
GRF_FRAME_TOLERANCE = 1
SHIFT_MEAN_TOLERANCE_MS = 0.01
NOISE_STD_M = 0.002
NOISE_DETECTION_FLOOR = 0.95


def _criterion(name: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def _sweep_specs(seed: int, n: int, first_trial_seed: int, noise_std: float):
    rng = np.random.default_rng(seed)
    periods = rng.uniform(1.0, 1.3, n)
    speeds = rng.uniform(0.9, 1.4, n)
    return [
        SyntheticSpec(
            gait_period=float(periods[i]),
            walking_speed=float(speeds[i]),
            noise_std=noise_std,
            seed=first_trial_seed + i,
        )
        for i in range(n)
    ]


def _warmup():
    """Compile/load all jitted kernels outside any timed region."""
    # four cycles is the shortest trial with a solid autocorrelation peak
    trial, _ = generate(SyntheticSpec(n_cycles=4))
    ctx = estimate_gait_context(trial)
    for method in METHOD_NAMES:
        detect(trial, method, ctx=ctx)
    events_from_grf(trial)


def _run_sweep(specs):
    """Per-method pooled |delta| list and miss/spurious counts."""
    abs_deltas = {m: [] for m in METHOD_NAMES}
    missed = {m: 0 for m in METHOD_NAMES}
    spurious = {m: 0 for m in METHOD_NAMES}
    n_truth = 0
    for spec in specs:
        trial, schedule = generate(spec)
        truth = schedule.events(spec.sample_rate)
        n_truth += len(truth)
        ctx = estimate_gait_context(trial)
        for method in METHOD_NAMES:
            predicted = detect(trial, method, ctx=ctx)
            match = match_events(truth, predicted, window_s=MATCH_WINDOW_S)
            abs_deltas[method].extend(abs(p.delta_ms) for p in match.pairs)
            missed[method] += len(match.missed)
            spurious[method] += len(match.spurious)
    return abs_deltas, missed, spurious, n_truth


def test_criterion_1_accuracy_sweep():
    """100 noise-free trials, seven methods: nothing missed, nothing
    spurious, pooled mean |delta| within each method's limit, all under
    a 30 s clock (generation included, jit warm-up excluded)."""
    _warmup()
    specs = _sweep_specs(SWEEP_SEED, N_SWEEP, 0, 0.0)
    started = time.perf_counter()
    abs_deltas, missed, spurious, n_truth = _run_sweep(specs)
    elapsed = time.perf_counter() - started

    problems = []
    means = {}
    for method in METHOD_NAMES:
        mean_abs = float(np.mean(abs_deltas[method]))
        means[method] = mean_abs
        if missed[method] or spurious[method]:
            problems.append(
                f"{method}: {missed[method]} missed, {spurious[method]} spurious"
            )
        if len(abs_deltas[method]) != n_truth - missed[method]:
            problems.append(f"{method}: pair count mismatch")
        if mean_abs > MEAN_ABS_LIMIT_MS[method]:
            problems.append(
                f"{method}: mean |delta| {mean_abs:.1f} ms "
                f"> {MEAN_ABS_LIMIT_MS[method]:.0f} ms"
            )
    if elapsed >= SWEEP_RUNTIME_LIMIT_S:
        problems.append(f"runtime {elapsed:.1f} s >= {SWEEP_RUNTIME_LIMIT_S:.0f} s")

    summary = ", ".join(f"{m} {means[m]:.1f}" for m in METHOD_NAMES)
    _criterion(
        "1 accuracy sweep",
        not problems,
        "; ".join(problems) or f"mean |delta| ms: {summary}; {elapsed:.1f} s",
    )


def test_criterion_2_force_truth_recovers_schedule():
    """events_from_grf lands within one frame of the generating schedule
    on every event of the sweep."""
    specs = _sweep_specs(SWEEP_SEED, N_SWEEP, 0, 0.0)
    worst = 0
    n_events = 0
    problems = []
    for spec in specs:
        trial, schedule = generate(spec)
        got = events_from_grf(trial)
        for side in ("L", "R"):
            for kind in ("HS", "TO"):
                want = np.round(
                    np.array(schedule.times(side, kind)) * spec.sample_rate
                ).astype(np.int64)
                have = np.array(
                    [e.frame for e in got if e.side == side and e.kind == kind]
                )
                if have.size != want.size:
                    problems.append(
                        f"seed {spec.seed} {side}{kind}: "
                        f"{have.size} events, wanted {want.size}"
                    )
                    continue
                n_events += want.size
                err = int(np.max(np.abs(have - want)))
                worst = max(worst, err)
    if worst > GRF_FRAME_TOLERANCE:
        problems.append(f"worst frame error {worst} > {GRF_FRAME_TOLERANCE}")
    _criterion(
        "2 force-plate truth",
        not problems,
        "; ".join(problems) or f"{n_events} events, worst error {worst} frame(s)",
    )


def test_criterion_3_evaluator_calibration():
    """Truth against itself scores exactly zero; a 10 ms shift moves the
    mean by exactly that and leaves the spread alone."""
    _, schedule = generate(SyntheticSpec())
    truth = schedule.events(200.0)
    problems = []

    identity = summarize(match_events(truth, truth, window_s=MATCH_WINDOW_S), "self")
    for kind in ("HS", "TO"):
        if identity.stat(kind, "mean_ms") != 0.0:
            problems.append(f"identity {kind} mean {identity.stat(kind, 'mean_ms')}")
        if identity.stat(kind, "std_ms") != 0.0:
            problems.append(f"identity {kind} std {identity.stat(kind, 'std_ms')}")
        if identity.stat(kind, "detection_rate") != 1.0:
            problems.append(f"identity {kind} rate")

    shifted = [
        GaitEvent(time=e.time + 0.010, frame=e.frame + 2, side=e.side,
                  kind=e.kind, source="shifted")
        for e in truth
    ]
    moved = summarize(match_events(truth, shifted, window_s=MATCH_WINDOW_S), "shift")
    for kind in ("HS", "TO"):
        mean = moved.stat(kind, "mean_ms")
        if abs(mean - 10.0) > SHIFT_MEAN_TOLERANCE_MS:
            problems.append(f"shift {kind} mean {mean}")
        if abs(moved.stat(kind, "std_ms")) > 1e-9:
            problems.append(f"shift {kind} std {moved.stat(kind, 'std_ms')}")
        if moved.stat(kind, "detection_rate") != 1.0:
            problems.append(f"shift {kind} rate")

    _criterion(
        "3 evaluator calibration",
        not problems,
        "; ".join(problems) or "identity exact, 10 ms shift exact",
    )


def test_criterion_4_invariants():
    """Geometric and algorithmic invariants, all seven methods where
    applicable: rigid translation (exact), left/right mirroring (exact),
    five-frame crop (within one frame), refinement fallback identity,
    extrema against a brute-force scan, zero-phase peak preservation."""
    trial, _ = generate(SyntheticSpec())
    ctx = estimate_gait_context(trial)
    problems = []

    base = {m: event_tuples(detect(trial, m, ctx=ctx)) for m in METHOD_NAMES}

    moved = translate_trial(trial, (12.3, -4.56, 0.789))
    for m in METHOD_NAMES:
        if event_tuples(detect(moved, m)) != base[m]:
            problems.append(f"translation: {m}")

    swap = {"L": "R", "R": "L"}
    mirrored = mirror_trial(trial)
    for m in METHOD_NAMES:
        got = sorted((swap[s], k, f) for s, k, f in event_tuples(detect(mirrored, m)))
        if got != sorted(base[m]):
            problems.append(f"mirror: {m}")

    k = 5
    cropped = crop_trial(trial, k)
    for m in METHOD_NAMES:
        got = event_tuples(detect(cropped, m), frame_shift=k)
        if len(got) != len(base[m]) or any(
            (gs, gk) != (ws, wk) or abs(gf - wf) > 1
            for (gs, gk, gf), (ws, wk, wf) in zip(got, base[m])
        ):
            problems.append(f"time shift: {m}")

    hover = hover_trial()
    from gaitevents import GaitContext

    hover_ctx = GaitContext(gait_period=1.0, gait_frequency=1.0, walking_speed=1.0)
    seeds = detect_zeni(hover, hover_ctx)
    refined = detect_bonci(hover, hover_ctx)
    if event_tuples(refined) != event_tuples(seeds) or len(
        refined.diagnostics["fallbacks"]
    ) != len(refined.events):
        problems.append("fallback identity")

    rng = np.random.default_rng(12345)
    for i in range(50):
        values = smooth_random_series(rng)
        series = Series(values, 100.0)
        for kind in ("max", "min"):
            got = local_extrema(series, kind=kind, min_separation=1, prominence=0.0)
            want = brute_extrema(values, kind)
            if got.tolist() != want:
                problems.append(f"extrema scan: series {i} {kind}")

    t = np.arange(600) / 200.0
    bump = np.exp(-0.5 * ((t - 1.5) / 0.05) ** 2)
    raw_peak = int(np.argmax(bump))
    filtered = butterworth_zero_phase(Series(bump, 200.0), cutoff_hz=10.0)
    if abs(int(np.argmax(filtered.values)) - raw_peak) > 1:
        problems.append("zero-phase peak moved")

    _criterion("4 invariants", not problems, "; ".join(problems) or "all held")


def test_criterion_5_noise_robustness():
    """Twenty trials with 2 mm marker noise: every method keeps at least
    a 95 percent detection rate."""
    specs = _sweep_specs(7, 20, 1000, NOISE_STD_M)
    matched = {m: 0 for m in METHOD_NAMES}
    truth_count = 0
    for spec in specs:
        trial, schedule = generate(spec)
        truth = schedule.events(spec.sample_rate)
        truth_count += len(truth)
        ctx = estimate_gait_context(trial)
        for method in METHOD_NAMES:
            predicted = detect(trial, method, ctx=ctx)
            match = match_events(truth, predicted, window_s=MATCH_WINDOW_S)
            matched[method] += len(match.pairs)

    rates = {m: matched[m] / truth_count for m in METHOD_NAMES}
    problems = [
        f"{m}: {100 * rates[m]:.1f}%"
        for m in METHOD_NAMES
        if rates[m] < NOISE_DETECTION_FLOOR
    ]
    worst = min(rates.values())
    _criterion(
        "5 noise robustness",
        not problems,
        "; ".join(problems) or f"worst rate {100 * worst:.2f}%",
    )


def test_criterion_6_compare_table_matches_golden(tmp_path):
    """The compare command reproduces the frozen summary table byte for
    byte on five noisy seeded trials."""
    from pathlib import Path

    trials = tmp_path / "trials"
    out = tmp_path / "out"
    assert cli_main(["synth", "--out-dir", str(trials), "--trials", "5",
                     "--seed", "100", "--noise-std", "0.002"]) == 0
    assert cli_main(["compare", "--input-dir", str(trials),
                     "--out-dir", str(out), "--methods", "all"]) == 0

    golden = Path(__file__).parent / "data" / "golden_summary.csv"
    got = (out / "summary.csv").read_text()
    want = golden.read_text()

    problems = []
    lines = got.splitlines()
    if lines[0] != ("method,hs_mean_ms,hs_std_ms,hs_detection_rate,"
                    "to_mean_ms,to_std_ms,to_detection_rate,"
                    "n_hs_truth,n_to_truth,n_spurious_hs,n_spurious_to"):
        problems.append("header changed")
    if [line.split(",")[0] for line in lines[1:]] != list(METHOD_NAMES):
        problems.append("method rows changed")
    for line in lines[1:]:
        cells = line.split(",")
        for idx in (3, 6):
            if not 0.0 <= float(cells[idx]) <= 1.0:
                problems.append(f"{cells[0]}: rate out of range")
    if got != want:
        problems.append("table differs from golden")
    _criterion(
        "6 compare table",
        not problems,
        "; ".join(problems) or "byte-identical to golden",
    )
