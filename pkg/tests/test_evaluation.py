"""Matching, statistics and report round-trips.

The calibration cases pin the evaluator itself: feeding truth back in
must yield exactly zero error and a 100 percent rate, and a pure time
shift must move the mean without touching the spread.
"""

from __future__ import annotations

import csv
import json

import pytest

from gaitevents import (
    GaitError,
    GaitEvent,
    TrialFormatError,
    default_window,
    export_report,
    load_report,
    match_events,
    merge_matches,
    summarize,
)


def ev(time, side, kind, fs=200.0, source="truth"):
    return GaitEvent(
        time=time, frame=int(round(time * fs)), side=side, kind=kind, source=source
    )


def shifted(events, dt, frames=0):
    return [
        GaitEvent(
            time=e.time + dt,
            frame=e.frame + frames,
            side=e.side,
            kind=e.kind,
            source="shifted",
        )
        for e in events
    ]


# ------------------------------------------------------------- calibration


def test_truth_against_itself_is_perfect(default_schedule):
    truth = default_schedule.events(200.0)
    match = match_events(truth, truth)
    assert match.missed == [] and match.spurious == []
    assert len(match.pairs) == len(truth)
    assert all(p.delta_ms == 0.0 for p in match.pairs)
    report = summarize(match, "self")
    for kind in ("HS", "TO"):
        assert report.stat(kind, "detection_rate") == 1.0
        assert report.stat(kind, "mean_ms") == 0.0
        assert report.stat(kind, "std_ms") == 0.0


def test_constant_shift_moves_mean_not_std(default_schedule):
    truth = default_schedule.events(200.0)
    match = match_events(truth, shifted(truth, 0.010, frames=2))
    assert match.missed == [] and match.spurious == []
    report = summarize(match, "shifted")
    for kind in ("HS", "TO"):
        assert report.stat(kind, "mean_ms") == pytest.approx(10.0, abs=0.01)
        assert report.stat(kind, "std_ms") == pytest.approx(0.0, abs=1e-9)
        assert report.stat(kind, "detection_rate") == 1.0


# ---------------------------------------------------------------- matching


def test_far_prediction_is_spurious_and_truth_missed():
    truth = [ev(1.0, "L", "HS")]
    pred = [ev(1.5, "L", "HS")]
    match = match_events(truth, pred, window_s=0.3)
    assert match.pairs == []
    assert match.missed == truth
    assert match.spurious == pred


def test_window_edge_is_inclusive():
    # 1.25 - 1.0 is exact in binary, so the delta sits exactly on the edge
    match = match_events([ev(1.0, "L", "HS")], [ev(1.25, "L", "HS")], window_s=0.25)
    assert len(match.pairs) == 1


def test_one_to_one_closest_first():
    truth = [ev(1.0, "L", "HS"), ev(2.0, "L", "HS")]
    pred = [ev(1.04, "L", "HS"), ev(1.06, "L", "HS")]
    match = match_events(truth, pred, window_s=0.5)
    assert len(match.pairs) == 1
    assert match.pairs[0].predicted.time == 1.04
    assert match.missed == [truth[1]]
    assert match.spurious == [pred[1]]


def test_tie_breaks_deterministically():
    truth = [ev(1.0, "L", "HS")]
    pred = [ev(1.04, "L", "HS"), ev(0.96, "L", "HS")]
    match = match_events(truth, pred, window_s=0.5)
    assert match.pairs[0].predicted.time == 0.96  # earlier prediction wins the tie


def test_side_and_kind_never_cross():
    truth = [ev(1.0, "L", "HS")]
    for other in (ev(1.0, "R", "HS"), ev(1.0, "L", "TO")):
        match = match_events(truth, [other], window_s=1.0)
        assert match.pairs == []
        assert match.missed == truth
        assert match.spurious == [other]


def test_swapping_roles_negates_deltas():
    truth = [ev(1.0, "L", "HS"), ev(2.0, "L", "HS"), ev(1.5, "R", "TO")]
    pred = [ev(1.02, "L", "HS"), ev(1.46, "R", "TO"), ev(3.0, "L", "TO")]
    forward = match_events(truth, pred, window_s=0.2)
    backward = match_events(pred, truth, window_s=0.2)
    fwd = sorted(p.delta_ms for p in forward.pairs)
    bwd = sorted(-p.delta_ms for p in backward.pairs)
    assert fwd == bwd
    assert forward.missed == backward.spurious
    assert forward.spurious == backward.missed


def test_prediction_order_does_not_matter():
    truth = [ev(t, "L", "HS") for t in (1.0, 2.0, 3.0)]
    pred = [ev(0.98, "L", "HS"), ev(2.03, "L", "HS"), ev(3.01, "L", "HS")]
    a = match_events(truth, pred, window_s=0.2)
    b = match_events(truth, list(reversed(pred)), window_s=0.2)
    assert [(p.truth.time, p.predicted.time) for p in a.pairs] == [
        (p.truth.time, p.predicted.time) for p in b.pairs
    ]


def test_window_must_be_positive(default_schedule):
    truth = default_schedule.events(200.0)
    with pytest.raises(GaitError, match="positive"):
        match_events(truth, truth, window_s=0.0)


# -------------------------------------------------------------- statistics


def test_hand_computed_statistics():
    truth = [ev(t, "L", "HS") for t in (1.0, 2.0, 3.0)]
    pred = [ev(0.995, "L", "HS"), ev(2.0, "L", "HS"), ev(3.005, "L", "HS")]
    report = summarize(match_events(truth, pred, window_s=0.1), "hand")
    # deltas are -5, 0, +5 ms: mean 0, sample std sqrt((25 + 0 + 25) / 2) = 5
    assert report.stat("HS", "mean_ms") == pytest.approx(0.0, abs=1e-9)
    assert report.stat("HS", "std_ms") == pytest.approx(5.0, abs=1e-9)
    assert report.stat("HS", "n_truth") == 3
    assert report.stat("HS", "detection_rate") == 1.0


def test_undefined_statistics_are_none():
    truth = [ev(1.0, "L", "HS")]
    one = summarize(match_events(truth, truth, window_s=0.1), "one")
    assert one.stat("HS", "mean_ms") == 0.0
    assert one.stat("HS", "std_ms") is None  # a single pair has no spread

    none = summarize(match_events(truth, [], window_s=0.1), "none")
    assert none.stat("HS", "detection_rate") == 0.0
    assert none.stat("HS", "mean_ms") is None
    assert none.stat("HS", "std_ms") is None
    assert none.stat("TO", "n_truth") == 0
    assert none.stat("TO", "detection_rate") is None


def test_histogram_bins_and_counts():
    truth = [ev(t, "L", "HS") for t in (1.0, 2.0, 3.0)]
    pred = [
        ev(1.0, "L", "HS"),
        ev(2.0 + 0.0078125, "L", "HS"),  # exactly 7.8125 ms
        ev(3.0 + 0.015625, "L", "HS"),  # exactly 15.625 ms
    ]
    report = summarize(match_events(truth, pred, window_s=0.1), "hist")
    hist = report.stat("HS", "histogram")
    assert hist["edges_ms"] == [0.0, 5.0, 10.0, 15.0, 20.0]
    assert hist["counts"] == [1, 1, 0, 1]
    assert sum(hist["counts"]) == report.stat("HS", "n_matched")
    assert report.stat("TO", "histogram") == {"edges_ms": [], "counts": []}


def test_per_side_counts():
    truth = [ev(1.0, "L", "HS"), ev(1.5, "R", "HS")]
    pred = [ev(1.01, "L", "HS")]
    report = summarize(match_events(truth, pred, window_s=0.1), "sides")
    assert report.sides["L"]["HS"] == {"n_matched": 1, "n_missed": 0, "n_spurious": 0}
    assert report.sides["R"]["HS"] == {"n_matched": 0, "n_missed": 1, "n_spurious": 0}


def test_bin_width_must_be_positive(default_schedule):
    truth = default_schedule.events(200.0)
    match = match_events(truth, truth)
    with pytest.raises(GaitError, match="positive"):
        summarize(match, "bad", bin_width_ms=0.0)


def test_merge_pools_everything():
    truth_a = [ev(1.0, "L", "HS")]
    truth_b = [ev(1.0, "R", "HS"), ev(2.0, "R", "HS")]
    a = match_events(truth_a, [ev(1.01, "L", "HS")], window_s=0.2)
    b = match_events(truth_b, [ev(1.02, "R", "HS")], window_s=0.4)
    merged = merge_matches([a, b])
    assert len(merged.pairs) == 2
    assert len(merged.missed) == 1
    assert merged.window_s == pytest.approx(0.3)
    with pytest.raises(GaitError, match="merge"):
        merge_matches([])


def test_default_window_from_cadence(default_schedule):
    # inter-heel-strike interval is the 1.1 s gait period
    assert default_window(default_schedule.events(200.0)) == pytest.approx(0.55, rel=1e-9)
    assert default_window([ev(1.0, "L", "TO")]) == 0.5  # no HS: fixed fallback


# ----------------------------------------------------------------- reports


def test_json_report_round_trip(tmp_path, default_schedule):
    truth = default_schedule.events(200.0)
    match = match_events(truth, shifted(truth, 0.010, frames=2))
    report = summarize(match, "zeni")
    path = tmp_path / "report.json"
    export_report(report, path, fmt="json")

    loaded = load_report(path)
    assert loaded.method == report.method
    assert loaded.window_s == report.window_s
    assert loaded.kinds == report.kinds
    assert loaded.sides == report.sides
    assert len(loaded.pairs) == len(report.pairs)
    assert [p.delta_ms for p in loaded.pairs] == [p.delta_ms for p in report.pairs]
    assert json.loads(path.read_text())["schema"] == 1


def test_csv_report_rows(tmp_path):
    truth = [ev(1.0, "L", "HS"), ev(1.6, "L", "TO")]
    pred = shifted(truth, 0.005, frames=1)
    report = summarize(match_events(truth, pred, window_s=0.1), "csv")
    path = tmp_path / "report.csv"
    export_report(report, path, fmt="csv")

    with path.open() as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 2
    assert rows[0]["side"] == "L" and rows[0]["kind"] == "HS"
    assert int(rows[0]["truth_frame"]) == 200
    assert float(rows[0]["delta_ms"]) == report.pairs[0].delta_ms


def test_report_format_errors(tmp_path, default_schedule):
    truth = default_schedule.events(200.0)
    match = match_events(truth, truth)
    report = summarize(match, "x")
    with pytest.raises(GaitError, match="json.*csv"):
        export_report(report, tmp_path / "r.xml", fmt="xml")

    garbled = tmp_path / "garbled.json"
    garbled.write_text("{ nope")
    with pytest.raises(TrialFormatError, match="not valid JSON"):
        load_report(garbled)

    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"schema": 2}))
    with pytest.raises(TrialFormatError, match="schema"):
        load_report(wrong)

    with pytest.raises(TrialFormatError, match="cannot read"):
        load_report(tmp_path / "absent.json")
