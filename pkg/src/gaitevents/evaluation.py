"""Temporal-error evaluation of predicted gait events against truth.

Predictions are matched one-to-one to truth events of the same side and
kind, closest first, within a time window. Deltas are predicted minus
truth, so positive means the prediction is late. Summary statistics are
pooled over sides per event kind; the sample standard deviation uses
n - 1 and is undefined (None/null) below two pairs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import GaitError, TrialFormatError
from .trial import EVENT_KINDS, SIDES, GaitEvent

DEFAULT_BIN_WIDTH_MS = 5.0
_FALLBACK_WINDOW_S = 0.5


@dataclass(frozen=True)
class MatchedPair:
    truth: GaitEvent
    predicted: GaitEvent

    @property
    def delta_s(self) -> float:
        return self.predicted.time - self.truth.time

    @property
    def delta_ms(self) -> float:
        return 1000.0 * self.delta_s


@dataclass
class MatchResult:
    pairs: list
    missed: list
    spurious: list
    window_s: float


def _as_events(obj) -> list:
    return list(obj.events) if hasattr(obj, "events") else list(obj)


def default_window(truth: Sequence[GaitEvent]) -> float:
    """Half the median inter-heel-strike interval of the truth events,
    falling back to 0.5 s when there are too few heel strikes."""
    intervals = []
    for side in SIDES:
        times = sorted(e.time for e in truth if e.side == side and e.kind == "HS")
        intervals.extend(np.diff(times))
    if not intervals:
        return _FALLBACK_WINDOW_S
    return 0.5 * float(np.median(intervals))


def match_events(truth, predicted, window_s: Optional[float] = None) -> MatchResult:
    """Greedy one-to-one matching per (side, kind), closest pair first.

    Accepts event lists or objects with an ``events`` attribute. Ties on
    |delta| break on earlier truth, then earlier prediction, so the
    result is deterministic.
    """
    truth = _as_events(truth)
    predicted = _as_events(predicted)
    if window_s is None:
        window_s = default_window(truth)
    if not (window_s > 0):
        raise GaitError(f"matching window must be positive, got {window_s}")

    pairs = []
    matched_truth = set()
    matched_pred = set()
    for side in SIDES:
        for kind in EVENT_KINDS:
            t_idx = [i for i, e in enumerate(truth) if e.side == side and e.kind == kind]
            p_idx = [
                j for j, e in enumerate(predicted) if e.side == side and e.kind == kind
            ]
            candidates = []
            for i in t_idx:
                for j in p_idx:
                    delta = abs(predicted[j].time - truth[i].time)
                    if delta <= window_s:
                        candidates.append((delta, truth[i].time, predicted[j].time, i, j))
            for _, _, _, i, j in sorted(candidates):
                if i in matched_truth or j in matched_pred:
                    continue
                matched_truth.add(i)
                matched_pred.add(j)
                pairs.append(MatchedPair(truth=truth[i], predicted=predicted[j]))
    pairs.sort(key=lambda p: (p.truth.time, p.truth.side, p.truth.kind))
    missed = [e for i, e in enumerate(truth) if i not in matched_truth]
    spurious = [e for j, e in enumerate(predicted) if j not in matched_pred]
    return MatchResult(pairs=pairs, missed=missed, spurious=spurious, window_s=window_s)


def merge_matches(matches: Sequence[MatchResult]) -> MatchResult:
    """Pool several per-trial match results into one."""
    if not matches:
        raise GaitError("nothing to merge")
    return MatchResult(
        pairs=[p for m in matches for p in m.pairs],
        missed=[e for m in matches for e in m.missed],
        spurious=[e for m in matches for e in m.spurious],
        window_s=float(np.median([m.window_s for m in matches])),
    )


@dataclass
class EvaluationReport:
    """Per-kind error statistics, counts and histograms for one method."""

    method: str
    window_s: float
    bin_width_ms: float
    kinds: dict
    sides: dict
    pairs: list = field(default_factory=list)
    missed: list = field(default_factory=list)
    spurious: list = field(default_factory=list)

    def stat(self, kind: str, name: str):
        return self.kinds[kind][name]


def _histogram(deltas_ms: np.ndarray, bin_width: float) -> dict:
    if deltas_ms.size == 0:
        return {"edges_ms": [], "counts": []}
    lo = float(np.floor(deltas_ms.min() / bin_width) * bin_width)
    hi = float(np.ceil(deltas_ms.max() / bin_width) * bin_width)
    n_bins = max(1, int(round((hi - lo) / bin_width)))
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(deltas_ms, bins=edges)
    return {"edges_ms": [float(e) for e in edges], "counts": [int(c) for c in counts]}


def summarize(
    match: MatchResult, method: str, bin_width_ms: float = DEFAULT_BIN_WIDTH_MS
) -> EvaluationReport:
    """Reduce a match result to pooled per-kind statistics.

    Rates and statistics are None when undefined: no truth events (rate),
    no pairs (mean), fewer than two pairs (std).
    """
    if not (bin_width_ms > 0):
        raise GaitError(f"bin width must be positive, got {bin_width_ms}")
    kinds = {}
    sides: dict = {side: {} for side in SIDES}
    for kind in EVENT_KINDS:
        deltas = np.array(
            [p.delta_ms for p in match.pairs if p.truth.kind == kind], dtype=np.float64
        )
        n_matched = int(deltas.size)
        n_missed = sum(1 for e in match.missed if e.kind == kind)
        n_truth = n_matched + n_missed
        n_spurious = sum(1 for e in match.spurious if e.kind == kind)
        kinds[kind] = {
            "n_truth": n_truth,
            "n_matched": n_matched,
            "n_missed": n_missed,
            "n_spurious": n_spurious,
            "detection_rate": (n_matched / n_truth) if n_truth else None,
            "mean_ms": float(np.mean(deltas)) if n_matched else None,
            "std_ms": float(np.std(deltas, ddof=1)) if n_matched >= 2 else None,
            "histogram": _histogram(deltas, bin_width_ms),
        }
        for side in SIDES:
            sides[side][kind] = {
                "n_matched": sum(
                    1
                    for p in match.pairs
                    if p.truth.kind == kind and p.truth.side == side
                ),
                "n_missed": sum(
                    1 for e in match.missed if e.kind == kind and e.side == side
                ),
                "n_spurious": sum(
                    1 for e in match.spurious if e.kind == kind and e.side == side
                ),
            }
    return EvaluationReport(
        method=method,
        window_s=float(match.window_s),
        bin_width_ms=float(bin_width_ms),
        kinds=kinds,
        sides=sides,
        pairs=list(match.pairs),
        missed=list(match.missed),
        spurious=list(match.spurious),
    )


def _event_dict(event: GaitEvent) -> dict:
    return {
        "side": event.side,
        "kind": event.kind,
        "frame": event.frame,
        "time_s": event.time,
        "source": event.source,
    }


def _event_from_dict(data: dict) -> GaitEvent:
    return GaitEvent(
        time=data["time_s"],
        frame=data["frame"],
        side=data["side"],
        kind=data["kind"],
        source=data.get("source", ""),
    )


def export_report(report: EvaluationReport, path, fmt: str = "json") -> None:
    """Write a report as JSON (full, reloadable) or CSV (one row per
    matched pair, for plotting)."""
    path = Path(path)
    if fmt == "json":
        payload = {
            "schema": 1,
            "method": report.method,
            "window_s": report.window_s,
            "bin_width_ms": report.bin_width_ms,
            "kinds": report.kinds,
            "sides": report.sides,
            "pairs": [
                {
                    "truth": _event_dict(p.truth),
                    "predicted": _event_dict(p.predicted),
                    "delta_ms": p.delta_ms,
                }
                for p in report.pairs
            ],
            "missed": [_event_dict(e) for e in report.missed],
            "spurious": [_event_dict(e) for e in report.spurious],
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")
    elif fmt == "csv":
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                [
                    "side",
                    "kind",
                    "truth_frame",
                    "truth_time_s",
                    "predicted_frame",
                    "predicted_time_s",
                    "delta_ms",
                ]
            )
            for p in report.pairs:
                writer.writerow(
                    [
                        p.truth.side,
                        p.truth.kind,
                        p.truth.frame,
                        repr(p.truth.time),
                        p.predicted.frame,
                        repr(p.predicted.time),
                        repr(p.delta_ms),
                    ]
                )
    else:
        raise GaitError(f"unknown report format {fmt!r}; use 'json' or 'csv'")


def load_report(path) -> EvaluationReport:
    """Reload a JSON report written by export_report."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise TrialFormatError(f"cannot read report: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise TrialFormatError(f"{path}: not valid JSON: {exc}") from exc
    if payload.get("schema") != 1:
        raise TrialFormatError(f"{path}: unsupported report schema")
    return EvaluationReport(
        method=payload["method"],
        window_s=payload["window_s"],
        bin_width_ms=payload["bin_width_ms"],
        kinds=payload["kinds"],
        sides=payload["sides"],
        pairs=[
            MatchedPair(
                truth=_event_from_dict(p["truth"]),
                predicted=_event_from_dict(p["predicted"]),
            )
            for p in payload["pairs"]
        ],
        missed=[_event_from_dict(e) for e in payload["missed"]],
        spurious=[_event_from_dict(e) for e in payload["spurious"]],
    )
