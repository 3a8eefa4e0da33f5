"""Command line interface.

Subcommands: detect (one trial, one method, events CSV out), evaluate
(two events CSVs, report out), compare (a directory of trials with
force channels, per-method error table), synth (generate synthetic
trials with schedule truth).

Exit codes: 0 success, 2 format/configuration problems, 3 detection
failures (no gait period, no progression, missing markers, no force
truth).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields as dataclass_fields
from pathlib import Path

from . import __version__
from .config import DetectorConfig
from .detectors import METHOD_NAMES, detect
from .errors import DetectionError, GaitError
from .evaluation import (
    DEFAULT_BIN_WIDTH_MS,
    export_report,
    match_events,
    merge_matches,
    summarize,
)
from .ground_truth import events_from_grf
from .kernels import estimate_gait_context
from .synth import SyntheticSpec, generate
from .trial import (
    Trial,
    fill_gaps,
    load_events,
    load_trial,
    normalize_coordinates,
    write_events,
    write_trial,
)

_FORMATS_NOTE = "trial-csv=1, events-csv=1, report-schema=1"
_CONFIG_FLOAT_FIELDS = tuple(
    f.name
    for f in dataclass_fields(DetectorConfig)
    if f.name not in ("subframe_refinement",)
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("detector configuration")
    group.add_argument("--config", metavar="JSON", help="JSON file with config fields")
    for name in _CONFIG_FLOAT_FIELDS:
        group.add_argument(
            f"--{name.replace('_', '-')}", type=float, default=None, dest=name
        )
    group.add_argument(
        "--subframe-refinement", action="store_true", default=None,
        dest="subframe_refinement",
    )


def _config_from_args(args) -> DetectorConfig:
    cfg = DetectorConfig.from_json(args.config) if args.config else DetectorConfig()
    overrides = {}
    for name in _CONFIG_FLOAT_FIELDS + ("subframe_refinement",):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return cfg.replace(**overrides) if overrides else cfg


def _prepared_trial(path, max_gap_frames: int) -> tuple:
    """Load, normalize and bridge small marker gaps; returns the trial
    and a {marker: [(start, length), ...]} map of gaps left unfilled."""
    trial = normalize_coordinates(load_trial(path))
    markers = {}
    remaining = {}
    for name, traj in trial.markers.items():
        filled, unfilled = fill_gaps(traj, max_gap_frames)
        markers[name] = filled
        if unfilled:
            remaining[name] = unfilled
    prepared = Trial(
        trial_id=trial.trial_id,
        sample_rate=trial.sample_rate,
        markers=markers,
        grf_left=trial.grf_left,
        grf_right=trial.grf_right,
        coordinate_frame=trial.coordinate_frame,
    )
    return prepared, remaining


def cmd_detect(args) -> int:
    cfg = _config_from_args(args)
    trial, remaining = _prepared_trial(args.input, args.max_gap_frames)
    for marker, spans in sorted(remaining.items()):
        print(
            f"warning: {trial.trial_id}: unfilled gaps in {marker}: {spans}",
            file=sys.stderr,
        )
    method = args.method.strip().lower()
    if method == "grf":
        events = events_from_grf(trial, cfg.grf_threshold, cfg.debounce)
    else:
        events = detect(trial, method, cfg=cfg).events
    write_events(events, args.out)
    print(f"{trial.trial_id}: {len(events)} events ({method}) -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    truth = load_events(args.truth)
    predicted = load_events(args.pred)
    match = match_events(truth, predicted, window_s=args.window)
    method = predicted[0].source if predicted else "predicted"
    report = summarize(match, method=method, bin_width_ms=args.bin_width)
    export_report(report, args.out, fmt="json")
    if args.deltas_csv:
        export_report(report, args.deltas_csv, fmt="csv")
    for kind in ("HS", "TO"):
        stats = report.kinds[kind]
        mean = "n/a" if stats["mean_ms"] is None else f"{stats['mean_ms']:+.2f}"
        std = "n/a" if stats["std_ms"] is None else f"{stats['std_ms']:.2f}"
        rate = (
            "n/a"
            if stats["detection_rate"] is None
            else f"{100 * stats['detection_rate']:.1f}%"
        )
        print(
            f"{method} {kind}: mean {mean} ms, std {std} ms, "
            f"matched {stats['n_matched']}/{stats['n_truth']} ({rate}), "
            f"spurious {stats['n_spurious']}"
        )
    print(f"report -> {args.out}")
    return 0


def _parse_methods(text: str) -> list:
    if text.strip().lower() == "all":
        return list(METHOD_NAMES)
    methods = [m.strip().lower() for m in text.split(",") if m.strip()]
    if not methods:
        raise GaitError("no methods given")
    for m in methods:
        if m not in METHOD_NAMES:
            raise GaitError(
                f"unknown method {m!r}; valid methods: {', '.join(METHOD_NAMES)}"
            )
    return methods


def _compare_one(task) -> tuple:
    """Worker: evaluate every method on one trial. Returns
    (trial_id, {label: MatchResult} or None, [warnings])."""
    path, methods, extras, cfg, window, max_gap = task
    warnings = []
    try:
        trial, remaining = _prepared_trial(path, max_gap)
        for marker, spans in sorted(remaining.items()):
            warnings.append(f"{trial.trial_id}: unfilled gaps in {marker}: {spans}")
        truth = events_from_grf(trial, cfg.grf_threshold, cfg.debounce)
        ctx = estimate_gait_context(trial)
    except GaitError as exc:
        return Path(path).stem, None, [f"skipping {Path(path).name}: {exc}"]
    results = {}
    for method in methods:
        try:
            predicted = detect(trial, method, ctx=ctx, cfg=cfg)
        except GaitError as exc:
            warnings.append(f"{trial.trial_id}: {method} failed: {exc}")
            continue
        results[method] = match_events(truth, predicted, window_s=window)
    for label, directory in extras:
        events_path = Path(directory) / f"{trial.trial_id}_events.csv"
        if not events_path.exists():
            warnings.append(f"{trial.trial_id}: no {label} events at {events_path}")
            continue
        try:
            predicted = load_events(events_path)
        except GaitError as exc:
            warnings.append(f"{trial.trial_id}: cannot read {label} events: {exc}")
            continue
        results[label] = match_events(truth, predicted, window_s=window)
    return trial.trial_id, results, warnings


def _format_stat(value, pattern="{:.3f}") -> str:
    return "" if value is None else pattern.format(value)


def cmd_compare(args) -> int:
    cfg = _config_from_args(args)
    methods = _parse_methods(args.methods)
    extras = []
    for spec in args.extra_events or []:
        if "=" not in spec:
            raise GaitError(
                f"--extra-events needs NAME=DIR, got {spec!r}"
            )
        label, directory = spec.split("=", 1)
        extras.append((label.strip(), directory))
    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        raise GaitError(f"not a directory: {input_dir}")
    paths = sorted(
        p
        for p in input_dir.glob("*.csv")
        if not p.stem.endswith(("_truth", "_events"))
    )
    if not paths:
        raise GaitError(f"no trial CSVs in {input_dir}")

    tasks = [
        (str(p), methods, extras, cfg, args.window, args.max_gap_frames)
        for p in paths
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_compare_one, tasks))
    else:
        outcomes = [_compare_one(t) for t in tasks]

    per_label: dict = {}
    n_used = 0
    n_skipped = 0
    for trial_id, results, warnings in outcomes:
        for line in warnings:
            print(f"warning: {line}", file=sys.stderr)
        if results is None:
            n_skipped += 1
            continue
        n_used += 1
        for label, match in results.items():
            per_label.setdefault(label, []).append(match)
    if n_used == 0:
        raise GaitError("no usable trials (all skipped)")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = [m for m in methods if m in per_label] + [
        lab for lab, _ in extras if lab in per_label
    ]
    reports = {}
    for label in labels:
        merged = merge_matches(per_label[label])
        reports[label] = summarize(merged, method=label, bin_width_ms=args.bin_width)
        export_report(reports[label], out_dir / f"deltas_{label}.csv", fmt="csv")

    import json

    header = [
        "method",
        "hs_mean_ms", "hs_std_ms", "hs_detection_rate",
        "to_mean_ms", "to_std_ms", "to_detection_rate",
        "n_hs_truth", "n_to_truth", "n_spurious_hs", "n_spurious_to",
    ]
    lines = [",".join(header)]
    summary_json = {"schema": 1, "n_trials": n_used, "n_skipped": n_skipped, "methods": {}}
    for label in labels:
        kinds = reports[label].kinds
        hs, to = kinds["HS"], kinds["TO"]
        lines.append(
            ",".join(
                [
                    label,
                    _format_stat(hs["mean_ms"]), _format_stat(hs["std_ms"]),
                    _format_stat(hs["detection_rate"], "{:.4f}"),
                    _format_stat(to["mean_ms"]), _format_stat(to["std_ms"]),
                    _format_stat(to["detection_rate"], "{:.4f}"),
                    str(hs["n_truth"]), str(to["n_truth"]),
                    str(hs["n_spurious"]), str(to["n_spurious"]),
                ]
            )
        )
        summary_json["methods"][label] = kinds
    (out_dir / "summary.csv").write_text("\n".join(lines) + "\n")
    (out_dir / "summary.json").write_text(json.dumps(summary_json, indent=2) + "\n")

    skipped = f", {n_skipped} skipped" if n_skipped else ""
    print(f"{n_used} trial(s){skipped}, {len(labels)} method(s) -> {out_dir}")
    name_width = max(len(label) for label in labels)
    for label in labels:
        kinds = reports[label].kinds
        parts = [label.ljust(name_width)]
        for kind in ("HS", "TO"):
            stats = kinds[kind]
            if stats["mean_ms"] is None:
                parts.append(f"{kind} n/a")
            else:
                std = stats["std_ms"]
                parts.append(
                    f"{kind} {stats['mean_ms']:+7.2f} ms"
                    + (f" (std {std:6.2f})" if std is not None else "")
                )
            rate = stats["detection_rate"]
            parts.append(f"rate {100 * rate:5.1f}%" if rate is not None else "rate n/a")
        print("  ".join(parts))
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.trials):
        spec = SyntheticSpec(
            n_cycles=args.cycles,
            gait_period=args.period,
            stance_fraction=args.stance_fraction,
            walking_speed=args.speed,
            step_height=args.step_height,
            sample_rate=args.rate,
            noise_std=args.noise_std,
            seed=args.seed + i,
            phase_offset_lr=args.phase_offset,
        )
        trial, schedule = generate(spec)
        stem = f"{args.prefix}{spec.seed:04d}"
        write_trial(trial, out_dir / f"{stem}.csv")
        write_events(
            schedule.events(spec.sample_rate), out_dir / f"{stem}_truth.csv"
        )
        print(f"{stem}: {trial.n_frames} frames, "
              f"{4 * spec.n_cycles} events -> {out_dir / (stem + '.csv')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitevents",
        description="Marker-based gait event detection and evaluation.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__} ({_FORMATS_NOTE})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="run one detector on one trial")
    p_detect.add_argument("--method", required=True,
                          help=f"one of: {', '.join(METHOD_NAMES)}, grf")
    p_detect.add_argument("--input", required=True, help="trial CSV")
    p_detect.add_argument("--out", required=True, help="events CSV to write")
    p_detect.add_argument("--max-gap-frames", type=int, default=10)
    _add_config_flags(p_detect)
    p_detect.set_defaults(func=cmd_detect)

    p_eval = sub.add_parser("evaluate", help="compare two events CSVs")
    p_eval.add_argument("--pred", required=True, help="predicted events CSV")
    p_eval.add_argument("--truth", required=True, help="truth events CSV")
    p_eval.add_argument("--out", required=True, help="report JSON to write")
    p_eval.add_argument("--deltas-csv", help="also write per-pair deltas CSV")
    p_eval.add_argument("--window", type=float, default=None,
                        help="matching window in seconds "
                             "(default: half the median truth stride)")
    p_eval.add_argument("--bin-width", type=float, default=DEFAULT_BIN_WIDTH_MS,
                        help="histogram bin width in ms")
    p_eval.set_defaults(func=cmd_evaluate)

    p_cmp = sub.add_parser("compare", help="evaluate methods against force truth")
    p_cmp.add_argument("--input-dir", required=True,
                       help="directory of trial CSVs with grf channels")
    p_cmp.add_argument("--out-dir", required=True)
    p_cmp.add_argument("--methods", default="all",
                       help="comma list or 'all' (default)")
    p_cmp.add_argument("--extra-events", action="append", metavar="NAME=DIR",
                       help="also score external events CSVs named "
                            "<trial>_events.csv under DIR")
    p_cmp.add_argument("--jobs", type=int, default=1)
    p_cmp.add_argument("--window", type=float, default=None)
    p_cmp.add_argument("--bin-width", type=float, default=DEFAULT_BIN_WIDTH_MS)
    p_cmp.add_argument("--max-gap-frames", type=int, default=10)
    _add_config_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_synth = sub.add_parser("synth", help="generate synthetic trials")
    p_synth.add_argument("--out-dir", required=True)
    p_synth.add_argument("--trials", type=int, default=1)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--cycles", type=int, default=10)
    p_synth.add_argument("--period", type=float, default=1.1)
    p_synth.add_argument("--speed", type=float, default=1.2)
    p_synth.add_argument("--stance-fraction", type=float, default=0.62)
    p_synth.add_argument("--step-height", type=float, default=0.05)
    p_synth.add_argument("--rate", type=float, default=200.0)
    p_synth.add_argument("--noise-std", type=float, default=0.0)
    p_synth.add_argument("--phase-offset", type=float, default=0.5)
    p_synth.add_argument("--prefix", default="trial_")
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DetectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except GaitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
