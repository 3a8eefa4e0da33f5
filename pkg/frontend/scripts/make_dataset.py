#!/usr/bin/env python3
"""Generate synthetic gait trials for training the sequence labeller.

Unlike `gaitevents synth`, which uses one gait period and speed for a
whole batch, this draws a fresh (period, speed) pair per trial so a
noise-free dataset still spans the gait parameter space.
"""

import argparse
from pathlib import Path

import numpy as np

from gaitevents import SyntheticSpec
from gaitevents.synth import generate
from gaitevents.trial import write_events, write_trial


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--cycles", type=int, default=2)
    ap.add_argument("--rate", type=float, default=100.0)
    ap.add_argument("--period-range", nargs=2, type=float, default=[1.0, 1.3],
                    metavar=("LO", "HI"))
    ap.add_argument("--speed-range", nargs=2, type=float, default=[0.9, 1.4],
                    metavar=("LO", "HI"))
    ap.add_argument("--noise-std", type=float, default=0.0)
    ap.add_argument("--prefix", default="trial_")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    periods = rng.uniform(args.period_range[0], args.period_range[1], size=args.trials)
    speeds = rng.uniform(args.speed_range[0], args.speed_range[1], size=args.trials)
    for i in range(args.trials):
        spec = SyntheticSpec(
            n_cycles=args.cycles,
            gait_period=float(periods[i]),
            walking_speed=float(speeds[i]),
            sample_rate=args.rate,
            noise_std=args.noise_std,
            seed=args.seed + i,
        )
        trial, schedule = generate(spec)
        stem = f"{args.prefix}{i:04d}"
        write_trial(trial, out / f"{stem}.csv")
        write_events(schedule.events(args.rate), out / f"{stem}_truth.csv")
    print(f"wrote {args.trials} trials to {out}")


if __name__ == "__main__":
    main()
