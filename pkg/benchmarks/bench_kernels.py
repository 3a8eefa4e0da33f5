"""Timing comparison of the numba and numpy kernel backends.

Run with: python3 benchmarks/bench_kernels.py [--repeat N]

The first numba call per process compiles (or loads the on-disk cache),
so every case is warmed before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from gaitevents import (
    Series,
    SyntheticSpec,
    backend_name,
    detect,
    estimate_gait_context,
    generate,
    local_extrema,
    set_backend,
    threshold_crossings,
)


def make_cases():
    rng = np.random.default_rng(42)
    n = 120_000  # ten minutes at 200 Hz
    t = np.arange(n) / 200.0
    wavy = np.sin(2 * np.pi * 0.9 * t) + 0.3 * np.sin(2 * np.pi * 3.7 * t)
    wavy = wavy + 0.05 * rng.standard_normal(n)
    noisy_walk = np.cumsum(rng.standard_normal(n)) * 0.01

    series = Series(wavy, 200.0)
    walk = Series(noisy_walk, 200.0)
    trial, _ = generate(SyntheticSpec(n_cycles=30))
    ctx = estimate_gait_context(trial)

    return [
        ("local_extrema 120k", lambda: local_extrema(series, prominence=0.2)),
        (
            "threshold_crossings 120k",
            lambda: threshold_crossings(walk, 0.0, direction="rising"),
        ),
        ("detect zeni 30 cycles", lambda: detect(trial, "zeni", ctx=ctx)),
        ("detect all 7, 30 cycles", lambda: [
            detect(trial, m, ctx=ctx)
            for m in ("zeni", "desailly", "oconnor", "ghoussayni",
                      "hreljac", "hsue", "bonci")
        ]),
    ]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions per case (best is reported)")
    args = parser.parse_args()

    cases = make_cases()
    results = {}
    for backend in ("numpy", "numba"):
        try:
            previous = set_backend(backend)
        except Exception as exc:
            print(f"skipping backend {backend}: {exc}")
            continue
        assert backend_name() == backend
        for name, fn in cases:
            fn()  # warm: jit compile/load, page in
            best = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            results[(name, backend)] = best
        set_backend(previous)

    width = max(len(name) for name, _ in cases)
    print(f"{'case'.ljust(width)}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, _ in cases:
        np_t = results.get((name, "numpy"))
        nb_t = results.get((name, "numba"))
        np_s = f"{1e3 * np_t:8.2f} ms" if np_t else "n/a"
        nb_s = f"{1e3 * nb_t:8.2f} ms" if nb_t else "n/a"
        ratio = f"{np_t / nb_t:7.2f}x" if np_t and nb_t else "n/a"
        print(f"{name.ljust(width)}  {np_s}  {nb_s}  {ratio}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
