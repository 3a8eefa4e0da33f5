"""Pure-numpy implementations of the hot scan kernels.

These are the reference/fallback implementations selected when numba is
unavailable or when GAITEVENTS_BACKEND=numpy. They must produce results
bit-identical to the numba versions in ``_kernels_numba``.
"""

from __future__ import annotations

import numpy as np


def extrema_candidates(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Strict (plateau-aware) local maxima of ``y`` with their prominences.

    A maximum is a run of equal samples strictly above both neighbouring
    runs; it is reported at the middle frame of the run (floor on ties).
    Endpoints and edge-touching plateaus are never maxima. Prominence is
    the drop from the peak to the higher of the two bases, where each base
    is the minimum between the peak and the nearest strictly-higher sample
    (or the series end).
    """
    n = y.size
    if n < 3:
        return np.empty(0, np.int64), np.empty(0, np.float64)
    change = np.flatnonzero(y[1:] != y[:-1])
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [n - 1]))
    vals = y[starts]
    if starts.size < 3:
        return np.empty(0, np.int64), np.empty(0, np.float64)
    interior = np.flatnonzero(
        (vals[1:-1] > vals[:-2]) & (vals[1:-1] > vals[2:])
    ) + 1
    peaks = (starts[interior] + ends[interior]) // 2
    prom = np.empty(peaks.size, np.float64)
    for k, m in enumerate(peaks):
        p = y[m]
        higher_left = np.flatnonzero(y[:m] > p)
        lo = higher_left[-1] + 1 if higher_left.size else 0
        lmin = y[lo : m + 1].min()
        higher_right = np.flatnonzero(y[m + 1 :] > p)
        hi = m + 1 + higher_right[0] if higher_right.size else n
        rmin = y[m:hi].min()
        prom[k] = p - max(lmin, rmin)
    return peaks.astype(np.int64), prom


def debounced_transitions(
    above: np.ndarray, min_run: int
) -> tuple[np.ndarray, np.ndarray]:
    """Debounced state transitions of a boolean side indicator.

    The series is split into maximal runs of constant ``above``. A run is
    solid when its length is at least ``min_run``. The state starts at the
    side of the first solid run; every later solid run on the opposite
    side flips the state and is reported at its first frame. Returns
    (frames, rising) where rising[i] is 1 for below-to-above flips.
    """
    n = above.size
    if n == 0:
        return np.empty(0, np.int64), np.empty(0, np.uint8)
    change = np.flatnonzero(above[1:] != above[:-1])
    starts = np.concatenate(([0], change + 1))
    lengths = np.diff(np.concatenate((starts, [n])))
    frames = []
    rising = []
    state = -1
    for start, length in zip(starts, lengths):
        if length < min_run:
            continue
        side = 1 if above[start] else 0
        if state == -1:
            state = side
        elif side != state:
            frames.append(start)
            rising.append(side)
            state = side
    return (
        np.asarray(frames, np.int64),
        np.asarray(rising, np.uint8),
    )
