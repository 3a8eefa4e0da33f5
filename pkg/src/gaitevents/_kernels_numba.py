"""Numba-jitted implementations of the hot scan kernels.

Same contract as ``_kernels_numpy``; outputs must be bit-identical. The
kernels are single-pass loops, which is where numba pays off on long
trials (see benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _extrema_candidates_jit(y):
    n = y.shape[0]
    peaks = np.empty(n // 2 + 1, np.int64)
    count = 0
    i = 1
    while i < n - 1:
        if y[i] > y[i - 1]:
            j = i
            while j < n - 1 and y[j + 1] == y[i]:
                j += 1
            if j < n - 1 and y[j + 1] < y[i]:
                peaks[count] = (i + j) // 2
                count += 1
            i = j + 1
        else:
            i += 1
    prom = np.empty(count, np.float64)
    for k in range(count):
        m = peaks[k]
        p = y[m]
        lmin = p
        jl = m - 1
        while jl >= 0 and y[jl] <= p:
            if y[jl] < lmin:
                lmin = y[jl]
            jl -= 1
        rmin = p
        jr = m + 1
        while jr < n and y[jr] <= p:
            if y[jr] < rmin:
                rmin = y[jr]
            jr += 1
        base = lmin if lmin > rmin else rmin
        prom[k] = p - base
    return peaks[:count].copy(), prom


@njit(cache=True)
def _debounced_transitions_jit(above, min_run):
    n = above.shape[0]
    frames = np.empty(n, np.int64)
    rising = np.empty(n, np.uint8)
    count = 0
    state = -1
    i = 0
    while i < n:
        j = i
        while j < n and above[j] == above[i]:
            j += 1
        if j - i >= min_run:
            side = 1 if above[i] else 0
            if state == -1:
                state = side
            elif side != state:
                frames[count] = i
                rising[count] = side
                count += 1
                state = side
        i = j
    return frames[:count].copy(), rising[:count].copy()


def extrema_candidates(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _extrema_candidates_jit(np.ascontiguousarray(y, np.float64))


def debounced_transitions(
    above: np.ndarray, min_run: int
) -> tuple[np.ndarray, np.ndarray]:
    return _debounced_transitions_jit(
        np.ascontiguousarray(above, np.uint8), int(min_run)
    )
