"""Shared fixtures: kernel backends, a default synthetic trial, and the
trial transforms (translate/mirror/crop) used by the invariance tests."""

from __future__ import annotations

import numpy as np
import pytest

from gaitevents import (
    DetectorConfig,
    MarkerTrajectory,
    SyntheticSpec,
    Trial,
    detect,
    estimate_gait_context,
    generate,
    set_backend,
)


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


BACKENDS = ("numpy", "numba") if _numba_available() else ("numpy",)


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Run the test once per kernel backend, restoring the previous one."""
    previous = set_backend(request.param)
    yield request.param
    set_backend(previous)


@pytest.fixture(scope="session")
def default_case():
    """(trial, schedule) for the default synthetic spec."""
    return generate(SyntheticSpec())


@pytest.fixture(scope="session")
def default_trial(default_case):
    return default_case[0]


@pytest.fixture(scope="session")
def default_schedule(default_case):
    return default_case[1]


@pytest.fixture(scope="session")
def default_ctx(default_trial):
    return estimate_gait_context(default_trial)


@pytest.fixture(scope="session")
def base_result(default_trial, default_ctx):
    """Memoized detector runs on the default trial."""
    cache = {}

    def run(method: str):
        if method not in cache:
            cache[method] = detect(
                default_trial, method, ctx=default_ctx, cfg=DetectorConfig()
            )
        return cache[method]

    return run


def rebuild(trial: Trial, markers: dict, grf_left=None, grf_right=None) -> Trial:
    return Trial(
        trial_id=trial.trial_id,
        sample_rate=trial.sample_rate,
        markers=markers,
        grf_left=trial.grf_left if grf_left is None else grf_left,
        grf_right=trial.grf_right if grf_right is None else grf_right,
        coordinate_frame=trial.coordinate_frame,
    )


def translate_trial(trial: Trial, offset) -> Trial:
    offset = np.asarray(offset, dtype=np.float64)
    markers = {
        name: MarkerTrajectory(name, m.samples + offset)
        for name, m in trial.markers.items()
    }
    return rebuild(trial, markers)


_MIRROR = {"L": "R", "R": "L"}


def mirror_trial(trial: Trial) -> Trial:
    """Swap left and right marker sets and negate the lateral axis."""
    markers = {}
    for name, m in trial.markers.items():
        new_name = _MIRROR.get(name[0], name[0]) + name[1:]
        samples = m.samples.copy()
        samples[:, 1] = -samples[:, 1]
        markers[new_name] = MarkerTrajectory(new_name, samples)
    return rebuild(
        trial, markers, grf_left=trial.grf_right, grf_right=trial.grf_left
    )


def crop_trial(trial: Trial, k: int) -> Trial:
    """Drop the first k frames of every channel (a time shift by -k)."""
    markers = {
        name: MarkerTrajectory(name, m.samples[k:])
        for name, m in trial.markers.items()
    }
    return rebuild(
        trial, markers, grf_left=trial.grf_left[k:], grf_right=trial.grf_right[k:]
    )


def event_tuples(result, frame_shift: int = 0) -> list:
    events = result.events if hasattr(result, "events") else result
    return [(e.side, e.kind, e.frame + frame_shift) for e in events]
