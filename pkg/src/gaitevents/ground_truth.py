"""Ground-truth gait events from vertical ground reaction force.

Heel strike is the debounced rising crossing of the vertical force
through the contact threshold, toe off the falling crossing. Both sides
are extracted independently from their own force channel.
"""

from __future__ import annotations

import numpy as np

from .errors import GroundTruthUnavailableError
from .kernels import Series, threshold_crossings
from .trial import GaitEvent, Trial

DEFAULT_THRESHOLD_N = 20.0
DEFAULT_DEBOUNCE_S = 0.05

_CHANNELS = {"L": "grf_left", "R": "grf_right"}


def events_from_grf(
    trial: Trial,
    threshold: float = DEFAULT_THRESHOLD_N,
    debounce: float = DEFAULT_DEBOUNCE_S,
) -> list:
    """Contact events from the trial's force channels, sorted by time.

    Raises GroundTruthUnavailableError when a force channel is absent or
    has non-finite samples. Events of one side always alternate HS/TO
    because the underlying crossing detector is a two-state machine.
    """
    for side, attr in _CHANNELS.items():
        if getattr(trial, attr) is None:
            raise GroundTruthUnavailableError(
                f"trial {trial.trial_id!r} has no {attr}_z channel"
            )
        if not np.all(np.isfinite(getattr(trial, attr))):
            raise GroundTruthUnavailableError(
                f"trial {trial.trial_id!r}: {attr}_z contains non-finite samples"
            )

    events = []
    for side, attr in _CHANNELS.items():
        force = Series(getattr(trial, attr), trial.sample_rate)
        for kind, direction in (("HS", "rising"), ("TO", "falling")):
            for frame in threshold_crossings(force, threshold, direction, debounce):
                events.append(
                    GaitEvent.at_frame(
                        side, kind, int(frame), trial.sample_rate, source="grf"
                    )
                )
    return sorted(events)
