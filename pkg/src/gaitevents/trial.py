"""Trial data model and CSV interchange.

A trial is a set of synchronized marker trajectories (meters) plus
optional vertical ground reaction force channels (newtons), sampled at a
single rate. Gaps are NaN rows. Two text formats are defined here and
used by every tool in the package:

Trial CSV
    line 1:  ``# sample_rate_hz=<float>, units=<mm|m>``
    line 2:  ``frame,<MARKER>_x,<MARKER>_y,<MARKER>_z,...[,grf_left_z,grf_right_z]``
    data :   one row per frame, empty cells are gaps

Events CSV
    header ``side,kind,frame,time_s,source`` with side in {L, R} and
    kind in {HS, TO}.

Loaded positions are converted to meters; writers always emit meters.
Floats are written with ``repr`` so a load/write cycle is bit-exact.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    MissingMarkerError,
    NoProgressionError,
    TrialFormatError,
)

PELVIS_MARKERS = ("LASIS", "LPSIS", "RASIS", "RPSIS")
REQUIRED_MARKERS = PELVIS_MARKERS + ("LFCC", "RFCC", "LFMT2", "RFMT2")
SIDES = ("L", "R")
EVENT_KINDS = ("HS", "TO")

_AXES = ("x", "y", "z")
_GRF_COLUMNS = ("grf_left_z", "grf_right_z")
_MIN_PROGRESSION_M = 0.5


@dataclass(frozen=True)
class MarkerTrajectory:
    """One marker's (N, 3) path in meters; gap frames are all-NaN rows."""

    name: str
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise TrialFormatError(
                f"marker {self.name}: samples must be (N, 3), got {samples.shape}"
            )
        samples = samples.copy()
        samples[~np.isfinite(samples).all(axis=1)] = np.nan
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n_frames(self) -> int:
        return self.samples.shape[0]

    @property
    def gap_mask(self) -> np.ndarray:
        return np.isnan(self.samples[:, 0])


@dataclass(frozen=True)
class CoordinateFrame:
    """Which raw axes carry progression and vertical, with signs.

    Axes are (index, sign) pairs; progression is None until detected.
    The canonical frame is progression (0, +1) and vertical (2, +1):
    X forward along walking direction, Z up.
    """

    progression: Optional[tuple] = None
    vertical: tuple = (2, 1)

    def __post_init__(self):
        for label, axis in (("progression", self.progression), ("vertical", self.vertical)):
            if axis is None:
                continue
            if tuple(axis)[0] not in (0, 1, 2) or tuple(axis)[1] not in (-1, 1):
                raise ConfigError(f"{label} axis must be (0|1|2, +1|-1), got {axis!r}")
        if self.progression is not None:
            object.__setattr__(self, "progression", tuple(self.progression))
            if self.progression[0] == tuple(self.vertical)[0]:
                raise ConfigError("progression and vertical axes must differ")
        object.__setattr__(self, "vertical", tuple(self.vertical))

    @property
    def is_canonical(self) -> bool:
        return self.progression == (0, 1) and self.vertical == (2, 1)


@dataclass(frozen=True, order=True)
class GaitEvent:
    """A single heel strike or toe off."""

    time: float
    frame: int
    side: str
    kind: str
    source: str = field(compare=False, default="")

    def __post_init__(self):
        if self.side not in SIDES:
            raise TrialFormatError(f"event side must be L or R, got {self.side!r}")
        if self.kind not in EVENT_KINDS:
            raise TrialFormatError(f"event kind must be HS or TO, got {self.kind!r}")
        if self.frame < 0 or not np.isfinite(self.time) or self.time < 0:
            raise TrialFormatError(
                f"event frame/time must be non-negative, got {self.frame}/{self.time}"
            )

    @classmethod
    def at_frame(cls, side: str, kind: str, frame: int, sample_rate: float, source: str):
        return cls(
            time=frame / sample_rate, frame=int(frame), side=side, kind=kind, source=source
        )


@dataclass(frozen=True)
class Trial:
    """Synchronized markers plus optional vertical GRF channels."""

    trial_id: str
    sample_rate: float
    markers: Mapping[str, MarkerTrajectory]
    grf_left: Optional[np.ndarray] = None
    grf_right: Optional[np.ndarray] = None
    coordinate_frame: CoordinateFrame = CoordinateFrame()

    def __post_init__(self):
        if not (self.sample_rate > 0):
            raise ConfigError(f"sample rate must be positive, got {self.sample_rate}")
        if not self.markers:
            raise TrialFormatError("trial has no markers")
        lengths = {m.n_frames for m in self.markers.values()}
        for channel in ("grf_left", "grf_right"):
            value = getattr(self, channel)
            if value is None:
                continue
            value = np.asarray(value, dtype=np.float64)
            if value.ndim != 1:
                raise TrialFormatError(f"{channel} must be 1-D")
            value = value.copy()
            value.setflags(write=False)
            object.__setattr__(self, channel, value)
            lengths.add(value.size)
        if len(lengths) != 1:
            raise TrialFormatError(f"channel lengths differ: {sorted(lengths)}")
        if lengths.pop() < 2:
            raise TrialFormatError("trial must have at least 2 frames")
        object.__setattr__(self, "markers", MappingProxyType(dict(self.markers)))
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    @property
    def n_frames(self) -> int:
        return next(iter(self.markers.values())).n_frames

    @property
    def duration(self) -> float:
        return (self.n_frames - 1) / self.sample_rate

    def require_markers(self, names: Sequence[str]) -> None:
        for name in names:
            if name not in self.markers:
                raise MissingMarkerError(f"missing marker: {name}")


def _parse_header_line(line: str, path) -> tuple[float, str]:
    if not line.startswith("#"):
        raise TrialFormatError(f"{path}: line 1 must be a '# key=value' header")
    fields = {}
    for token in line[1:].split(","):
        token = token.strip()
        if not token:
            continue
        match = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S+)", token)
        if match is None:
            raise TrialFormatError(f"{path}: malformed header token {token!r}")
        fields[match.group(1)] = match.group(2)
    if "sample_rate_hz" not in fields:
        raise TrialFormatError(f"{path}: header is missing sample_rate_hz")
    try:
        rate = float(fields["sample_rate_hz"])
    except ValueError:
        raise TrialFormatError(
            f"{path}: sample_rate_hz is not a number: {fields['sample_rate_hz']!r}"
        ) from None
    if not (rate > 0 and np.isfinite(rate)):
        raise ConfigError(f"{path}: sample rate must be positive, got {rate}")
    units = fields.get("units", "mm")
    if units not in ("mm", "m"):
        raise TrialFormatError(f"{path}: units must be mm or m, got {units!r}")
    return rate, units


def _parse_columns(header: Sequence[str], path):
    if not header or header[0].strip() != "frame":
        raise TrialFormatError(f"{path}: first column must be 'frame'")
    names = [c.strip() for c in header]
    if len(set(names)) != len(names):
        raise TrialFormatError(f"{path}: duplicate column names")
    marker_axes: dict[str, dict[str, int]] = {}
    grf_cols: dict[str, int] = {}
    for pos, name in enumerate(names[1:], start=1):
        if name in _GRF_COLUMNS:
            grf_cols[name] = pos
            continue
        if "_" not in name:
            raise TrialFormatError(f"{path}: unrecognized column {name!r}")
        marker, axis = name.rsplit("_", 1)
        if axis not in _AXES or not marker:
            raise TrialFormatError(f"{path}: unrecognized column {name!r}")
        marker_axes.setdefault(marker, {})[axis] = pos
    for marker, axes in marker_axes.items():
        for axis in _AXES:
            if axis not in axes:
                raise TrialFormatError(
                    f"{path}: marker {marker} is missing column {marker}_{axis}"
                )
    for required in REQUIRED_MARKERS:
        if required not in marker_axes:
            raise TrialFormatError(f"{path}: missing marker: {required}")
    return marker_axes, grf_cols


def _parse_cell(text: str, line_no: int, column: str, path) -> float:
    text = text.strip()
    if not text:
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise TrialFormatError(
            f"{path}: line {line_no}, column {column}: not a number: {text!r}"
        ) from None


def load_trial(path) -> Trial:
    """Read a Trial CSV; positions are converted to meters."""
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise TrialFormatError(f"cannot read trial file: {exc}") from exc
    lines = raw.splitlines()
    if len(lines) < 4:
        raise TrialFormatError(f"{path}: need a header, column line and >= 2 data rows")
    rate, units = _parse_header_line(lines[0], path)
    rows = list(csv.reader(lines[1:]))
    columns = rows[0]
    marker_axes, grf_cols = _parse_columns(columns, path)
    n_cols = len(columns)
    n_frames = len(rows) - 1

    table = np.empty((n_frames, n_cols), dtype=np.float64)
    for i, row in enumerate(rows[1:]):
        line_no = i + 3
        if len(row) != n_cols:
            raise TrialFormatError(
                f"{path}: line {line_no}: expected {n_cols} fields, got {len(row)}"
            )
        for j, cell in enumerate(row):
            table[i, j] = _parse_cell(cell, line_no, columns[j].strip(), path)
        frame_value = table[i, 0]
        if not (np.isfinite(frame_value) and frame_value == i):
            raise TrialFormatError(
                f"{path}: line {line_no}: frame column must count 0..N-1, got {row[0]!r}"
            )

    scale = 0.001 if units == "mm" else 1.0
    markers = {}
    for name, axes in marker_axes.items():
        xyz = table[:, [axes["x"], axes["y"], axes["z"]]] * scale
        markers[name] = MarkerTrajectory(name, xyz)
    grf_left = table[:, grf_cols["grf_left_z"]] if "grf_left_z" in grf_cols else None
    grf_right = table[:, grf_cols["grf_right_z"]] if "grf_right_z" in grf_cols else None
    return Trial(
        trial_id=path.stem,
        sample_rate=rate,
        markers=markers,
        grf_left=grf_left,
        grf_right=grf_right,
    )


def _format_cell(value: float) -> str:
    return "" if np.isnan(value) else repr(float(value))


def write_trial(trial: Trial, path) -> None:
    """Write a Trial CSV in meters. Loading it back is bit-exact."""
    path = Path(path)
    columns = ["frame"]
    for name in trial.markers:
        columns.extend(f"{name}_{axis}" for axis in _AXES)
    for channel, column in (("grf_left", "grf_left_z"), ("grf_right", "grf_right_z")):
        if getattr(trial, channel) is not None:
            columns.append(column)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        handle.write(f"# sample_rate_hz={trial.sample_rate!r}, units=m\n")
        writer.writerow(columns)
        for i in range(trial.n_frames):
            row = [str(i)]
            for marker in trial.markers.values():
                row.extend(_format_cell(v) for v in marker.samples[i])
            for channel in ("grf_left", "grf_right"):
                values = getattr(trial, channel)
                if values is not None:
                    row.append(_format_cell(values[i]))
            writer.writerow(row)


def pelvis_centroid(trial: Trial) -> MarkerTrajectory:
    """Frame-wise mean of the four pelvis markers.

    Gap frames fall back to the markers still present; frames where all
    four are missing stay NaN.
    """
    trial.require_markers(PELVIS_MARKERS)
    stack = np.stack([trial.markers[m].samples for m in PELVIS_MARKERS])
    present = np.isfinite(stack[:, :, 0])
    counts = present.sum(axis=0).astype(np.float64)
    filled = np.where(np.isfinite(stack), stack, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        centroid = filled.sum(axis=0) / counts[:, None]
    centroid[counts == 0] = np.nan
    return MarkerTrajectory("PELVIS", centroid)


def normalize_coordinates(trial: Trial) -> Trial:
    """Rotate a trial into the canonical frame: X forward, Z up.

    The progression axis is the non-vertical raw axis with the largest
    net pelvis-centroid displacement (its sign gives the direction); the
    remaining axis is chosen to keep the basis right-handed. Applying
    this to an already-canonical trial is an exact identity.
    """
    centroid = pelvis_centroid(trial).samples
    finite = np.flatnonzero(np.isfinite(centroid[:, 0]))
    if finite.size < 2:
        raise NoProgressionError("pelvis centroid has fewer than 2 finite frames")
    displacement = centroid[finite[-1]] - centroid[finite[0]]

    vert_axis, vert_sign = trial.coordinate_frame.vertical
    candidates = [a for a in (0, 1, 2) if a != vert_axis]
    prog_axis = max(candidates, key=lambda a: abs(displacement[a]))
    travel = displacement[prog_axis]
    if abs(travel) < _MIN_PROGRESSION_M:
        raise NoProgressionError(
            f"net pelvis displacement {abs(travel):.3f} m is below "
            f"{_MIN_PROGRESSION_M} m; no progression direction"
        )
    prog_sign = 1 if travel > 0 else -1

    ex = np.zeros(3)
    ex[prog_axis] = prog_sign
    ez = np.zeros(3)
    ez[vert_axis] = vert_sign
    ey = np.cross(ez, ex)
    lat_axis = int(np.flatnonzero(ey)[0])
    lat_sign = int(ey[lat_axis])

    mapping = ((prog_axis, prog_sign), (lat_axis, lat_sign), (vert_axis, vert_sign))

    def transform(xyz: np.ndarray) -> np.ndarray:
        out = np.empty_like(xyz)
        for new_axis, (src_axis, sign) in enumerate(mapping):
            out[:, new_axis] = xyz[:, src_axis] if sign == 1 else -xyz[:, src_axis]
        return out

    markers = {
        name: MarkerTrajectory(name, transform(m.samples))
        for name, m in trial.markers.items()
    }
    return Trial(
        trial_id=trial.trial_id,
        sample_rate=trial.sample_rate,
        markers=markers,
        grf_left=trial.grf_left,
        grf_right=trial.grf_right,
        coordinate_frame=CoordinateFrame(progression=(0, 1), vertical=(2, 1)),
    )


def fill_gaps(
    traj: MarkerTrajectory, max_gap_frames: int
) -> tuple[MarkerTrajectory, list]:
    """Linearly interpolate interior gaps up to ``max_gap_frames`` long.

    Returns the filled trajectory plus a list of (start, length) spans
    left unfilled: runs longer than the limit and any gap touching the
    first or last frame, which has no bracketing samples.
    """
    if max_gap_frames < 0:
        raise ConfigError(f"max_gap_frames must be >= 0, got {max_gap_frames}")
    gaps = traj.gap_mask
    if not gaps.any():
        return traj, []
    samples = traj.samples.copy()
    n = samples.shape[0]
    unfilled = []
    run_starts = np.flatnonzero(gaps & ~np.roll(gaps, 1))
    if gaps[0]:
        run_starts = np.concatenate(([0], run_starts[run_starts != 0]))
    for start in run_starts:
        end = start
        while end + 1 < n and gaps[end + 1]:
            end += 1
        length = end - start + 1
        if start == 0 or end == n - 1 or length > max_gap_frames:
            unfilled.append((int(start), int(length)))
            continue
        inside = np.arange(start, end + 1, dtype=np.float64)
        for axis in range(3):
            samples[start : end + 1, axis] = np.interp(
                inside,
                [start - 1.0, end + 1.0],
                [samples[start - 1, axis], samples[end + 1, axis]],
            )
    return MarkerTrajectory(traj.name, samples), unfilled


_EVENTS_HEADER = ["side", "kind", "frame", "time_s", "source"]


def write_events(events: Sequence[GaitEvent], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_EVENTS_HEADER)
        for event in events:
            writer.writerow(
                [event.side, event.kind, event.frame, repr(event.time), event.source]
            )


def load_events(path) -> list:
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise TrialFormatError(f"cannot read events file: {exc}") from exc
    rows = list(csv.reader(raw.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != _EVENTS_HEADER:
        raise TrialFormatError(
            f"{path}: events header must be {','.join(_EVENTS_HEADER)}"
        )
    events = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(_EVENTS_HEADER):
            raise TrialFormatError(
                f"{path}: line {i}: expected {len(_EVENTS_HEADER)} fields, got {len(row)}"
            )
        side, kind, frame_text, time_text, source = [c.strip() for c in row]
        try:
            frame = int(frame_text)
            time = float(time_text)
        except ValueError:
            raise TrialFormatError(
                f"{path}: line {i}: frame/time must be numeric"
            ) from None
        try:
            events.append(
                GaitEvent(time=time, frame=frame, side=side, kind=kind, source=source)
            )
        except TrialFormatError as exc:
            raise TrialFormatError(f"{path}: line {i}: {exc}") from None
    return events
