"""Gait-cycle joint trajectories: CSV I/O, periodic interpolation and
expansion of sagittal curves into full 12-joint configurations."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .tree import (
    JointConfiguration,
    JointLimitError,
    KinematicTree,
    Slot,
    SLOTS,
    build_default_exoskeleton,
    validate_limits,
)

GAIT_COLUMNS = ("phase", "hip_flexion_deg", "knee_flexion_deg", "ankle_flexion_deg")
MIN_SAMPLES = 4
DEFAULT_DATASET = "normal_gait.csv"

_SAGITTAL_SLOTS = (Slot.HIP_FLEXION, Slot.KNEE_FLEXION, Slot.ANKLE_FLEXION)


class GaitParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"{message} at line {line}")


class GaitSample(NamedTuple):
    phase: float
    hip_flexion: float
    knee_flexion: float
    ankle_flexion: float


@dataclass(frozen=True, eq=False)
class GaitTrajectory:
    """One periodic gait cycle; ``angles`` columns are hip, knee, ankle (degrees)."""

    phases: np.ndarray
    angles: np.ndarray
    source_label: str = ""

    def __post_init__(self):
        phases = np.array(self.phases, dtype=float).reshape(-1)
        angles = np.array(self.angles, dtype=float).reshape(-1, 3)
        if phases.size != angles.shape[0]:
            raise ValueError("phases and angles differ in length")
        if phases.size < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {phases.size}")
        if not (np.all(np.isfinite(phases)) and np.all(np.isfinite(angles))):
            raise ValueError("gait samples must be finite")
        if phases[0] < 0.0 or phases[-1] >= 1.0:
            raise ValueError("phases must lie in [0, 1)")
        if np.any(np.diff(phases) <= 0.0):
            raise ValueError("phases must be strictly increasing")
        phases.setflags(write=False)
        angles.setflags(write=False)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "angles", angles)

    def __len__(self):
        return self.phases.size

    @property
    def samples(self) -> list[GaitSample]:
        return [GaitSample(float(p), *map(float, a)) for p, a in zip(self.phases, self.angles)]

    def sample(self, phase, method: str = "catmull-rom") -> np.ndarray:
        return sample(self, phase, method)


def parse_gait_csv(text: str, source_label: str = "") -> GaitTrajectory:
    """Parse the gait CSV format.

    Lines starting with ``#`` and blank lines are ignored.  A final row at
    phase 1.0 is the periodic copy of phase 0 and is dropped.
    """
    header_seen = False
    rows: list[tuple[float, float, float, float]] = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        last_line = lineno
        cells = [c.strip() for c in next(csv.reader([line]))]
        if not header_seen:
            if tuple(cells) != GAIT_COLUMNS:
                raise GaitParseError(
                    f"malformed header {line!r}, expected {','.join(GAIT_COLUMNS)!r}", lineno
                )
            header_seen = True
            continue
        if len(cells) != len(GAIT_COLUMNS):
            raise GaitParseError(
                f"expected {len(GAIT_COLUMNS)} columns, got {len(cells)}", lineno
            )
        values = []
        for name, cell in zip(GAIT_COLUMNS, cells):
            try:
                v = float(cell)
            except ValueError:
                raise GaitParseError(
                    f"non-numeric value {cell!r} in column {name!r}", lineno
                ) from None
            if not math.isfinite(v):
                raise GaitParseError(f"non-finite value {cell!r} in column {name!r}", lineno)
            values.append(v)
        phase = values[0]
        if rows and phase == rows[-1][0]:
            raise GaitParseError(f"duplicate phase {phase!r}", lineno)
        if rows and phase < rows[-1][0]:
            raise GaitParseError("decreasing phase", lineno)
        if not 0.0 <= phase <= 1.0:
            raise GaitParseError(f"phase {phase!r} outside [0, 1]", lineno)
        if rows and rows[-1][0] == 1.0:
            raise GaitParseError("rows after the phase 1.0 row", lineno)
        rows.append(tuple(values))

    if not header_seen:
        raise GaitParseError("missing header", max(last_line, 1))
    if rows and rows[-1][0] == 1.0:
        rows.pop()
    if len(rows) < MIN_SAMPLES:
        raise GaitParseError(
            f"expected at least {MIN_SAMPLES} samples, got {len(rows)}", last_line
        )
    data = np.array(rows)
    return GaitTrajectory(data[:, 0], data[:, 1:], source_label)


def format_gait_csv(traj: GaitTrajectory) -> str:
    out = io.StringIO()
    if traj.source_label:
        out.write(f"# source: {traj.source_label}\n")
    out.write(",".join(GAIT_COLUMNS) + "\n")
    for p, (h, k, a) in zip(traj.phases, traj.angles):
        out.write(f"{p:.6g},{h:.6g},{k:.6g},{a:.6g}\n")
    return out.getvalue()


def load_gait(path=None) -> GaitTrajectory:
    """Load a gait CSV file, or the bundled dataset when ``path`` is None."""
    if path is None:
        text = resources.files("exokin.data").joinpath(DEFAULT_DATASET).read_text("utf-8")
        return parse_gait_csv(text, source_label=f"bundled:{DEFAULT_DATASET}")
    path = Path(path)
    return parse_gait_csv(path.read_text(encoding="utf-8"), source_label=str(path))


def sample(traj: GaitTrajectory, phase, method: str = "catmull-rom") -> np.ndarray:
    """Interpolated (hip, knee, ankle) degrees at ``phase`` (wrapped mod 1).

    Scalar phase gives shape (3,); an array of phases gives shape (n, 3).
    ``method`` is ``"catmull-rom"`` (periodic, C1) or ``"linear"``.
    """
    scalar = np.ndim(phase) == 0
    ph = np.mod(np.atleast_1d(np.asarray(phase, dtype=float)), 1.0)
    if not np.all(np.isfinite(ph)):
        raise ValueError("phase must be finite")

    t, y = traj.phases, traj.angles
    n = t.size
    t_ext = np.append(t, t[0] + 1.0)
    y_ext = np.vstack([y, y[:1]])
    # phases before the first knot belong to the wrap interval
    ph = np.where(ph < t[0], ph + 1.0, ph)
    i = np.clip(np.searchsorted(t_ext, ph, side="right") - 1, 0, n - 1)
    h = t_ext[i + 1] - t_ext[i]
    s = (ph - t_ext[i]) / h

    if method == "linear":
        out = y_ext[i] + s[:, None] * (y_ext[i + 1] - y_ext[i])
    elif method == "catmull-rom":
        # tangent at knot j: (y[j+1] - y[j-1]) / (t[j+1] - t[j-1]), periodic
        t_prev = np.concatenate([[t[-1] - 1.0], t[:-1]])
        t_next = np.concatenate([t[1:], [t[0] + 1.0]])
        m = (np.roll(y, -1, axis=0) - np.roll(y, 1, axis=0)) / (t_next - t_prev)[:, None]
        m_ext = np.vstack([m, m[:1]])
        s2, s3 = s * s, s * s * s
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        out = (
            h00[:, None] * y_ext[i]
            + (h10 * h)[:, None] * m_ext[i]
            + h01[:, None] * y_ext[i + 1]
            + (h11 * h)[:, None] * m_ext[i + 1]
        )
        # land exactly on knots
        exact = s == 0.0
        out[exact] = y_ext[i[exact]]
    else:
        raise ValueError(f"unknown interpolation method {method!r}")
    return out[0] if scalar else out


def leg_angles(hip_knee_ankle_deg) -> np.ndarray:
    """Six leg angles (radians) from sagittal (hip, knee, ankle) degrees."""
    q6 = np.zeros(6)
    for slot, value in zip(_SAGITTAL_SLOTS, hip_knee_ankle_deg):
        q6[SLOTS.index(slot)] = math.radians(value)
    return q6


def expand_to_configuration(
    traj: GaitTrajectory,
    phase: float,
    tree: KinematicTree | None = None,
    method: str = "catmull-rom",
) -> JointConfiguration:
    """Right leg at ``phase``, left leg half a cycle later; non-sagittal joints 0.

    Raises :class:`JointLimitError` when the result leaves the tree's limits.
    """
    tree = tree or build_default_exoskeleton()
    right = leg_angles(sample(traj, phase, method))
    left = leg_angles(sample(traj, float(phase) + 0.5, method))
    q = JointConfiguration.from_sides(right, left)
    violations = validate_limits(tree, q)
    if violations:
        raise JointLimitError(violations)
    return q


def sagittal_degrees(q6) -> np.ndarray:
    """Inverse of :func:`leg_angles` restricted to the sagittal joints."""
    q6 = np.asarray(q6, dtype=float)
    return np.degrees([q6[SLOTS.index(s)] for s in _SAGITTAL_SLOTS])

