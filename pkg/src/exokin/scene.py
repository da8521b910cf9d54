"""Machine-readable exports: line-segment scenes and IK comparison tables.

Scenes are centimeters in the world frame; all computation upstream is in
meters.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from .gait import GaitTrajectory, expand_to_configuration
from .tree import SIDES, FramePoses, JointId, KinematicTree, Slot, forward_kinematics

SCHEMA_VERSION = 1
M_TO_CM = 100.0

COMPARISON_JOINTS = ("hip", "knee", "ankle")
COMPARISON_HEADER = ["phase"] + [
    f"{side}_{joint}_{kind}"
    for side in ("R", "L")
    for joint in COMPARISON_JOINTS
    for kind in ("meas", "ik")
]


@lru_cache(maxsize=1)
def scene_schema() -> dict:
    text = resources.files("exokin.data").joinpath("scene.schema.json").read_text("utf-8")
    return json.loads(text)


def validate_scene(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` breaks the scene schema."""
    jsonschema.validate(doc, scene_schema())


def _cm(p) -> list[float]:
    return [float(v) * M_TO_CM for v in p]


def _segment(start, end, label) -> dict:
    return {"from": _cm(start), "to": _cm(end), "label": label}


def scene_from_poses(poses: FramePoses, phase: float) -> dict:
    """One scene frame: pelvis bar, thighs, shanks and feet, plus joint markers."""

    def at(side, slot):
        return poses[JointId(side, slot)].translation

    segments = [
        _segment(at(SIDES[0], Slot.HIP_FLEXION), at(SIDES[1], Slot.HIP_FLEXION), "pelvis")
    ]
    for side in SIDES:
        s = side.short
        segments += [
            _segment(at(side, Slot.HIP_ROTATION), at(side, Slot.KNEE_FLEXION), f"{s}_thigh"),
            _segment(at(side, Slot.KNEE_FLEXION), at(side, Slot.ANKLE_FLEXION), f"{s}_shank"),
            _segment(at(side, Slot.ANKLE_ABDUCTION), poses.feet[side].translation, f"{s}_foot"),
        ]
    markers = [{"at": _cm(t.translation), "label": jid.label} for jid, t in poses.joints.items()]
    return {"phase": float(phase), "segments": segments, "markers": markers}


def scene_document(frames: list[dict]) -> dict:
    return {"schemaVersion": SCHEMA_VERSION, "frames": list(frames)}


def emit_scene_sequence(tree: KinematicTree, traj: GaitTrajectory, n: int) -> dict:
    """Scene document with ``n`` frames at phases ``k / n``."""
    if int(n) < 1:
        raise ValueError(f"frame count must be >= 1, got {n}")
    n = int(n)
    frames = []
    for k in range(n):
        phase = k / n
        q = expand_to_configuration(traj, phase, tree)
        frames.append(scene_from_poses(forward_kinematics(tree, q), phase))
    return scene_document(frames)


def dumps_scene(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


@dataclass(frozen=True, eq=False)
class ComparisonSeries:
    """Measured vs IK-recovered sagittal angles (degrees).

    ``measured`` and ``recovered`` are (n, 6) with columns R hip, R knee,
    R ankle, L hip, L knee, L ankle.
    """

    phases: np.ndarray
    measured: np.ndarray
    recovered: np.ndarray

    def __post_init__(self):
        for name in ("phases", "measured", "recovered"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    def check(self) -> None:
        n = self.phases.shape[0] if self.phases.ndim == 1 else -1
        if n < 0:
            raise ValueError("phases must be one-dimensional")
        for name in ("measured", "recovered"):
            arr = getattr(self, name)
            if n == 0 and arr.size == 0:
                continue
            if arr.shape != (n, 6):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n}, 6)")

    @property
    def deviation(self) -> np.ndarray:
        return self.recovered - self.measured


def emit_comparison_csv(series: ComparisonSeries) -> str:
    series.check()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COMPARISON_HEADER)
    for i, phase in enumerate(series.phases):
        row = [f"{phase:.6g}"]
        for j in range(6):
            row += [f"{series.measured[i, j]:.6g}", f"{series.recovered[i, j]:.6g}"]
        writer.writerow(row)
    return out.getvalue()


def parse_comparison_csv(text: str) -> ComparisonSeries:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != COMPARISON_HEADER:
        raise ValueError("comparison CSV header does not match the expected columns")
    body = [r for r in rows[1:] if r]
    if not body:
        return ComparisonSeries(np.zeros(0), np.zeros((0, 6)), np.zeros((0, 6)))
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(COMPARISON_HEADER):
            raise ValueError(f"expected 13 columns, got {len(r)} at line {lineno}")
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"non-numeric cell in comparison CSV: {exc}") from None
    return ComparisonSeries(data[:, 0], data[:, 1::2], data[:, 2::2])
