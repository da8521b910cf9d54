"""12-DOF exoskeleton model and forward kinematics.

The waist is the base; each leg is a serial chain of six revolute joints
(hip flexion, hip abduction, hip rotation, knee flexion, ankle flexion,
ankle abduction) ending in a fixed foot frame at the sole.

World frame: x forward, y to the left, z up, origin on the ground midway
between the feet in the zero configuration.  Joint axes carry the clinical
sign conventions, so a positive angle always means flexion, abduction,
internal rotation or dorsiflexion on either side.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

from .transforms import Transform, check_rotation, rodrigues, skew

_I3 = np.eye(3)


class Side(str, Enum):
    RIGHT = "right"
    LEFT = "left"

    @property
    def short(self) -> str:
        return "R" if self is Side.RIGHT else "L"

    @property
    def other(self) -> "Side":
        return Side.LEFT if self is Side.RIGHT else Side.RIGHT

    @classmethod
    def parse(cls, value) -> "Side":
        if isinstance(value, Side):
            return value
        key = str(value).strip().lower()
        if key in ("r", "right"):
            return cls.RIGHT
        if key in ("l", "left"):
            return cls.LEFT
        raise ValueError(f"unknown side {value!r}; expected L/R/left/right")


class Slot(str, Enum):
    HIP_FLEXION = "hip_flexion"
    HIP_ABDUCTION = "hip_abduction"
    HIP_ROTATION = "hip_rotation"
    KNEE_FLEXION = "knee_flexion"
    ANKLE_FLEXION = "ankle_flexion"
    ANKLE_ABDUCTION = "ankle_abduction"


SLOTS = tuple(Slot)
SIDES = (Side.RIGHT, Side.LEFT)


class JointId(NamedTuple):
    side: Side
    slot: Slot

    @property
    def label(self) -> str:
        return f"{self.side.short}_{self.slot.value}"


# Configuration vector layout: right leg hip->ankle, then left leg.
JOINT_IDS = tuple(JointId(side, slot) for side in SIDES for slot in SLOTS)
_INDEX = {jid: i for i, jid in enumerate(JOINT_IDS)}

_MIRROR = np.diag([1.0, -1.0, 1.0])


def mirror_point(p) -> np.ndarray:
    """Reflect a point across the sagittal (x-z) plane."""
    return _MIRROR @ np.asarray(p, dtype=float)


def mirror_axis(a) -> np.ndarray:
    """Reflect a rotation axis; axes are pseudovectors, hence the sign flip."""
    return -(_MIRROR @ np.asarray(a, dtype=float))


def mirror_transform(t: Transform) -> Transform:
    return Transform(_MIRROR @ t.rotation @ _MIRROR, _MIRROR @ t.translation)


@dataclass(frozen=True, eq=False)
class JointSpec:
    """One revolute joint: unit ``axis`` in its local frame, ``offset`` of its
    origin in the parent frame (meters) and ``limits`` (radians)."""

    id: JointId
    axis: np.ndarray
    offset: np.ndarray
    limits: tuple[float, float]

    def __post_init__(self):
        axis = np.array(self.axis, dtype=float).reshape(3)
        offset = np.array(self.offset, dtype=float).reshape(3)
        if not np.all(np.isfinite(axis)) or abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError(f"{self.id.label}: axis must be unit length, got {axis}")
        if not np.all(np.isfinite(offset)):
            raise ValueError(f"{self.id.label}: offset must be finite, got {offset}")
        lo, hi = (float(v) for v in self.limits)
        if not lo < hi:
            raise ValueError(f"{self.id.label}: limits need min < max, got {(lo, hi)}")
        axis.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "limits", (lo, hi))
        k = skew(axis)
        object.__setattr__(self, "_k", k)
        object.__setattr__(self, "_k2", k @ k)

    def rotation(self, q: float) -> np.ndarray:
        """``rodrigues(self.axis, q)`` with the skew products precomputed."""
        return _I3 + math.sin(q) * self._k + (1.0 - math.cos(q)) * self._k2


@dataclass(frozen=True, eq=False)
class KinematicTree:
    name: str
    base_pose: Transform
    right_chain: tuple[JointSpec, ...]
    left_chain: tuple[JointSpec, ...]
    right_foot_offset: np.ndarray
    left_foot_offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "right_chain", tuple(self.right_chain))
        object.__setattr__(self, "left_chain", tuple(self.left_chain))
        for attr in ("right_foot_offset", "left_foot_offset"):
            v = np.array(getattr(self, attr), dtype=float).reshape(3)
            v.setflags(write=False)
            object.__setattr__(self, attr, v)
        for side in SIDES:
            chain = self.chain(side)
            ids = tuple(spec.id for spec in chain)
            expected = tuple(JointId(side, slot) for slot in SLOTS)
            if ids != expected:
                raise ValueError(
                    f"{side.value} chain must be ordered {[j.label for j in expected]}, "
                    f"got {[j.label for j in ids]}"
                )
        self._check_mirror()

    def _check_mirror(self, tol: float = 1e-12):
        pairs = list(zip(self.right_chain, self.left_chain))
        for right, left in pairs:
            if not np.allclose(mirror_point(right.offset), left.offset, rtol=0, atol=tol):
                raise ValueError(f"offsets of {right.id.slot.value} are not sagittal mirrors")
            if not np.allclose(mirror_axis(right.axis), left.axis, rtol=0, atol=tol):
                raise ValueError(f"axes of {right.id.slot.value} are not sagittal mirrors")
            if right.limits != left.limits:
                raise ValueError(f"limits of {right.id.slot.value} differ between sides")
        if not np.allclose(
            mirror_point(self.right_foot_offset), self.left_foot_offset, rtol=0, atol=tol
        ):
            raise ValueError("foot offsets are not sagittal mirrors")

    def chain(self, side) -> tuple[JointSpec, ...]:
        return self.right_chain if Side.parse(side) is Side.RIGHT else self.left_chain

    def foot_offset(self, side) -> np.ndarray:
        return self.right_foot_offset if Side.parse(side) is Side.RIGHT else self.left_foot_offset

    @property
    def joints(self) -> tuple[JointSpec, ...]:
        return self.right_chain + self.left_chain

    def limits(self, side=None) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper bounds for all 12 joints, or the 6 of one side."""
        specs = self.joints if side is None else self.chain(side)
        lo = np.array([s.limits[0] for s in specs])
        hi = np.array([s.limits[1] for s in specs])
        return lo, hi

    def with_base_pose(self, base_pose: Transform) -> "KinematicTree":
        return KinematicTree(
            self.name, base_pose, self.right_chain, self.left_chain,
            self.right_foot_offset, self.left_foot_offset,
        )


@dataclass(frozen=True, eq=False)
class JointConfiguration:
    """Twelve joint angles in radians, ordered as :data:`JOINT_IDS`."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=float).reshape(-1)
        if a.shape != (12,):
            raise ValueError(f"a configuration needs 12 angles, got {a.size}")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @classmethod
    def zeros(cls) -> "JointConfiguration":
        return cls(np.zeros(12))

    @classmethod
    def from_degrees(cls, degrees) -> "JointConfiguration":
        return cls(np.radians(np.asarray(degrees, dtype=float)))

    @classmethod
    def from_sides(cls, right, left) -> "JointConfiguration":
        return cls(np.concatenate([np.asarray(right, float), np.asarray(left, float)]))

    def __getitem__(self, jid: JointId) -> float:
        return float(self.angles[_INDEX[jid]])

    def side(self, side) -> np.ndarray:
        return self.angles[:6] if Side.parse(side) is Side.RIGHT else self.angles[6:]

    def with_side(self, side, values) -> "JointConfiguration":
        a = self.angles.copy()
        if Side.parse(side) is Side.RIGHT:
            a[:6] = values
        else:
            a[6:] = values
        return JointConfiguration(a)

    def mirror(self) -> "JointConfiguration":
        """Swap the legs; with mirrored axes this reflects the whole pose."""
        return JointConfiguration.from_sides(self.angles[6:], self.angles[:6])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.angles)))


@dataclass(frozen=True, eq=False)
class FramePoses:
    """World poses of the base, every joint frame and both foot frames."""

    base: Transform
    joints: Mapping[JointId, Transform]
    feet: Mapping[Side, Transform] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "joints", MappingProxyType(dict(self.joints)))
        object.__setattr__(self, "feet", MappingProxyType(dict(self.feet)))

    def __getitem__(self, jid: JointId) -> Transform:
        return self.joints[jid]

    def chain(self, side) -> list[Transform]:
        side = Side.parse(side)
        return [self.joints[JointId(side, slot)] for slot in SLOTS]

    def all_transforms(self):
        yield self.base
        yield from self.joints.values()
        yield from self.feet.values()


class LimitViolation(NamedTuple):
    joint: JointId
    angle: float
    bound: float
    excess: float


class JointLimitError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        detail = ", ".join(
            f"{v.joint.label}={math.degrees(v.angle):.3f} deg "
            f"(bound {math.degrees(v.bound):.3f}, excess {math.degrees(v.excess):.3f})"
            for v in self.violations
        )
        super().__init__(f"joint limits violated: {detail}")


DEFAULT_LIMITS = {
    Slot.HIP_FLEXION: (-0.52, 2.09),
    Slot.HIP_ABDUCTION: (-0.35, 0.52),
    Slot.HIP_ROTATION: (-0.52, 0.52),
    Slot.KNEE_FLEXION: (0.0, 2.40),
    Slot.ANKLE_FLEXION: (-0.87, 0.52),
    Slot.ANKLE_ABDUCTION: (-0.35, 0.35),
}

# Right-leg axes; the left leg uses mirror_axis() of these.
#   flexion -y: thigh swings forward (+x)
#   abduction -x: foot moves laterally (-y)
#   rotation +z: toes turn medially (+y)
#   knee +y: shank swings backward
#   ankle flexion -y: toes up
_RIGHT_AXES = {
    Slot.HIP_FLEXION: (0.0, -1.0, 0.0),
    Slot.HIP_ABDUCTION: (-1.0, 0.0, 0.0),
    Slot.HIP_ROTATION: (0.0, 0.0, 1.0),
    Slot.KNEE_FLEXION: (0.0, 1.0, 0.0),
    Slot.ANKLE_FLEXION: (0.0, -1.0, 0.0),
    Slot.ANKLE_ABDUCTION: (-1.0, 0.0, 0.0),
}


def build_default_exoskeleton(
    pelvis_half_width: float = 0.12,
    thigh: float = 0.40,
    shank: float = 0.40,
    sole: float = 0.08,
    limits: Mapping[Slot, tuple[float, float]] | None = None,
    name: str = "default-exoskeleton",
) -> KinematicTree:
    """Default anthropometry: legs vertical at zero, feet on the ground (z=0)."""
    limits = {**DEFAULT_LIMITS, **(limits or {})}
    right_offsets = {
        Slot.HIP_FLEXION: (0.0, -pelvis_half_width, 0.0),
        Slot.HIP_ABDUCTION: (0.0, 0.0, 0.0),
        Slot.HIP_ROTATION: (0.0, 0.0, 0.0),
        Slot.KNEE_FLEXION: (0.0, 0.0, -thigh),
        Slot.ANKLE_FLEXION: (0.0, 0.0, -shank),
        Slot.ANKLE_ABDUCTION: (0.0, 0.0, 0.0),
    }
    chains = {}
    for side in SIDES:
        specs = []
        for slot in SLOTS:
            axis = np.array(_RIGHT_AXES[slot])
            offset = np.array(right_offsets[slot])
            if side is Side.LEFT:
                axis, offset = mirror_axis(axis), mirror_point(offset)
            specs.append(JointSpec(JointId(side, slot), axis, offset, limits[slot]))
        chains[side] = tuple(specs)
    foot = np.array([0.0, 0.0, -sole])
    base = Transform.from_translation([0.0, 0.0, thigh + shank + sole])
    return KinematicTree(
        name, base, chains[Side.RIGHT], chains[Side.LEFT], foot, mirror_point(foot)
    )


def local_transform(spec: JointSpec, q: float) -> Transform:
    """Parent-to-joint transform: rotation about ``spec.axis`` by ``q``, origin at ``spec.offset``."""
    return Transform(rodrigues(spec.axis, q), spec.offset)


def _as_configuration(q) -> JointConfiguration:
    return q if isinstance(q, JointConfiguration) else JointConfiguration(q)


def chain_poses(tree: KinematicTree, side, q6) -> tuple[list[Transform], Transform]:
    """World poses of one leg's six joint frames and its foot frame."""
    side = Side.parse(side)
    r, p = tree.base_pose.rotation, tree.base_pose.translation
    frames = []
    for spec, q in zip(tree.chain(side), q6):
        # p_j = p_i + R_i b_j ; R_j = R_i exp(a_j q_j)
        p = p + r @ spec.offset
        r = r @ spec.rotation(float(q))
        frames.append(Transform(r, p))
    foot = Transform(r, p + r @ tree.foot_offset(side))
    return frames, foot


def forward_kinematics(tree: KinematicTree, q) -> FramePoses:
    q = _as_configuration(q)
    joints, feet = {}, {}
    for side in SIDES:
        frames, foot = chain_poses(tree, side, q.side(side))
        for slot, pose in zip(SLOTS, frames):
            joints[JointId(side, slot)] = pose
        feet[side] = foot
    return FramePoses(tree.base_pose, joints, feet)


def foot_pose(tree: KinematicTree, q, side) -> Transform:
    """World pose of one foot frame; accepts a full configuration or 6 leg angles."""
    side = Side.parse(side)
    angles = np.asarray(q.angles if isinstance(q, JointConfiguration) else q, dtype=float)
    q6 = angles if angles.size == 6 else JointConfiguration(angles).side(side)
    return chain_poses(tree, side, q6)[1]


def validate_limits(tree: KinematicTree, q) -> list[LimitViolation]:
    q = _as_configuration(q)
    out = []
    for spec, angle in zip(tree.joints, q.angles):
        lo, hi = spec.limits
        if angle < lo:
            out.append(LimitViolation(spec.id, float(angle), lo, lo - float(angle)))
        elif angle > hi:
            out.append(LimitViolation(spec.id, float(angle), hi, float(angle) - hi))
    return out


# -- JSON ------------------------------------------------------------------

TREE_FORMAT_VERSION = 1


def tree_to_dict(tree: KinematicTree) -> dict:
    return {
        "formatVersion": TREE_FORMAT_VERSION,
        "name": tree.name,
        "units": {"length": "m", "angle": "rad"},
        "basePose": {
            "rotation": tree.base_pose.rotation.tolist(),
            "translation": tree.base_pose.translation.tolist(),
        },
        "joints": [
            {
                "side": spec.id.side.value,
                "slot": spec.id.slot.value,
                "axis": spec.axis.tolist(),
                "offset": spec.offset.tolist(),
                "limits": list(spec.limits),
            }
            for spec in tree.joints
        ],
        "footOffset": {
            "right": tree.right_foot_offset.tolist(),
            "left": tree.left_foot_offset.tolist(),
        },
    }


def tree_from_dict(doc: Mapping) -> KinematicTree:
    try:
        units = doc.get("units", {"length": "m", "angle": "rad"})
        if units != {"length": "m", "angle": "rad"}:
            raise ValueError(f"unsupported units {units}; tree files use m and rad")
        base = doc["basePose"]
        base_pose = Transform(check_rotation(base["rotation"]), base["translation"])
        chains = {Side.RIGHT: [], Side.LEFT: []}
        for entry in doc["joints"]:
            jid = JointId(Side(entry["side"]), Slot(entry["slot"]))
            chains[jid.side].append(
                JointSpec(jid, entry["axis"], entry["offset"], tuple(entry["limits"]))
            )
        feet = doc["footOffset"]
        return KinematicTree(
            str(doc.get("name", "")), base_pose,
            chains[Side.RIGHT], chains[Side.LEFT], feet["right"], feet["left"],
        )
    except KeyError as exc:
        raise ValueError(f"tree document is missing field {exc.args[0]!r}") from None


def dumps_tree(tree: KinematicTree) -> str:
    return json.dumps(tree_to_dict(tree), indent=2) + "\n"


def loads_tree(text: str) -> KinematicTree:
    return tree_from_dict(json.loads(text))


def load_tree(path) -> KinematicTree:
    return loads_tree(Path(path).read_text(encoding="utf-8"))
