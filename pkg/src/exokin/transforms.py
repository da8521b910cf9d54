"""Rotation and rigid-transform primitives.

Transforms are stored as a (rotation, translation) pair; the constant
bottom row of the 4x4 homogeneous form is never materialized except by
:meth:`Transform.as_matrix`, which exists for interop and test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORTHONORMAL_TOL = 1e-9
UNIT_AXIS_TOL = 1e-9

_I3 = np.eye(3)
_I3.setflags(write=False)


def _frozen(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def skew(a) -> np.ndarray:
    """Return the antisymmetric matrix ``K`` with ``K @ b == cross(a, b)``."""
    x, y, z = np.asarray(a, dtype=float).reshape(3)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise ValueError(f"skew() requires a finite vector, got {a!r}")
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew` for the antisymmetric part of ``m``."""
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def rodrigues(axis, angle: float) -> np.ndarray:
    """Rotation by ``angle`` radians about the unit vector ``axis``.

    Evaluates ``I + K sin(angle) + K^2 (1 - cos(angle))`` with ``K = skew(axis)``.
    Raises ``ValueError`` when ``axis`` is not unit length within 1e-9.
    """
    axis = np.asarray(axis, dtype=float).reshape(3)
    norm = math.sqrt(float(axis @ axis))
    if abs(norm - 1.0) > UNIT_AXIS_TOL:
        raise ValueError(f"rotation axis must be unit length, got norm {norm!r}")
    k = skew(axis)
    return _I3 + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def is_rotation(r, tol: float = ORTHONORMAL_TOL) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        return False
    return bool(
        np.max(np.abs(r.T @ r - _I3)) <= tol and abs(np.linalg.det(r) - 1.0) <= tol
    )


def check_rotation(r, tol: float = ORTHONORMAL_TOL) -> np.ndarray:
    """Return ``r`` as a float array, raising ``ValueError`` if it is not in SO(3)."""
    r = np.asarray(r, dtype=float)
    if not is_rotation(r, tol):
        raise ValueError(f"not a proper rotation matrix (tol {tol}):\n{r}")
    return r


def rotation_log(r) -> np.ndarray:
    """Rotation vector ``axis * angle`` with ``angle`` in ``[0, pi]``.

    Near ``angle == pi`` the axis is recovered from the largest diagonal
    entry of ``(R + R^T) / 2``; at exactly ``pi`` the sign is chosen so the
    first nonzero component is positive.
    """
    r = np.asarray(r, dtype=float)
    w = vee(r)
    s = math.sqrt(float(w @ w))
    c = 0.5 * (float(np.trace(r)) - 1.0)
    angle = math.atan2(s, c)
    if c > -0.99:
        # angle < ~172 deg: the antisymmetric part is well conditioned
        return w * (angle / s) if s > 0.0 else np.zeros(3)

    # aa^T = (sym(R) - cos I) / (1 - cos)
    outer = (0.5 * (r + r.T) - c * _I3) / (1.0 - c)
    i = int(np.argmax(np.diag(outer)))
    axis = outer[:, i] / math.sqrt(max(outer[i, i], 0.0))
    axis /= np.linalg.norm(axis)
    if s > 1e-12:
        if float(axis @ w) < 0.0:
            axis = -axis
    else:
        nz = np.flatnonzero(np.abs(axis) > 1e-12)
        if nz.size and axis[nz[0]] < 0.0:
            axis = -axis
    return axis * angle


def rotvec_to_matrix(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    angle = float(np.linalg.norm(v))
    if angle == 0.0:
        return _I3.copy()
    return rodrigues(v / angle, angle)


@dataclass(frozen=True, eq=False)
class Transform:
    """Rigid transform ``x -> rotation @ x + translation`` (meters)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _frozen(self.rotation, (3, 3)))
        object.__setattr__(self, "translation", _frozen(self.translation, (3,)))

    @classmethod
    def identity(cls) -> "Transform":
        return cls(_I3, np.zeros(3))

    @classmethod
    def from_translation(cls, p) -> "Transform":
        return cls(_I3, p)

    @classmethod
    def from_matrix(cls, m) -> "Transform":
        """Build from a 4x4 homogeneous matrix, validating every invariant."""
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
        if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], rtol=0.0, atol=1e-12):
            raise ValueError(f"bottom row must be (0, 0, 0, 1), got {m[3]}")
        return cls(check_rotation(m[:3, :3]), m[:3, 3])

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def is_valid(self, tol: float = ORTHONORMAL_TOL) -> bool:
        return is_rotation(self.rotation, tol) and bool(
            np.all(np.isfinite(self.translation))
        )

    def __matmul__(self, other: "Transform") -> "Transform":
        return compose(self, other)

    def allclose(self, other: "Transform", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, rtol=0.0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0.0, atol=atol)
        )

    def __repr__(self):
        return (
            f"Transform(rotation={self.rotation.tolist()}, "
            f"translation={self.translation.tolist()})"
        )


def compose(first: Transform, second: Transform) -> Transform:
    """Transform equal to the 4x4 product ``first @ second``."""
    r1 = first.rotation
    return Transform(r1 @ second.rotation, first.translation + r1 @ second.translation)


def invert(t: Transform) -> Transform:
    rt = t.rotation.T
    return Transform(rt, -(rt @ t.translation))
