"""Iterative numerical inverse kinematics for one leg.

Each iteration runs forward kinematics from the current angles, compares
the foot frame with the target, and applies a damped least-squares
correction ``dq = J^T (J J^T + lambda^2 I)^-1 e`` on the 6x6 geometric
Jacobian, clamped to the joint limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .transforms import Transform, rotation_log
from .tree import KinematicTree, Side, chain_poses


class IkStatus(str, Enum):
    CONVERGED = "converged"
    LIMIT_CLAMPED_CONVERGED = "limit_clamped_converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGED = "diverged"

    @property
    def converged(self) -> bool:
        return self in (IkStatus.CONVERGED, IkStatus.LIMIT_CLAMPED_CONVERGED)


@dataclass(frozen=True)
class IkConfig:
    max_iterations: int = 200
    position_tolerance: float = 1e-8
    orientation_tolerance: float = 1e-8
    damping: float = 1e-3
    step_scale: float = 1.0
    fd_step: float = 1e-6
    # "dls" (damped least squares) or "transpose" (Jacobian transpose)
    method: str = "dls"
    # "geometric" (analytic columns) or "finite_difference"
    jacobian: str = "geometric"
    divergence_window: int = 10

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.position_tolerance > 0 and self.orientation_tolerance > 0):
            raise ValueError("tolerances must be > 0")
        if not self.damping >= 0:
            raise ValueError("damping must be >= 0")
        if not 0 < self.step_scale <= 1:
            raise ValueError("step_scale must lie in (0, 1]")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be > 0")
        if self.method not in ("dls", "transpose"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.jacobian not in ("geometric", "finite_difference"):
            raise ValueError(f"unknown jacobian mode {self.jacobian!r}")
        if int(self.divergence_window) < 1:
            raise ValueError("divergence_window must be >= 1")


class PoseError(NamedTuple):
    """Target minus current; orientation as a world-frame rotation vector."""

    position: np.ndarray
    orientation: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.orientation])

    @property
    def position_norm(self) -> float:
        return float(np.linalg.norm(self.position))

    @property
    def orientation_norm(self) -> float:
        return float(np.linalg.norm(self.orientation))


@dataclass(frozen=True, eq=False)
class IkResult:
    angles: np.ndarray
    iterations: int
    error: PoseError
    status: IkStatus

    @property
    def converged(self) -> bool:
        return self.status.converged

    def __str__(self):
        deg = ", ".join(f"{v:.6f}" for v in np.degrees(self.angles))
        return (
            f"status: {self.status.value}\n"
            f"iterations: {self.iterations}\n"
            f"angles_deg: [{deg}]\n"
            f"position_error_m: {self.error.position_norm:.3e}\n"
            f"orientation_error_rad: {self.error.orientation_norm:.3e}"
        )


def pose_error(current: Transform, target: Transform) -> PoseError:
    rc = current.rotation
    return PoseError(
        target.translation - current.translation,
        rc @ rotation_log(rc.T @ target.rotation),
    )


def geometric_jacobian(tree: KinematicTree, side, q6) -> np.ndarray:
    """6x6 Jacobian of the foot frame, world frame, linear rows first.

    Column k is ``(z_k x (p_foot - p_k), z_k)``.
    """
    frames, foot = chain_poses(tree, side, q6)
    p_foot = foot.translation
    jac = np.empty((6, 6))
    for k, (spec, frame) in enumerate(zip(tree.chain(side), frames)):
        z = frame.rotation @ spec.axis
        jac[:3, k] = np.cross(z, p_foot - frame.translation)
        jac[3:, k] = z
    return jac


def finite_difference_jacobian(tree: KinematicTree, side, q6, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the foot pose (orientation rows via log increments)."""
    q6 = np.asarray(q6, dtype=float)
    jac = np.empty((6, 6))
    for k in range(6):
        dq = np.zeros(6)
        dq[k] = h
        plus = chain_poses(tree, side, q6 + dq)[1]
        minus = chain_poses(tree, side, q6 - dq)[1]
        jac[:3, k] = (plus.translation - minus.translation) / (2 * h)
        jac[3:, k] = rotation_log(plus.rotation @ minus.rotation.T) / (2 * h)
    return jac


def _clamp(q, lo, hi):
    return np.minimum(np.maximum(q, lo), hi)


def _check_finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    return arr


def solve_ik(
    tree: KinematicTree,
    side,
    target: Transform,
    q0,
    config: IkConfig | None = None,
    callback=None,
) -> IkResult:
    """Solve for the six angles of ``side`` that place its foot frame at ``target``.

    Non-convergence is reported through ``IkResult.status``; only
    non-finite inputs raise.  ``callback(iteration, angles, error)`` is
    called for every evaluated iterate, the seed included.
    """
    config = config or IkConfig()
    side = Side.parse(side)
    q = _check_finite("q0", q0).reshape(-1)
    if q.shape != (6,):
        raise ValueError(f"q0 must hold 6 angles, got {q.size}")
    _check_finite("target rotation", target.rotation)
    _check_finite("target translation", target.translation)

    lo, hi = tree.limits(side)
    q = _clamp(q, lo, hi)
    eye6 = np.eye(6)
    lam2 = config.damping**2
    prev_norm = math.inf
    increases = 0

    it = 0
    while True:
        err = pose_error(chain_poses(tree, side, q)[1], target)
        if callback is not None:
            callback(it, q, err)
        if (
            err.position_norm <= config.position_tolerance
            and err.orientation_norm <= config.orientation_tolerance
        ):
            on_bound = bool(np.any(q == lo) or np.any(q == hi))
            status = IkStatus.LIMIT_CLAMPED_CONVERGED if on_bound else IkStatus.CONVERGED
            return IkResult(q, it, err, status)
        if it >= config.max_iterations:
            return IkResult(q, it, err, IkStatus.MAX_ITERATIONS)

        norm = float(np.linalg.norm(err.vector))
        increases = increases + 1 if norm > prev_norm else 0
        prev_norm = norm
        if increases >= config.divergence_window:
            return IkResult(q, it, err, IkStatus.DIVERGED)

        if config.jacobian == "geometric":
            jac = geometric_jacobian(tree, side, q)
        else:
            jac = finite_difference_jacobian(tree, side, q, config.fd_step)
        e = err.vector
        if config.method == "dls":
            dq = jac.T @ np.linalg.solve(jac @ jac.T + lam2 * eye6, e)
        else:
            je = jac @ (jac.T @ e)
            denom = float(je @ je)
            dq = (float(e @ je) / denom) * (jac.T @ e) if denom > 0 else np.zeros(6)

        q_next = _clamp(q + config.step_scale * dq, lo, hi)
        if not np.all(np.isfinite(q_next)):
            return IkResult(q, it, err, IkStatus.DIVERGED)
        q = q_next
        it += 1
