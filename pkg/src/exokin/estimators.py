"""scikit-learn style wrappers so the kinematics compose with pipelines.

Each estimator takes plain arrays: gait phases, 12-angle configurations
(radians, :data:`exokin.tree.JOINT_IDS` order) or foot pose vectors
``(x, y, z, rx, ry, rz)`` in meters and a rotation vector in radians.

    >>> from sklearn.pipeline import make_pipeline
    >>> pipe = make_pipeline(GaitExpander(), ForwardKinematics(side="right", output="pose"),
    ...                      InverseKinematics(side="right"))
    >>> angles = pipe.fit_transform(np.linspace(0, 1, 50, endpoint=False))
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .gait import GaitTrajectory, expand_to_configuration, load_gait
from .ik import IkConfig, solve_ik
from .transforms import Transform, rotation_log, rotvec_to_matrix
from .tree import SIDES, KinematicTree, Side, build_default_exoskeleton, foot_pose, load_tree


def check_tree(tree) -> KinematicTree:
    """Accept None (default model), a path to a tree JSON file, or a tree."""
    if tree is None:
        return build_default_exoskeleton()
    if isinstance(tree, KinematicTree):
        return tree
    if isinstance(tree, (str, Path)):
        return load_tree(tree)
    raise TypeError(f"expected a KinematicTree, a path or None, got {type(tree).__name__}")


def check_gait(gait) -> GaitTrajectory:
    if gait is None or isinstance(gait, (str, Path)):
        return load_gait(gait)
    if isinstance(gait, GaitTrajectory):
        return gait
    raise TypeError(f"expected a GaitTrajectory, a path or None, got {type(gait).__name__}")


def check_sides(side) -> tuple[Side, ...]:
    if isinstance(side, str) and side.lower() == "both":
        return SIDES
    return (Side.parse(side),)


def check_phases(X) -> np.ndarray:
    X = check_array(X, ensure_2d=False, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"phases must be a column vector, got shape {X.shape}")
        X = X[:, 0]
    return X


def check_columns(X, n_columns: int, what: str) -> np.ndarray:
    X = check_array(X, dtype=float)
    if X.shape[1] != n_columns:
        raise ValueError(f"{what} need {n_columns} columns, got {X.shape[1]}")
    return X


def pose_to_vector(t: Transform) -> np.ndarray:
    return np.concatenate([t.translation, rotation_log(t.rotation)])


def vector_to_pose(v) -> Transform:
    v = np.asarray(v, dtype=float)
    return Transform(rotvec_to_matrix(v[3:]), v[:3])


class GaitExpander(BaseEstimator, TransformerMixin):
    """Gait phases -> 12-joint configurations (radians)."""

    def __init__(self, gait=None, tree=None, method="catmull-rom"):
        self.gait = gait
        self.tree = tree
        self.method = method

    def fit(self, X=None, y=None):
        self.trajectory_ = check_gait(self.gait)
        self.tree_ = check_tree(self.tree)
        return self

    def transform(self, X):
        check_is_fitted(self, "trajectory_")
        phases = check_phases(X)
        return np.array(
            [
                expand_to_configuration(self.trajectory_, p, self.tree_, self.method).angles
                for p in phases
            ]
        ).reshape(len(phases), 12)


class ForwardKinematics(BaseEstimator, TransformerMixin):
    """Configurations (n, 12) -> foot positions (n, 3) or pose vectors (n, 6).

    With ``side="both"`` the right foot columns come first.
    """

    def __init__(self, tree=None, side="both", output="position"):
        self.tree = tree
        self.side = side
        self.output = output

    def fit(self, X=None, y=None):
        if self.output not in ("position", "pose"):
            raise ValueError(f"output must be 'position' or 'pose', got {self.output!r}")
        self.tree_ = check_tree(self.tree)
        self.sides_ = check_sides(self.side)
        return self

    def transform(self, X):
        check_is_fitted(self, "tree_")
        Q = check_columns(X, 12, "configurations")
        width = 3 if self.output == "position" else 6
        out = np.empty((Q.shape[0], width * len(self.sides_)))
        for i, q in enumerate(Q):
            for s, side in enumerate(self.sides_):
                t = foot_pose(self.tree_, q, side)
                out[i, width * s : width * (s + 1)] = (
                    t.translation if width == 3 else pose_to_vector(t)
                )
        return out


class InverseKinematics(BaseEstimator, TransformerMixin):
    """Foot pose vectors (n, 6) -> leg angles (n, 6) for one side.

    Rows are solved in order; with ``warm_start`` each row is seeded by the
    previous solution, which is what continuous trajectories need.  Per-row
    solver outcomes are kept in ``results_`` after each ``transform``.
    """

    def __init__(
        self,
        tree=None,
        side="right",
        max_iterations=200,
        position_tolerance=1e-8,
        orientation_tolerance=1e-8,
        damping=1e-3,
        step_scale=1.0,
        method="dls",
        warm_start=True,
        initial_angles=None,
    ):
        self.tree = tree
        self.side = side
        self.max_iterations = max_iterations
        self.position_tolerance = position_tolerance
        self.orientation_tolerance = orientation_tolerance
        self.damping = damping
        self.step_scale = step_scale
        self.method = method
        self.warm_start = warm_start
        self.initial_angles = initial_angles

    def fit(self, X=None, y=None):
        self.tree_ = check_tree(self.tree)
        self.side_ = Side.parse(self.side)
        self.config_ = IkConfig(
            max_iterations=self.max_iterations,
            position_tolerance=self.position_tolerance,
            orientation_tolerance=self.orientation_tolerance,
            damping=self.damping,
            step_scale=self.step_scale,
            method=self.method,
        )
        seed = np.zeros(6) if self.initial_angles is None else self.initial_angles
        self.initial_angles_ = check_columns(np.atleast_2d(seed), 6, "initial angles")[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        P = check_columns(X, 6, "pose vectors")
        seed = self.initial_angles_
        out = np.empty((P.shape[0], 6))
        results = []
        for i, v in enumerate(P):
            res = solve_ik(self.tree_, self.side_, vector_to_pose(v), seed, self.config_)
            results.append(res)
            out[i] = res.angles
            if self.warm_start:
                seed = res.angles
        self.results_ = results
        return out

    def inverse_transform(self, X):
        """Leg angles (n, 6) -> foot pose vectors (n, 6)."""
        check_is_fitted(self, "config_")
        Q = check_columns(X, 6, "leg angles")
        return np.array([pose_to_vector(foot_pose(self.tree_, q, self.side_)) for q in Q])
