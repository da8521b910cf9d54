"""The IK round-trip experiment: FK-generated foot trajectories re-solved by IK."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gait import GaitTrajectory, expand_to_configuration, sagittal_degrees
from .ik import IkConfig, IkResult, solve_ik
from .scene import ComparisonSeries
from .tree import SIDES, KinematicTree, foot_pose


@dataclass(frozen=True, eq=False)
class VerificationReport:
    series: ComparisonSeries
    results: dict  # Side -> list[IkResult], one per frame

    @property
    def all_converged(self) -> bool:
        return all(r.converged for rs in self.results.values() for r in rs)

    @property
    def max_abs_deviation(self) -> np.ndarray:
        """Per-joint max |measured - recovered| in degrees (R hip..L ankle)."""
        if self.series.phases.size == 0:
            return np.zeros(6)
        return np.max(np.abs(self.series.deviation), axis=0)

    @property
    def rms_deviation(self) -> np.ndarray:
        if self.series.phases.size == 0:
            return np.zeros(6)
        return np.sqrt(np.mean(self.series.deviation**2, axis=0))

    @property
    def max_position_residual(self) -> float:
        return max(r.error.position_norm for rs in self.results.values() for r in rs)

    @property
    def max_orientation_residual(self) -> float:
        return max(r.error.orientation_norm for rs in self.results.values() for r in rs)

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations for rs in self.results.values() for r in rs)


def verify_round_trip(
    tree: KinematicTree,
    traj: GaitTrajectory,
    frames: int,
    config: IkConfig | None = None,
) -> VerificationReport:
    """Generate foot poses from the gait data by FK and recover the angles by IK.

    Each side is solved sequentially: frame 0 is seeded with the measured
    angles, every later frame with the previous frame's solution.
    """
    if int(frames) < 1:
        raise ValueError(f"frame count must be >= 1, got {frames}")
    config = config or IkConfig()
    phases = np.arange(int(frames)) / int(frames)
    configs = [expand_to_configuration(traj, p, tree) for p in phases]

    measured = np.zeros((phases.size, 6))
    recovered = np.zeros((phases.size, 6))
    results = {}
    for s, side in enumerate(SIDES):
        seed = configs[0].side(side)
        side_results: list[IkResult] = []
        for k, q in enumerate(configs):
            target = foot_pose(tree, q, side)
            result = solve_ik(tree, side, target, seed, config)
            side_results.append(result)
            seed = result.angles
            measured[k, 3 * s : 3 * s + 3] = sagittal_degrees(q.side(side))
            recovered[k, 3 * s : 3 * s + 3] = sagittal_degrees(result.angles)
        results[side] = side_results
    return VerificationReport(ComparisonSeries(phases, measured, recovered), results)
