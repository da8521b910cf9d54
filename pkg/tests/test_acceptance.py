"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the pytest terminal
summary under "acceptance criteria".
"""

import io
import json
import math
import time

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from exokin.cli import main
from exokin.experiments import verify_round_trip
from exokin.gait import format_gait_csv, load_gait, parse_gait_csv
from exokin.ik import IkConfig, geometric_jacobian, solve_ik
from exokin.scene import (
    ComparisonSeries,
    emit_comparison_csv,
    parse_comparison_csv,
    validate_scene,
)
from exokin.tree import (
    SIDES,
    build_default_exoskeleton,
    dumps_tree,
    foot_pose,
    forward_kinematics,
    loads_tree,
    mirror_point,
    tree_to_dict,
)

from conftest import oracle_chain, oracle_fk_batch, random_in_limit

FK_SAMPLES = 10_000
FK_ENTRY_TOL = 1e-12
FK_SECONDS = 5.0
ROTATION_TOL = 1e-9
JAC_CONFIGS = 100
JAC_STEP = 1e-5
JAC_TOL = 1e-6
VERIFY_FRAMES = 50
VERIFY_MAX_DEG = 0.1
VERIFY_RESIDUAL_M = 1e-8
VERIFY_SECONDS = 1.0
COLD_TARGETS = 1000
COLD_PERTURBATION = 0.1
COLD_SUCCESS_RATE = 0.95
COLD_JOINT_TOL = 1e-6
PLAY_FRAMES = 10
RIGID_TOL_M = 1e-9


def sig6(values):
    return [f"{v:.6g}" for v in np.ravel(values)]


@pytest.fixture(scope="module")
def fk_run():
    tree = build_default_exoskeleton()
    rng = np.random.default_rng(1)
    Q = random_in_limit(tree, rng, FK_SAMPLES)
    start = time.perf_counter()
    poses = [forward_kinematics(tree, q) for q in Q]
    elapsed = time.perf_counter() - start
    return tree, Q, poses, elapsed


def test_c1_fk_oracle_equivalence(fk_run, acceptance_log):
    tree, Q, poses, elapsed = fk_run
    oracle = oracle_fk_batch(tree, Q)
    got = np.empty_like(oracle)
    for i, p in enumerate(poses):
        for s, side in enumerate(SIDES):
            for k, t in enumerate(p.chain(side)):
                got[i, 6 * s + k] = t.as_matrix()
            got[i, 12 + s] = p.feet[side].as_matrix()
    worst = float(np.max(np.abs(got - oracle)))
    ok = worst <= FK_ENTRY_TOL and elapsed < FK_SECONDS
    acceptance_log(
        "C1 FK oracle equivalence",
        ok,
        f"{FK_SAMPLES} configs, max entry diff {worst:.2e} (tol {FK_ENTRY_TOL:g}), "
        f"FK time {elapsed:.2f}s (limit {FK_SECONDS:g}s)",
    )
    assert worst <= FK_ENTRY_TOL
    assert elapsed < FK_SECONDS


def test_c2_rotation_validity(fk_run, acceptance_log):
    _, _, poses, _ = fk_run
    rotations = np.array([t.rotation for p in poses for t in p.all_transforms()])
    ortho = float(np.max(np.abs(np.einsum("nji,njk->nik", rotations, rotations) - np.eye(3))))
    det = float(np.max(np.abs(np.linalg.det(rotations) - 1.0)))
    ok = ortho <= ROTATION_TOL and det <= ROTATION_TOL
    acceptance_log(
        "C2 rotation validity",
        ok,
        f"{len(rotations)} rotations, max |R^T R - I| {ortho:.2e}, max |det - 1| {det:.2e} "
        f"(tol {ROTATION_TOL:g})",
    )
    assert ok


def test_c3_jacobian_finite_differences(acceptance_log):
    tree = build_default_exoskeleton()
    rng = np.random.default_rng(3)
    worst = 0.0
    for q in random_in_limit(tree, rng, JAC_CONFIGS):
        for s, side in enumerate(SIDES):
            q6 = q[6 * s : 6 * s + 6]
            fd = np.empty((6, 6))
            for k in range(6):
                dq = np.zeros(6)
                dq[k] = JAC_STEP
                plus = oracle_chain(tree, side, q6 + dq)[1]
                minus = oracle_chain(tree, side, q6 - dq)[1]
                fd[:3, k] = (plus[:3, 3] - minus[:3, 3]) / (2 * JAC_STEP)
                fd[3:, k] = Rotation.from_matrix(plus[:3, :3] @ minus[:3, :3].T).as_rotvec() / (
                    2 * JAC_STEP
                )
            worst = max(worst, float(np.max(np.abs(geometric_jacobian(tree, side, q6) - fd))))
    ok = worst < JAC_TOL
    acceptance_log(
        "C3 Jacobian vs finite differences",
        ok,
        f"{JAC_CONFIGS} configs x 2 legs, h={JAC_STEP:g}, max deviation {worst:.2e} (tol {JAC_TOL:g})",
    )
    assert ok


def test_c4_ik_round_trip_verify(tmp_path, acceptance_log):
    out = tmp_path / "comparison.csv"
    stdout = io.StringIO()
    start = time.perf_counter()
    code = main(["verify", "--frames", str(VERIFY_FRAMES), "-o", str(out)], out=stdout)
    elapsed = time.perf_counter() - start

    series = parse_comparison_csv(out.read_text())
    max_dev_csv = float(np.max(np.abs(series.deviation)))
    report = verify_round_trip(build_default_exoskeleton(), load_gait(), VERIFY_FRAMES)
    per_joint = report.max_abs_deviation
    residual = report.max_position_residual
    ok = (
        code == 0
        and series.phases.size == VERIFY_FRAMES
        and report.all_converged
        and float(np.max(per_joint)) < VERIFY_MAX_DEG
        and max_dev_csv < VERIFY_MAX_DEG
        and residual < VERIFY_RESIDUAL_M
        and elapsed < VERIFY_SECONDS
    )
    acceptance_log(
        "C4 IK round trip (verify --frames 50)",
        ok,
        f"exit {code}, all converged {report.all_converged}, "
        f"max |meas-ik| per joint {np.array2string(per_joint, precision=2)} deg "
        f"(tol {VERIFY_MAX_DEG:g}), foot residual {residual:.2e} m (tol {VERIFY_RESIDUAL_M:g}), "
        f"runtime {elapsed:.3f}s (limit {VERIFY_SECONDS:g}s)",
    )
    assert code == 0
    assert report.all_converged
    assert np.all(per_joint < VERIFY_MAX_DEG) and max_dev_csv < VERIFY_MAX_DEG
    assert residual < VERIFY_RESIDUAL_M
    assert elapsed < VERIFY_SECONDS


def test_c5_cold_start_robustness(acceptance_log):
    tree = build_default_exoskeleton()
    rng = np.random.default_rng(5)
    nan_iterates = 0

    def watch(_, q, err):
        nonlocal nan_iterates
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(err.vector))):
            nan_iterates += 1

    successes = 0
    for i in range(COLD_TARGETS):
        side = SIDES[i % 2]
        lo, hi = tree.limits(side)
        q = random_in_limit(tree, rng, side=side)
        seed = np.clip(q + COLD_PERTURBATION * rng.choice([-1.0, 1.0], size=6), lo, hi)
        res = solve_ik(tree, side, foot_pose(tree, q, side), seed, callback=watch)
        if res.converged and np.max(np.abs(res.angles - q)) < COLD_JOINT_TOL:
            successes += 1

    # straight-knee singularity: targets and seeds with a fully extended knee
    singular = 200
    for i in range(singular):
        side = SIDES[i % 2]
        q = random_in_limit(tree, rng, side=side)
        q[3] = 0.0
        for seed in (q.copy(), np.zeros(6), q + rng.uniform(-0.1, 0.1, 6)):
            solve_ik(tree, side, foot_pose(tree, q, side), seed, IkConfig(), callback=watch)

    rate = successes / COLD_TARGETS
    ok = rate >= COLD_SUCCESS_RATE and nan_iterates == 0
    acceptance_log(
        "C5 cold-start IK robustness",
        ok,
        f"{successes}/{COLD_TARGETS} converged within {COLD_JOINT_TOL:g} rad "
        f"({rate:.1%}, need {COLD_SUCCESS_RATE:.0%}); non-finite iterates {nan_iterates} "
        f"incl. {3 * singular} straight-knee solves",
    )
    assert rate >= COLD_SUCCESS_RATE
    assert nan_iterates == 0


def test_c6_gait_playback(tmp_path, acceptance_log):
    out = tmp_path / "scene.json"
    code = main(["play", "--frames", str(PLAY_FRAMES), "-o", str(out)], out=io.StringIO())
    doc = json.loads(out.read_text())
    validate_scene(doc)
    frames = doc["frames"]

    lengths = {}
    for f in frames:
        for s in f["segments"]:
            length = np.linalg.norm(np.subtract(s["to"], s["from"])) / 100.0
            lengths.setdefault(s["label"], []).append(length)
    rigid = max(max(v) - min(v) for v in lengths.values())

    def foot(frame, label):
        return np.array(next(s["to"] for s in frame["segments"] if s["label"] == label)) / 100.0

    half = PLAY_FRAMES // 2
    offset = max(
        float(np.max(np.abs(foot(frames[k], "L_foot")
                            - mirror_point(foot(frames[(k + half) % PLAY_FRAMES], "R_foot")))))
        for k in range(PLAY_FRAMES)
    )
    phases_ok = [f["phase"] for f in frames] == [k / PLAY_FRAMES for k in range(PLAY_FRAMES)]
    ok = code == 0 and len(frames) == PLAY_FRAMES and phases_ok and rigid <= RIGID_TOL_M \
        and offset <= RIGID_TOL_M
    acceptance_log(
        "C6 gait playback (play --frames 10)",
        ok,
        f"exit {code}, schema-valid, {len(frames)} frames, segment length spread {rigid:.2e} m, "
        f"left vs half-cycle-shifted mirrored right foot {offset:.2e} m (tol {RIGID_TOL_M:g})",
    )
    assert ok


def test_c7_format_round_trips(acceptance_log):
    traj = load_gait()
    again = parse_gait_csv(format_gait_csv(traj))
    gait_ok = sig6(again.phases) == sig6(traj.phases) and sig6(again.angles) == sig6(traj.angles)

    report = verify_round_trip(build_default_exoskeleton(), traj, 25)
    series = report.series
    back = parse_comparison_csv(emit_comparison_csv(series))
    cmp_ok = all(
        sig6(a) == sig6(b)
        for a, b in ((series.phases, back.phases), (series.measured, back.measured),
                     (series.recovered, back.recovered))
    )
    rng = np.random.default_rng(7)
    synthetic = ComparisonSeries(np.arange(10) / 10, rng.normal(size=(10, 6)) * 1e3,
                                 rng.normal(size=(10, 6)) * 1e-3)
    back = parse_comparison_csv(emit_comparison_csv(synthetic))
    cmp_ok = cmp_ok and sig6(back.measured) == sig6(synthetic.measured) \
        and sig6(back.recovered) == sig6(synthetic.recovered)

    tree = build_default_exoskeleton(pelvis_half_width=1 / 7, thigh=math.pi / 8)
    text = dumps_tree(tree)
    tree_ok = dumps_tree(loads_tree(text)) == text and tree_to_dict(loads_tree(text)) == tree_to_dict(tree)

    ok = gait_ok and cmp_ok and tree_ok
    acceptance_log(
        "C7 format round trips",
        ok,
        f"gait CSV 6 s.f. {gait_ok}, comparison CSV 6 s.f. {cmp_ok}, tree JSON exact {tree_ok}",
    )
    assert ok
