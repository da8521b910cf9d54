"""Command-line entry point: ``exokin {fk,ik,play,verify}``.

Angles on the command line are degrees; lengths are meters.  Exit codes:
0 success, 1 domain failure (limit violation, non-convergence, verify
deviation above threshold), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .experiments import verify_round_trip
from .gait import GaitParseError, load_gait
from .ik import IkConfig, solve_ik
from .scene import (
    dumps_scene,
    emit_comparison_csv,
    emit_scene_sequence,
    scene_document,
    scene_from_poses,
)
from .transforms import Transform, rotation_log, rotvec_to_matrix
from .tree import (
    JOINT_IDS,
    JointConfiguration,
    JointLimitError,
    Side,
    build_default_exoskeleton,
    forward_kinematics,
    load_tree,
    validate_limits,
)

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text: str, n: int, what: str) -> np.ndarray:
    parts = [p for p in text.replace(" ", "").split(",") if p != ""]
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"{what} needs {n} comma-separated values, got {len(parts)}")
    try:
        values = np.array([float(p) for p in parts])
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be numeric: {text!r}") from None
    if not np.all(np.isfinite(values)):
        raise argparse.ArgumentTypeError(f"{what} must be finite: {text!r}")
    return values


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _add_ik_options(p: argparse.ArgumentParser) -> None:
    d = IkConfig()
    g = p.add_argument_group("IK solver")
    g.add_argument("--max-iterations", type=_positive_int, default=d.max_iterations)
    g.add_argument("--position-tolerance", type=float, default=d.position_tolerance,
                   help="meters (default %(default)g)")
    g.add_argument("--orientation-tolerance", type=float, default=d.orientation_tolerance,
                   help="radians (default %(default)g)")
    g.add_argument("--damping", type=float, default=d.damping,
                   help="damped least-squares lambda (default %(default)g)")
    g.add_argument("--step-scale", type=float, default=d.step_scale)
    g.add_argument("--method", choices=("dls", "transpose"), default=d.method)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exokin",
        description="Kinematics of a 12-DOF lower-extremity exoskeleton. "
        "Angles are given in DEGREES on the command line.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tree", type=Path, help="tree JSON file (default: built-in model)")

    gait = argparse.ArgumentParser(add_help=False)
    gait.add_argument("--gait", type=Path, help="gait CSV file (default: bundled dataset)")

    fk = sub.add_parser("fk", parents=[common], help="forward kinematics of one configuration")
    fk.add_argument("--angles", required=True,
                    type=lambda s: _floats(s, 12, "--angles"),
                    help="12 joint angles in degrees: " + ",".join(j.label for j in JOINT_IDS))
    fk.add_argument("-o", "--output", default="fk_scene.json",
                    help="one-frame scene JSON ('-' for stdout; default %(default)s)")

    ik = sub.add_parser("ik", parents=[common], help="solve IK for one foot target")
    ik.add_argument("--side", required=True, type=Side.parse, help="L or R")
    ik.add_argument("--target", required=True,
                    type=lambda s: _floats(s, 6, "--target"),
                    help="x,y,z in meters and a rotation vector rx,ry,rz in degrees")
    ik.add_argument("--seed", type=lambda s: _floats(s, 6, "--seed"),
                    help="6 initial leg angles in degrees (default: zeros)")
    _add_ik_options(ik)

    play = sub.add_parser("play", parents=[common, gait], help="emit a gait scene sequence")
    play.add_argument("--frames", type=_positive_int, default=10)
    play.add_argument("-o", "--output", default="scene.json",
                      help="scene JSON ('-' for stdout; default %(default)s)")

    verify = sub.add_parser("verify", parents=[common, gait],
                            help="IK round trip over a gait cycle")
    verify.add_argument("--frames", type=_positive_int, default=50)
    verify.add_argument("-o", "--output", default="comparison.csv",
                        help="comparison CSV ('-' for stdout; default %(default)s)")
    verify.add_argument("--threshold-deg", type=float, default=0.1,
                        help="max allowed |measured - recovered| per joint (default %(default)g)")
    _add_ik_options(verify)
    return parser


def _ik_config(args) -> IkConfig:
    try:
        return IkConfig(
            max_iterations=args.max_iterations,
            position_tolerance=args.position_tolerance,
            orientation_tolerance=args.orientation_tolerance,
            damping=args.damping,
            step_scale=args.step_scale,
            method=args.method,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_tree(args):
    return build_default_exoskeleton() if args.tree is None else load_tree(args.tree)


def _write(path: str, text: str, out) -> None:
    if path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _format_pose(label: str, t: Transform) -> str:
    # + 0.0 folds negative zeros
    x, y, z = t.translation + 0.0
    rx, ry, rz = np.degrees(rotation_log(t.rotation)) + 0.0
    return f"{label:<18} {x:+.6f} {y:+.6f} {z:+.6f}   {rx:+9.4f} {ry:+9.4f} {rz:+9.4f}"


def cmd_fk(args, out) -> int:
    tree = _load_tree(args)
    q = JointConfiguration.from_degrees(args.angles)
    violations = validate_limits(tree, q)
    if violations:
        raise JointLimitError(violations)
    poses = forward_kinematics(tree, q)
    out.write(f"{'frame':<18} {'x_m':>9} {'y_m':>9} {'z_m':>9}   "
              f"{'rx_deg':>9} {'ry_deg':>9} {'rz_deg':>9}\n")
    out.write(_format_pose("base", poses.base) + "\n")
    for jid, t in poses.joints.items():
        out.write(_format_pose(jid.label, t) + "\n")
    for side, t in poses.feet.items():
        out.write(_format_pose(f"{side.short}_foot", t) + "\n")
    _write(args.output, dumps_scene(scene_document([scene_from_poses(poses, 0.0)])), out)
    return EXIT_OK


def cmd_ik(args, out) -> int:
    tree = _load_tree(args)
    config = _ik_config(args)
    target = Transform(rotvec_to_matrix(np.radians(args.target[3:])), args.target[:3])
    seed = np.zeros(6) if args.seed is None else np.radians(args.seed)
    result = solve_ik(tree, args.side, target, seed, config)
    out.write(f"side: {args.side.value}\n{result}\n")
    return EXIT_OK if result.converged else EXIT_DOMAIN


def cmd_play(args, out) -> int:
    tree = _load_tree(args)
    traj = load_gait(args.gait)
    doc = emit_scene_sequence(tree, traj, args.frames)
    _write(args.output, dumps_scene(doc), out)
    if args.output != "-":
        out.write(f"wrote {len(doc['frames'])} frames to {args.output}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    tree = _load_tree(args)
    traj = load_gait(args.gait)
    config = _ik_config(args)
    report = verify_round_trip(tree, traj, args.frames, config)
    _write(args.output, emit_comparison_csv(report.series), out)

    names = [f"{s}_{j}" for s in ("R", "L") for j in ("hip", "knee", "ankle")]
    log = sys.stderr if args.output == "-" else out
    log.write(f"frames: {args.frames}\n")
    log.write(f"{'joint':<8} {'rms_deg':>12} {'max_abs_deg':>12}\n")
    for name, rms, mx in zip(names, report.rms_deviation, report.max_abs_deviation):
        log.write(f"{name:<8} {rms:12.3e} {mx:12.3e}\n")
    log.write(f"max foot position residual: {report.max_position_residual:.3e} m\n")
    log.write(f"max foot orientation residual: {report.max_orientation_residual:.3e} rad\n")
    failed = [
        (side, k, r.status.value)
        for side, rs in report.results.items()
        for k, r in enumerate(rs)
        if not r.converged
    ]
    worst = float(np.max(report.max_abs_deviation))
    ok = not failed and worst < args.threshold_deg
    if failed:
        side, k, status = failed[0]
        log.write(f"{len(failed)} solve(s) did not converge; first: {side.value} frame {k} ({status})\n")
    if worst >= args.threshold_deg:
        log.write(f"max deviation {worst:.3e} deg exceeds threshold {args.threshold_deg:g} deg\n")
    log.write(f"result: {'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_DOMAIN


COMMANDS = {"fk": cmd_fk, "ik": cmd_ik, "play": cmd_play, "verify": cmd_verify}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.tree is not None and not args.tree.is_file():
            raise UsageError(f"tree file not found: {args.tree}")
        gait_path = getattr(args, "gait", None)
        if gait_path is not None and not gait_path.is_file():
            raise UsageError(f"gait file not found: {gait_path}")
        return COMMANDS[args.command](args, out)
    except JointLimitError as exc:
        print(f"exokin {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UsageError, GaitParseError, OSError) as exc:
        print(f"exokin {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # malformed tree documents and other input errors
        print(f"exokin {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
