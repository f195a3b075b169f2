"""gconic command-line front end.

Exit codes: 0 success, 2 unreadable or invalid input, 3 domain or
precondition error.
"""
from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from .diagnostics import replicate
from .errors import GconicError, SceneError
from .oracle import XRAY_GRID, find_minimizer, xray_discrepancy
from .rm import StepSchedule, atomic_write_text, run_chain
from .scene import Scene, load_scene

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN = 0, 2, 3
DEFAULT_ITERS = 10**4
DEFAULT_REPS = 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(v: float) -> str:
    return f"{v:.12g}"


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}") from None
    return a, b


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def default_start(scene: Scene) -> tuple[float, float]:
    """Bounding-box center if it lies in K, else the center of the best-covered cell nearest to it."""
    xmin, ymin, xmax, ymax = scene.body.bounding_box()
    c = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax))
    if scene.body.contains(c):
        return c
    m = scene.measure
    X, Y = np.meshgrid(m.x_centers, m.y_centers, indexing="ij")
    full = m.coverage >= m.coverage.max()
    d = np.where(full, np.hypot(X - c[0], Y - c[1]), np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return float(X[i, j]), float(Y[i, j])


def _run_args(args, scene: Scene):
    run = scene.run
    x0 = args.x0 or tuple(run.get("x0", ())) or default_start(scene)
    t1 = args.t1 if args.t1 is not None else run.get("t1", 1.0)
    gamma = args.gamma if args.gamma is not None else run.get("gamma", 1.0)
    iters = args.iters if args.iters is not None else run.get("iters", DEFAULT_ITERS)
    seed = args.seed if args.seed is not None else run.get("seed", 0)
    return x0, StepSchedule(float(t1), float(gamma)), int(iters), int(seed)


def cmd_eval(args) -> int:
    scene = load_scene(args.scene)
    f = scene.conic
    value = f.evaluate_direct(args.point) if args.method == "direct" else f.evaluate_closed_form(args.point)
    print(_num(float(value)))
    return EXIT_OK


def cmd_minimize(args) -> int:
    scene = load_scene(args.scene)
    f = scene.conic
    if args.mode == "oracle":
        best = find_minimizer(f)
        print(f"minimizer {_num(best.minimizer.x)},{_num(best.minimizer.y)}")
        print(f"unique {str(best.unique).lower()}")
        print(f"x_interval {_num(best.x_interval[0])},{_num(best.x_interval[1])}")
        print(f"y_interval {_num(best.y_interval[0])},{_num(best.y_interval[1])}")
        return EXIT_OK
    x0, schedule, iters, seed = _run_args(args, scene)
    traj = run_chain(f, x0, schedule, iters, seed)
    traj.scene_hash = scene.sha256
    if args.out:
        traj.to_csv(args.out)
    final = traj.final
    print(f"final {_num(final.x)},{_num(final.y)}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    scene = load_scene(args.scene)
    x0, schedule, iters, seed = _run_args(args, scene)
    reps = args.reps if args.reps is not None else scene.run.get("reps", DEFAULT_REPS)
    checkpoints = args.checkpoints or scene.run.get("checkpoints")
    report = replicate(scene.conic, x0, schedule, iters, int(reps), seed,
                       checkpoints=checkpoints, scene_hash=scene.sha256)
    report.write(args.json, args.csv)
    if args.json is None:
        sys.stdout.write(report.to_json())
    return EXIT_OK


def cmd_xray(args) -> int:
    scene = load_scene(args.scene)
    m = scene.measure
    xmin, ymin, xmax, ymax = scene.body.bounding_box()
    lo, hi = (xmin, xmax) if args.axis == 1 else (ymin, ymax)
    ts = lo + (np.arange(args.grid) + 0.5) * (hi - lo) / args.grid
    values = m.xray_many(args.axis, ts)
    text = "t,value\n" + "".join(f"{_num(t)},{_num(v)}\n" for t, v in zip(ts.tolist(), values.tolist()))
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_compare_xray(args) -> int:
    a, b = load_scene(args.scene_a), load_scene(args.scene_b)
    gap = max(xray_discrepancy(a.conic, b.conic, args.grid))
    print(f"{'equivalent' if gap <= args.tol else 'distinct'} max_discrepancy={gap:.6e}")
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x0", type=_pair, help="start point X,Y (default: scene run.x0 or a point of K)")
    p.add_argument("--t1", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gconic", description="Generalized conic functions on planar bodies.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate F at a point")
    p.add_argument("scene")
    p.add_argument("--point", type=_pair, required=True)
    p.add_argument("--method", choices=("closed", "direct"), default="closed")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("minimize", help="oracle minimizer or a Robbins-Monro chain")
    p.add_argument("scene")
    p.add_argument("--mode", choices=("oracle", "rm"), default="oracle")
    _add_run_flags(p)
    p.add_argument("--out", help="trajectory CSV path (rm mode)")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("diagnose", help="replicated chains and convergence report")
    p.add_argument("scene")
    _add_run_flags(p)
    p.add_argument("--reps", type=int)
    p.add_argument("--checkpoints", type=_int_list)
    p.add_argument("--json", help="report JSON path (default: stdout)")
    p.add_argument("--csv", help="error-curve CSV path")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("xray", help="X-ray function of a product-measure scene")
    p.add_argument("scene")
    p.add_argument("--axis", type=int, choices=(1, 2), default=1)
    p.add_argument("--grid", type=int, default=XRAY_GRID)
    p.add_argument("--out")
    p.set_defaults(func=cmd_xray)

    p = sub.add_parser("compare-xray", help="test two scenes for equal X-rays")
    p.add_argument("scene_a")
    p.add_argument("scene_b")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--grid", type=int, default=XRAY_GRID)
    p.set_defaults(func=cmd_compare_xray)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gconic: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _warn
            return args.func(args)
    except SceneError as exc:
        print(f"gconic: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GconicError as exc:
        print(f"gconic: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def _warn(message, category, filename, lineno, file=None, line=None):
    print(f"gconic: warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
