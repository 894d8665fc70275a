"""Command-line front end.

Usage:
    posemetric convert --from euler --to quat --values 0.1,0.2,0.3
    posemetric dist --kind geodesic --a identity --b 0,0,1.5 --rep axis
    posemetric axioms --kind quat --trials 10000 --seed 0
    posemetric fit --loss se3 --steps 500 --lr 0.01 --seed 0 --out trace.csv
    posemetric compare --trials 100 --steps 2000 --lr 0.01 --seed 0 --out table.json
    posemetric eval --gt gt.txt --est est.txt --metric rpe --mode trans --delta 1

Values are comma-separated; use ``--a=-1,0,0`` for values starting with a
minus sign. Exit status: 0 success, 1 usage error, 2 data error.
"""
import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import convlab, metrics, trajeval
from . import rotations as rot
from .errors import GimbalLockWarning, PoseError
from .poses import Transform

EXIT_USAGE = 1
EXIT_DATA = 2

REP_SIZE = {"euler": 3, "quat": 4, "matrix": 9, "axis": 3}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Output: 17 significant digits, deterministic key order
# ---------------------------------------------------------------------------

def _fmt_float(x):
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def dumps(obj, indent=2, _level=0):
    """JSON text with every float printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------

def parse_values(text, size=None, what="values"):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if size is not None and len(vals) != size:
        raise UsageError(f"{what}: expected {size} numbers, got {len(vals)}")
    return np.array(vals)


def _identity(rep):
    return {"euler": np.zeros(3), "quat": np.array([1.0, 0, 0, 0]),
            "matrix": np.eye(3).ravel(), "axis": np.zeros(3)}[rep]


def parse_rotation(text, rep, what):
    if text.strip().lower() == "identity":
        return _identity(rep)
    return parse_values(text, REP_SIZE[rep], what)


def to_matrix(vals, rep):
    if rep == "euler":
        return rot.euler_to_matrix(vals)
    if rep == "quat":
        return rot.quat_to_matrix(rot.normalize_quat(vals))
    if rep == "axis":
        return rot.exp_so3(vals)
    return rot.check_rotation(np.reshape(vals, (3, 3)))


def from_matrix(R, rep):
    if rep == "euler":
        return rot.matrix_to_euler(R)
    if rep == "quat":
        return rot.matrix_to_quat(R)
    if rep == "axis":
        return rot.log_so3(R)
    return R


def parse_transform(text, rep, what):
    """``rep == 'matrix'``: 12 values, row-major 3x4. Otherwise translation
    followed by the rotation in ``rep``."""
    if text.strip().lower() == "identity":
        return Transform.identity()
    if rep == "matrix":
        P = parse_values(text, 12, what).reshape(3, 4)
        return Transform(rot.check_rotation(P[:, :3]), P[:, 3])
    vals = parse_values(text, 3 + REP_SIZE[rep], what)
    return Transform(to_matrix(vals[3:], rep), vals[:3])


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_convert(args, out):
    vals = parse_rotation(args.values, args.src, "--values")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GimbalLockWarning)
        R = to_matrix(vals, args.src)
        res = from_matrix(R, args.dst)
    doc = {"from": args.src, "to": args.dst, "input": vals.tolist(),
           "value": np.asarray(res).reshape(3, 3).tolist() if args.dst == "matrix" else res.tolist()}
    if args.dst == "euler":
        doc["gimbal_lock"] = any(issubclass(w.category, GimbalLockWarning) for w in caught)
    out.write(dumps(doc) + "\n")


def cmd_dist(args, out):
    kind = args.kind
    if kind == "euler":
        a = parse_rotation(args.a, "euler", "--a")
        b = parse_rotation(args.b, "euler", "--b")
        value = metrics.dist_euler(a, b)
    elif kind == "quat":
        a = parse_rotation(args.a, "quat", "--a")
        b = parse_rotation(args.b, "quat", "--b")
        value = metrics.dist_quat(a, b)
    elif kind in ("geodesic", "chordal-so3"):
        rep = args.rep or "matrix"
        A = to_matrix(parse_rotation(args.a, rep, "--a"), rep)
        B = to_matrix(parse_rotation(args.b, rep, "--b"), rep)
        fn = metrics.dist_geodesic if kind == "geodesic" else metrics.dist_chordal_so3
        value = fn(A, B)
    else:
        rep = args.rep or "matrix"
        value = metrics.dist_chordal_se3(parse_transform(args.a, rep, "--a"),
                                         parse_transform(args.b, rep, "--b"))
    out.write(dumps({"kind": kind, "value": float(value)}) + "\n")


def cmd_axioms(args, out):
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    report = metrics.probe(args.kind, args.trials, args.seed, args.tolerance)
    out.write(dumps(report.to_dict()) + "\n")


def _lab_config(args, trials):
    try:
        return convlab.LabConfig(
            trials=trials, steps=args.steps, lr=args.lr, seed=args.seed,
            angle_range=(args.angle_lo, args.angle_hi), trans_range=args.trans_range,
            tolerance=args.tolerance, weights=tuple(parse_values(args.weights, 3, "--weights")))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_fit(args, out):
    cfg = _lab_config(args, 1)
    target = convlab.sample_target(convlab.trial_seed(cfg.seed, 0), cfg.angle_range, cfg.trans_range)
    trace = convlab.fit(args.loss, target, cfg)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            convlab.write_traces_csv(fh, trace)
        out.write(dumps({
            "loss_kind": trace.loss_kind, "converged": trace.converged,
            "steps_to_tolerance": trace.steps_to_tolerance, "diverged": trace.diverged,
            "final_rot_err_rad": trace.rot_err[-1], "final_trans_err_m": trace.trans_err[-1],
            "records": len(trace), "out": args.out}) + "\n")
    else:
        convlab.write_traces_csv(out, trace)


def cmd_compare(args, out):
    cfg = _lab_config(args, args.trials)
    table, traces = convlab.compare(cfg, return_traces=True)
    text = dumps(table) + "\n"
    if args.out:
        path = Path(args.out)
        path.write_text(text)
        stem = path.with_suffix("")
        with open(f"{stem}.traces.csv", "w", newline="") as fh:
            convlab.write_traces_csv(fh, traces)
        for row in table["rows"]:
            with open(f"{stem}.{row['kind']}.csv", "w") as fh:
                fh.write("step,loss,rot_err_rad,trans_err_m\n")
                c = row["curves"]
                for i, vals in enumerate(zip(c["loss"], c["rot_err_rad"], c["trans_err_m"])):
                    fh.write(f"{i}," + ",".join(_fmt_float(v) for v in vals) + "\n")
    out.write(text)


def cmd_eval(args, out):
    gt = trajeval.load_kitti(args.gt)
    est = trajeval.load_kitti(args.est)
    if args.metric == "ape":
        errors = trajeval.ape_errors(gt, est, args.mode)
    else:
        errors = trajeval.rpe_errors(gt, est, args.delta, args.mode)
    stats = trajeval.ErrorStats.from_errors(errors)
    if args.per_frame:
        with open(args.per_frame, "w", newline="") as fh:
            trajeval.write_errors_csv(fh, errors)
    doc = {"metric": args.metric, "mode": args.mode,
           "delta": args.delta if args.metric == "rpe" else None}
    doc.update(stats.to_dict())
    out.write(dumps(doc) + "\n")


def build_parser():
    p = _Parser(prog="posemetric", description="Rotation metrics, pose losses and trajectory errors.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    reps = list(REP_SIZE)

    c = sub.add_parser("convert", help="convert a rotation between representations")
    c.add_argument("--from", dest="src", choices=reps, required=True)
    c.add_argument("--to", dest="dst", choices=reps, required=True)
    c.add_argument("--values", required=True, help="comma-separated values or 'identity'")
    c.set_defaults(func=cmd_convert)

    d = sub.add_parser("dist", help="distance between two elements")
    d.add_argument("--kind", choices=["euler", "quat", "geodesic", "chordal-so3", "chordal-se3"],
                   required=True)
    d.add_argument("--a", required=True)
    d.add_argument("--b", required=True)
    d.add_argument("--rep", choices=reps,
                   help="rotation representation for geodesic/chordal kinds (default matrix)")
    d.set_defaults(func=cmd_dist)

    a = sub.add_parser("axioms", help="randomized metric-axiom probe")
    a.add_argument("--kind", choices=list(metrics.PROBES), required=True)
    a.add_argument("--trials", type=int, default=10000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--tolerance", type=float, default=1e-9)
    a.set_defaults(func=cmd_axioms)

    def lab_options(sp, trials):
        if trials:
            sp.add_argument("--trials", type=int, default=100)
        sp.add_argument("--steps", type=int, default=2000)
        sp.add_argument("--lr", type=float, default=0.01)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--angle-lo", type=float, default=0.0)
        sp.add_argument("--angle-hi", type=float, default=math.pi)
        sp.add_argument("--trans-range", type=float, default=1.0)
        sp.add_argument("--tolerance", type=float, default=0.01)
        sp.add_argument("--weights", default="1,1,1", help="k1,k2,k3 (default unweighted)")
        sp.add_argument("--out")

    f = sub.add_parser("fit", help="gradient-descent fit of one loss head")
    f.add_argument("--loss", choices=list(convlab.KINDS), required=True)
    lab_options(f, trials=False)
    f.set_defaults(func=cmd_fit)

    m = sub.add_parser("compare", help="paired convergence comparison of all heads")
    lab_options(m, trials=True)
    m.set_defaults(func=cmd_compare)

    e = sub.add_parser("eval", help="APE/RPE between KITTI pose files")
    e.add_argument("--gt", required=True)
    e.add_argument("--est", required=True)
    e.add_argument("--metric", choices=["ape", "rpe"], required=True)
    e.add_argument("--mode", choices=["trans", "rot"], default="trans")
    e.add_argument("--delta", type=int, default=1)
    e.add_argument("--per-frame", help="write per-frame errors as CSV")
    e.set_defaults(func=cmd_eval)
    return p


def run(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        args.func(args, out)
    except UsageError as exc:
        parser.print_usage(err)
        err.write(f"posemetric: error: {exc}\n")
        return EXIT_USAGE
    except (PoseError, OSError) as exc:
        err.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_DATA
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
