"""Command-line front end: ``cfeinstein <subcommand> --periodic 3 --depth 30 ...``.

Exit codes: 0 success, 1 a computation or suite failed, 2 usage error.
Set CFEINSTEIN_THREADS to parallelise suite cases.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .cf_core import DigitSequence, InsufficientDepth, boundary_data, convergents, envelope_eval

HEADER = f"# cfeinstein {__version__}"


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's output."""

    command: str
    digits: dict
    depth: int | None
    tol: float
    grid: str | None
    output: str | None
    json: bool
    seed: int
    extra: dict

    def to_json(self):
        return asdict(self)


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise UsageError(f"bad digit list {text!r}")
    if not vals:
        raise UsageError("empty digit list")
    return vals


def digits_from_args(args):
    try:
        if args.digits:
            return DigitSequence.from_list(_int_list(args.digits), bound_N=args.bound_N)
        if args.periodic:
            return DigitSequence.periodic(_int_list(args.periodic), bound_N=args.bound_N)
        if args.file:
            return DigitSequence.from_file(args.file, bound_N=args.bound_N)
    except (ValueError, OSError) as err:
        raise UsageError(str(err))
    raise UsageError("one of --digits, --periodic or --file is required")


def parse_grid(text, dims):
    """"a:b:n" per axis, axes separated by commas."""
    parts = text.split(",")
    if len(parts) != dims:
        raise UsageError(f"--grid needs {dims} axis spec(s) like 0.5:1:11, got {text!r}")
    axes = []
    for part in parts:
        try:
            a, b, n = part.split(":")
            a, b, n = float(a), float(b), int(n)
        except ValueError:
            raise UsageError(f"bad grid axis {part!r}; expected start:stop:count")
        if n < 1:
            raise UsageError("grid counts must be positive")
        axes.append(np.linspace(a, b, n))
    return axes


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def render_csv(columns, rows):
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(payload):
    # repr of a Python float round-trips, so no digits are lost here
    return json.dumps({"version": __version__, **_jsonable(payload)}, indent=2, sort_keys=True) + "\n"


def _need_depth(args):
    if args.depth is None:
        raise UsageError(f"{args.command} needs an explicit --depth")
    if args.depth < 1:
        raise UsageError("--depth must be >= 1")
    return args.depth


# ---------------------------------------------------------------------------

def cmd_convergents(args, d):
    t = convergents(d, _need_depth(args))
    if args.json:
        return render_json({"table": t.to_json(), "digit_spec": d.spec()}), 0
    rows = []
    for j in range(t.depth + 1):
        m, n = t.pairs[j]
        e = t.digits[j - 1] if j >= 1 else None
        rows.append([j, e, m, n, t.corners[j], t.weights[j], float(t.corners[j]), float(t.weights[j])])
    return render_csv(["j", "e_j", "m_j", "n_j", "a_j", "b_j", "a_j_float", "b_j_float"], rows), 0


def cmd_envelope(args, d):
    t = convergents(d, _need_depth(args))
    (xs,) = parse_grid(args.grid or "0:1.5:31", 1)
    rows = [[x, envelope_eval(t, float(x))] for x in xs]
    if args.json:
        return render_json({"x": [r[0] for r in rows], "eta": [r[1] for r in rows]}), 0
    return render_csv(["x", "eta"], rows), 0


def cmd_field(args, d):
    from .field import field_sample

    b = boundary_data(d, _need_depth(args))
    xs, ys = parse_grid(args.grid or "0.5:1.5:5,0.1:1:4", 2)
    cols = ["x", "y", "f", "f_x", "f_y", "w_alg", "w_int", "trunc_bound", "J_used"]
    rows = []
    for x in xs:
        for y in ys:
            s = field_sample(b, (x, y), tol=args.tol, with_integral=y >= 1e-3)
            rows.append([s.to_row()[c] for c in cols])
    if args.json:
        return render_json({"rows": [dict(zip(cols, r)) for r in rows]}), 0
    return render_csv(cols, rows), 0


def cmd_metric(args, d):
    from .metric import curvature_report, metric_at

    b = boundary_data(d, _need_depth(args))
    xs, ys = parse_grid(args.grid or "0.6:1.2:4,0.05:0.5:4", 2)
    cols = ["x", "y", "g_xx", "g_yy", "g_11", "g_12", "g_22", "f", "w"]
    if args.curvature:
        cols += ["lambda", "einstein_residual", "scalar", "weyl_sd", "weyl_asd", "h_fd"]
    rows = []
    for x in xs:
        for y in ys:
            m = metric_at(b, (x, y))
            g = m.components
            row = [x, y, g[0, 0], g[1, 1], g[2, 2], g[2, 3], g[3, 3], m.f, m.w]
            if args.curvature:
                c = curvature_report(b, (x, y))
                row += [c.lambda_est, c.einstein_residual, c.scalar, c.weyl_sd_norm,
                        c.weyl_asd_norm, c.h_fd]
            rows.append(row)
    if args.json:
        return render_json({"rows": [dict(zip(cols, r)) for r in rows]}), 0
    return render_csv(cols, rows), 0


def cmd_verify(args, d):
    """Run every suite; the report is always JSON, a summary goes to stderr."""
    from .verify import run_all

    reports = run_all(d, _need_depth(args), seed=args.seed, with_geometry=not args.exact_only)
    ok = all(r.passed for r in reports)
    payload = {
        "passed": ok,
        "suites": [r.to_json() for r in reports],
        "config": config_from_args(args, d).to_json(),
    }
    for r in reports:
        print(f"{r.name}: {'PASS' if r.passed else 'FAIL'} ({len(r.cases)} cases, "
              f"worst margin {r.worst_margin:.3g})", file=sys.stderr)
    return render_json(payload), 0 if ok else 1


def cmd_topology(args, d):
    from .topology import intersection_matrix, leading_minors, polygon_descriptor

    t = convergents(d, _need_depth(args))
    desc = polygon_descriptor(t, t.depth)
    payload = desc.to_json(sign=args.sign)
    payload["smoothness_determinants"] = desc.smoothness_determinants()
    if t.depth >= 2:
        Q = intersection_matrix(t, t.depth, sign=args.sign)
        payload["leading_minors"] = [str(v) for v in leading_minors(Q)]
    return render_json(payload), 0


FIGURE1_WIDTH = 1e-12


def figure1_depth(d, n):
    """Smallest depth whose enclosure is narrower than FIGURE1_WIDTH and lies
    left of the first grid point; reported in the CSV header."""
    J = 2
    while True:
        t = convergents(d, J)
        ah = t.alpha_hat
        if t.width < FIGURE1_WIDTH and t.alpha_hi < ah + (1 - ah) / n / 2:
            return J
        J += 1


def cmd_figure1(args, d):
    n = args.points
    J = args.depth if args.depth is not None else figure1_depth(d, n)
    t = convergents(d, J)
    ah = float(t.alpha_hat)
    xs = ah + (1 - ah) * np.arange(1, n + 1) / n
    rows = []
    for x in xs:
        rows.append([x, envelope_eval(t, float(x)), math.sqrt(math.sqrt(5.0) * (x - ah))])
    if args.json:
        return render_json({"depth": J, "x": xs.tolist(), "eta": [r[1] for r in rows],
                            "sqrt_sqrt5": [r[2] for r in rows]}), 0
    text = render_csv(["x", "eta", "sqrt_sqrt5_x_minus_alpha"], rows)
    return text.replace(HEADER + "\n", f"{HEADER}\n# depth={J}\n", 1), 0


COMMANDS = {
    "convergents": cmd_convergents,
    "envelope": cmd_envelope,
    "field": cmd_field,
    "metric": cmd_metric,
    "verify": cmd_verify,
    "topology": cmd_topology,
    "figure1": cmd_figure1,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--digits", help="inline digit list, e.g. 3,4,3")
    src.add_argument("--periodic", help="repeating digit block, e.g. 3,4")
    src.add_argument("--file", help="file of whitespace/newline separated digits")
    common.add_argument("--bound-N", dest="bound_N", type=int, default=None)
    common.add_argument("--depth", type=int, default=None, help="truncation level J")
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--grid", default=None, help="start:stop:count[,start:stop:count]")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true")
    common.add_argument("--output", "-o", default=None)

    p = _Parser(prog="cfeinstein", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "metric":
            sp.add_argument("--curvature", action="store_true")
        if name == "verify":
            sp.add_argument("--exact-only", action="store_true",
                            help="skip the field/metric based suites")
        if name == "topology":
            sp.add_argument("--sign", type=int, choices=(1, -1), default=1,
                            help="orientation convention of the sphere chain")
        if name == "figure1":
            sp.add_argument("--points", type=int, default=200)
    return p


def config_from_args(args, d):
    extra = {k: v for k, v in vars(args).items()
             if k not in {"command", "digits", "periodic", "file", "bound_N", "depth", "tol",
                          "grid", "output", "json", "seed"}}
    return RunConfig(args.command, d.spec(), args.depth, args.tol, args.grid, args.output,
                     args.json, args.seed, extra)


def run_command(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        d = digits_from_args(args)
        text, code = COMMANDS[args.command](args, d)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except (InsufficientDepth, ArithmeticError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
