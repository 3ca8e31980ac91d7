"""Command-line experiments: tableaux, trajectories, order and drift studies.

Exit status is 0 on success, 1 on usage errors and 2 on numerical failure.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import io
import json
import math
import os
import sys

import numpy as np

from .integrator import SolverConfig, StepFailure, integrate
from .legendre import UnsupportedTruncationError
from .problems import energy_series, get_problem
from .tableau import (
    TableauError,
    build_lowrank_symplectic,
    build_rk,
    build_rkn,
    check_ks,
    export_tableau,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
ORDER_STUDY_STEPS = 25
REFERENCE_REFINEMENT = 10


class UsageError(Exception):
    pass


def fmt(x):
    """Shortest round-trip decimal; NaN becomes ``NA``."""
    x = float(x)
    return "NA" if math.isnan(x) else repr(x)


def _run(prob, k, s, h, n_steps, tol, family, scheme="fixed-point"):
    cfg = SolverConfig(h=h, n_steps=n_steps, tol=tol, scheme=scheme)
    return integrate(prob.second_order(), k, s, cfg, family=family)


def run_order_study(prob, s, k, h_list, T=None, tol=1e-14, family="rk", workers=4):
    """Terminal error at ``T`` for each step size and the observed order.

    Returns rows ``(h, error, order)``; ``order`` of row i compares rows i and
    i + 1 and is NaN for the last row or when an error vanishes.  Without an
    exact solution the reference is the same method at ``min(h) / 10``.
    """
    h_list = [float(h) for h in h_list]
    if len(h_list) < 4 or any(a <= b for a, b in zip(h_list, h_list[1:])):
        raise UsageError("--h-list needs at least 4 strictly decreasing step sizes")
    if T is None:
        T = ORDER_STUDY_STEPS * h_list[0]
    steps = []
    for h in h_list + [h_list[-1] / REFERENCE_REFINEMENT]:
        n = round(T / h)
        if n < 1 or abs(n * h - T) > 1e-9 * T:
            raise UsageError(f"final time {T} is not a multiple of step size {h}")
        steps.append(n)

    def final(h, n):
        return _run(prob, k, s, h, n, tol, family).states[-1]

    jobs = list(zip(h_list, steps))
    if prob.exact is not None:
        qe, pe = prob.exact(T)
        ref = np.concatenate([np.ravel(qe), np.ravel(pe)])
    else:
        jobs.append((h_list[-1] / REFERENCE_REFINEMENT, steps[-1]))
    if workers > 1 and prob.second_order().thread_safe:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(lambda job: final(*job), jobs))
    else:
        finals = [final(*job) for job in jobs]
    if prob.exact is None:
        ref = finals.pop()

    errors = [float(np.max(np.abs(x - ref))) for x in finals]
    rows = []
    for i, (h, e) in enumerate(zip(h_list, errors)):
        order = math.nan
        if i + 1 < len(errors) and e > 0 and errors[i + 1] > 0:
            order = math.log(e / errors[i + 1]) / math.log(h / h_list[i + 1])
        rows.append((h, e, order))
    return rows


def run_drift_study(prob, s, k, h, n_steps, tol=1e-14, family="rk"):
    """Rows ``(step, time, H, H - H0)`` along one run."""
    traj = _run(prob, k, s, h, n_steps, tol, family)
    return [(i, t, e, d) for i, (t, e, d) in enumerate(energy_series(prob, traj))]


def run_rkn_equiv(prob, s, k, h, n_steps, tol=1e-14):
    """Max deviation between the partitioned first-order run and the Nystrom run."""
    if s < 2:
        raise UnsupportedTruncationError(
            f"rkn-equiv requires s >= 2 (got s={s}): the Nystrom form with a single "
            "basis term has position weights b instead of b*(1-c)"
        )
    a = _run(prob, k, s, h, n_steps, tol, "rk")
    b = _run(prob, k, s, h, n_steps, tol, "rkn")
    return {
        "problem": prob.name, "k": k, "s": s, "h": h, "steps": n_steps,
        "max_q_deviation": float(np.max(np.abs(a.q - b.q))),
        "max_p_deviation": float(np.max(np.abs(a.p - b.p))),
    }


# -- output ------------------------------------------------------------------

def _csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, (int, str)) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(obj):
    return json.dumps(obj) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _cmd_tableau(a):
    family = a.family or "rk"
    if family == "rk":
        t = build_rk(a.k, a.s)
    elif family == "rkn":
        t = build_rkn(a.k, a.s)
    else:
        t = build_lowrank_symplectic(a.k, a.s)
    fmt_ = a.format or "json"
    data = export_tableau(t, fmt_)
    if fmt_ == "json":
        _emit(data.decode(), a.out)
    elif a.out is None:
        buf = io.StringIO()
        for name, raw in data.items():
            buf.write(f"# {name}\n{raw.decode()}")
        sys.stdout.write(buf.getvalue())
    else:
        os.makedirs(a.out, exist_ok=True)
        for name, raw in data.items():
            with open(os.path.join(a.out, name), "wb") as fh:
                fh.write(raw)


def _cmd_integrate(a):
    prob = get_problem(a.problem)
    traj = _run(prob, a.k, a.s, a.h, a.steps, a.tol, a.family or "rk")
    H = prob.H(traj.q, traj.p)
    if (a.format or "csv") == "json":
        _emit(_json_text({
            "problem": prob.name, "k": a.k, "s": a.s, "h": a.h,
            "times": traj.times.tolist(), "q": traj.q.tolist(), "p": traj.p.tolist(),
            "H": H.tolist(), "iterations": traj.iterations, "residuals": traj.residuals,
        }), a.out)
        return
    m = prob.m
    header = ["step", "time"] + [f"q{i}" for i in range(m)] + [f"p{i}" for i in range(m)] + ["H"]
    rows = [(i, t, *x, e) for i, (t, x, e) in enumerate(zip(traj.times, traj.states, H))]
    _emit(_csv_text(header, rows), a.out)


def _cmd_order_study(a):
    if not a.h_list:
        raise UsageError("--h-list is required for order-study")
    try:
        h_list = [float(v) for v in a.h_list.split(",")]
    except ValueError:
        raise UsageError(f"--h-list: cannot parse {a.h_list!r}") from None
    prob = get_problem(a.problem)
    T = (a.steps if a.steps is not None else ORDER_STUDY_STEPS) * h_list[0]
    rows = run_order_study(prob, a.s, a.k, h_list, T=T, tol=a.tol, family=a.family or "rk")
    if (a.format or "csv") == "json":
        _emit(_json_text([
            {"h": h, "error": e, "order": None if math.isnan(o) else o} for h, e, o in rows
        ]), a.out)
    else:
        _emit(_csv_text(["h", "error", "order"], rows), a.out)


def _cmd_drift_study(a):
    prob = get_problem(a.problem)
    rows = run_drift_study(prob, a.s, a.k, a.h, a.steps, a.tol, a.family or "rk")
    if (a.format or "csv") == "json":
        _emit(_json_text([dict(zip(("step", "time", "H", "drift"), r)) for r in rows]), a.out)
    else:
        _emit(_csv_text(["step", "time", "H", "drift"], rows), a.out)


def _cmd_rkn_equiv(a):
    prob = get_problem(a.problem)
    report = run_rkn_equiv(prob, a.s, a.k, a.h, a.steps, a.tol)
    if (a.format or "json") == "json":
        _emit(_json_text(report), a.out)
    else:
        _emit(_csv_text(["key", "value"], [(k, v) for k, v in report.items()]), a.out)


COMMANDS = {
    "tableau": _cmd_tableau,
    "integrate": _cmd_integrate,
    "order-study": _cmd_order_study,
    "drift-study": _cmd_drift_study,
    "rkn-equiv": _cmd_rkn_equiv,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid float value: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid int value: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid int value: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def build_parser():
    parser = _Parser(prog="hbvm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    defaults = {
        "tableau": dict(steps=None),
        "integrate": dict(steps=100),
        "order-study": dict(steps=None),
        "drift-study": dict(steps=1000),
        "rkn-equiv": dict(steps=100),
    }
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--k", type=_positive_int, required=True, help="quadrature nodes")
        p.add_argument("--s", type=_positive_int, required=True, help="polynomial degree")
        p.add_argument("--family", choices=("rk", "rkn", "lowrank") if name == "tableau" else ("rk", "rkn"))
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--out", help="output file (directory for csv tableaux)")
        if name == "tableau":
            continue
        p.add_argument("--problem", default="harmonic",
                       help="harmonic | pendulum | kepler:e | polyosc:d | henonheiles | free")
        p.add_argument("--steps", type=_nonneg_int, default=defaults[name]["steps"],
                       help="number of steps (order-study: steps at the largest h)")
        p.add_argument("--tol", type=_positive_float, default=1e-14)
        if name == "order-study":
            p.add_argument("--h-list", help="comma-separated, strictly decreasing")
        else:
            p.add_argument("--h", type=_positive_float, default=0.1)
    return parser


def parse_and_dispatch(argv=None):
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, argument errors exit 1
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        check_ks(a.k, a.s)
        # overflow on the way to divergence is reported as exit 2, not warnings
        with np.errstate(over="ignore", invalid="ignore"):
            COMMANDS[a.command](a)
    except StepFailure as exc:
        where = f" at step {exc.step}" if exc.step is not None else ""
        print(f"hbvm: numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, TableauError, UnsupportedTruncationError, ValueError) as exc:
        msg = str(exc)
        if isinstance(exc, TableauError) and "k >= s" in msg:
            msg = f"--k/--s: {msg}"
        elif isinstance(exc, UnsupportedTruncationError):
            msg = f"--s: {msg}"
        print(f"hbvm {a.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
