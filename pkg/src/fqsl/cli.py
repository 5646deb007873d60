"""Command-line interface: ``fqsl {op,solve,spectrum,verify}``.

Exit codes: 0 success, 1 numerical failure, 2 invalid input, 3 mathematical
precondition failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings

from .errors import ConvergenceError, QCalcError, SingularDeltaError, SpecError
from .funcspec import ProblemSpec, build_function, function_from_json, resolve_depth
from .lattice import Lattice
from .qfrac import (
    RightEdgePolicy,
    caputo_left,
    caputo_right,
    dleft_rl,
    dright_rl,
    ileft,
    iright,
)
from .qfslp import lipschitz_bound, solve_picard

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3

OPS = {
    "ileft": lambda al, f, edge: ileft(al, f),
    "iright": lambda al, f, edge: iright(al, f),
    "dleft": lambda al, f, edge: dleft_rl(al, f),
    "dright": lambda al, f, edge: dright_rl(al, f, edge),
    "cleft": lambda al, f, edge: caputo_left(al, f),
    "cright": lambda al, f, edge: caputo_right(al, f, edge),
}
SPECTRUM_COLUMNS = (
    "n",
    "lambda_n",
    "eq51_residual",
    "bc0_residual",
    "bc1_value_policyA",
    "bc1_value_policyB",
    "gram_offdiag_max",
)


class _InputError(Exception):
    """Raised by the argument parser instead of exiting."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _InputError(message)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _edge(value: float | None) -> RightEdgePolicy:
    return RightEdgePolicy("zero_extension") if value is None else RightEdgePolicy("user_value", value)


# -- commands --------------------------------------------------------------
def cmd_op(args) -> int:
    node = function_from_json(_read(args.fn))
    for name in ("q", "a", "alpha"):
        if not math.isfinite(getattr(args, name)):
            raise SpecError(f"--{name} must be finite")
    lat = Lattice(args.a, args.q, resolve_depth(args.depth))
    f = build_function(node, lat)
    g = OPS[args.op](args.alpha, f, _edge(args.edge_value))
    x, fv, gv = lat.visible, f.values, g.values
    if args.out == "csv":
        text = _csv(("j", "x", "f", "Of"), ((j, x[j], fv[j], gv[j]) for j in range(len(x))))
    else:
        rows = [{"j": j, "x": float(x[j]), "f": float(fv[j]), "Of": float(gv[j])} for j in range(len(x))]
        text = json.dumps({"op": args.op, "alpha": args.alpha, "q": args.q, "a": args.a, "rows": rows}, indent=2) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    spec = ProblemSpec.from_json(_read(args.problem))
    lam = args.lam if args.lam is not None else spec.lam
    if lam is None or not math.isfinite(lam):
        raise SpecError("lambda must be given by --lambda or the problem spec")
    prob = spec.to_problem(args.depth)
    f0 = build_function(function_from_json(_read(args.f0)), prob.lattice) if args.f0 else None
    tol = args.tol if args.tol is not None else spec.tolerances["tol"]
    max_iter = args.max_iter if args.max_iter is not None else spec.tolerances["max_iter"]
    bounds = {}
    for variant in ("sup", "l2_high", "l2_low"):
        try:
            b = lipschitz_bound(prob, lam, variant)
        except QCalcError as exc:
            bounds[variant] = {"applicable": False, "reason": str(exc)}
            continue
        bounds[variant] = {"applicable": True, "L": b.L, "threshold": b.threshold, "admissible": b.admissible}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            report = solve_picard(prob, lam, f0, tol=tol, max_iter=max_iter, raise_on_failure=False)
            out = report.to_dict()
        except ConvergenceError as exc:
            out = {"converged": False, "warning": str(exc)}
    out["lambda"] = lam
    out["bounds"] = bounds
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return EXIT_OK if out["converged"] else EXIT_FAIL


def cmd_spectrum(args) -> int:
    from . import spectrum

    if not 0 < args.mu < 1:
        raise SpecError("mu must lie in (0, 1)")
    if not args.beta > -1:
        raise SpecError("beta must exceed -1")
    if not 0 < args.q < 1:
        raise SpecError("q must lie in (0, 1)")
    if args.nmax < 0:
        raise SpecError("nmax must be >= 0")
    depth = resolve_depth(args.depth)
    lat = Lattice(1.0, args.q, depth if depth is not None else 48)
    rep = spectrum.verify_eigenpairs(args.nmax, args.mu, args.beta, lat, _edge(args.edge_value))
    rows = [
        (r.n, r.lam, r.eq51_residual, r.bc0_residual, r.bc1_value_policyA, r.bc1_value_policyB, r.gram_offdiag_max)
        for r in rep.rows
    ]
    _emit(_csv(SPECTRUM_COLUMNS, rows), args.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suite

    if args.suite not in SUITES + ("all",):
        raise SpecError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    t0 = time.perf_counter()
    rep = run_suite(args.suite, args.seed)
    for c in rep.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status}  {c.name}: {c.residual!r} <= {c.tol!r}")
    n_fail = len(rep.failures())
    print(f"{len(rep.checks) - n_fail}/{len(rep.checks)} checks passed in {time.perf_counter() - t0:.1f} s")
    for c in rep.failures():
        print(f"failed: {c.name}", file=sys.stderr)
    if args.json_report:
        _emit(rep.to_json() + "\n", args.json_report)
    return EXIT_OK if rep.passed else EXIT_FAIL


# -- parser ----------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fqsl", description="Fractional q-calculus and q-Sturm-Liouville toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("op", help="apply a fractional operator to a function spec")
    p.add_argument("--op", required=True, choices=sorted(OPS))
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--depth", type=int)
    p.add_argument("--fn", required=True, help="function spec (JSON file)")
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    p.add_argument("--edge-value", type=float, help="value at a/q for right derivatives (default 0)")
    p.add_argument("--output", help="output path (default stdout)")
    p.set_defaults(func=cmd_op)

    p = sub.add_parser("solve", help="solve the problem by fixed-point iteration")
    p.add_argument("--problem", required=True, help="problem spec (JSON file)")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--f0", help="initial guess (function spec file)")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--output", help="output path (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spectrum", help="check the little q-Jacobi eigenpairs")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--edge-value", type=float)
    p.add_argument("--out", dest="output", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run the identity suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json-report")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _InputError as exc:
        print(f"fqsl: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"fqsl: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SingularDeltaError as exc:
        print(f"fqsl: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (QCalcError, ValueError, ZeroDivisionError, ArithmeticError) as exc:
        print(f"fqsl: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
