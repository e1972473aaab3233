"""wernerlab command line: evaluate forms, run property suites, search for violations.

Exit codes: 0 success, 1 a verification suite failed, 2 usage, input or I/O
error, 3 a violation was found while ``--expect-positive`` was set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import checks
from .forms import FormSpec, diagonal_pair_counterexample, q_form_breakdown
from .search import (
    VIOLATION_TOL,
    alpha_opt_estimate,
    minimize_form,
    parse_grid,
    random_matrix,
    sweep_grid,
    write_csv,
)
from .tensorspace import flip, from_json, identity
from .werner import WernerParams, werner_state

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2, 3
SEED_ENV = "WERNERLAB_SEED"
BUILDERS = ("identity", "flip", "werner", "diagonal-pair", "structured")


class UsageError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _p_value(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid norm index {text!r}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}")


def _emit(obj, out_path=None) -> None:
    text = json.dumps(obj, indent=2, default=_json_default)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _json_default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def _form_args(p: argparse.ArgumentParser, alpha_default=None) -> None:
    p.add_argument("--v", type=_int_list, help="sign vector, e.g. 1,1 (default: all ones)")
    p.add_argument("--alpha", type=float, default=alpha_default)
    p.add_argument("--p", type=_p_value, default=2.0, help="Schatten index (>= 1, 'inf' allowed)")
    p.add_argument("--gamma", type=float, default=2.0)


def _search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dims", type=_int_list, default=(2, 2))
    p.add_argument("--rank", type=int, default=None, help="rank bound (default: full)")
    p.add_argument("--field", choices=("complex", "real"), default="complex")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-iters", type=int, default=400)
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default: ${SEED_ENV} or 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wernerlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate q_v(p, gamma, alpha, C)")
    src = ev.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="matrix JSON file {dims, re, im}")
    src.add_argument("--builder", choices=BUILDERS)
    ev.add_argument("--dims", type=_int_list, help="dims for identity/structured builders")
    ev.add_argument("--d", type=int, default=2, help="local dimension for flip/werner/diagonal-pair")
    ev.add_argument("--n", type=int, default=2, help="number of systems for diagonal-pair")
    ev.add_argument("--eps", type=float, default=0.1, help="diagonal-pair epsilon")
    ev.add_argument("--state-alpha", type=float, default=0.0, help="Werner parameter of the werner builder")
    ev.add_argument("--rank", type=int, default=2, help="rank of the structured builder")
    ev.add_argument("--seed", type=int, default=None)
    _form_args(ev)

    ve = sub.add_parser("verify", help="run property suites")
    ve.add_argument("--suite", default="all", help=f"one of {', '.join(checks.SUITES)} or all")
    ve.add_argument("--trials", type=int, default=None, help="trials per suite (default: per-suite)")
    ve.add_argument("--n-max", type=int, default=12, help="largest even n for binomial-identity")
    ve.add_argument("--seed", type=int, default=None)
    ve.add_argument("--json", action="store_true", help="print a JSON summary instead of lines")

    se = sub.add_parser("search", help="minimise a form over rank-r matrices")
    _form_args(se, alpha_default=0.0)
    _search_args(se)
    se.add_argument("--expect-positive", action="store_true", help="exit 3 if a violation is found")
    se.add_argument("--out", help="also write the JSON report here")

    al = sub.add_parser("alpha", help="bisect for the positivity boundary")
    al.add_argument("--v", type=_int_list)
    al.add_argument("--p", type=_p_value, default=2.0)
    al.add_argument("--gamma", type=float, default=2.0)
    _search_args(al)
    al.add_argument("--tol", type=float, default=0.01, help="bisection tolerance")
    al.add_argument("--out")

    sw = sub.add_parser("sweep", help="boundary estimate on a (p, gamma) grid, CSV output")
    sw.add_argument("--v", type=_int_list)
    sw.add_argument("--p", default="1:4:0.5", help="grid start:stop:step or comma list")
    sw.add_argument("--gamma", default="1:4:0.5")
    _search_args(sw)
    sw.set_defaults(field="real")
    sw.add_argument("--tol", type=float, default=0.01)
    sw.add_argument("--out", help="CSV path (default: stdout)")
    return parser


# -- commands ---------------------------------------------------------------------

def _build_matrix(args):
    if args.input:
        with open(args.input) as fh:
            obj = json.load(fh)
        return from_json(obj)
    b = args.builder
    if b == "identity":
        return identity(args.dims or (2, 2))
    if b == "flip":
        return flip(args.d)
    if b == "werner":
        return werner_state(WernerParams(args.d, args.state_alpha))
    if b == "diagonal-pair":
        return diagonal_pair_counterexample(args.n, args.d, args.eps).C
    return random_matrix("structured_rank1_plus_normal", args.dims or (2, 2), args.rank,
                         seed=args.seed if args.seed is not None else _default_seed())


def cmd_eval(args) -> int:
    C = _build_matrix(args)
    v = args.v or (1,) * C.n
    alpha = args.alpha
    if alpha is None:
        alpha = -0.5 - args.eps if args.builder == "diagonal-pair" else 0.0
    spec = FormSpec(v, alpha, args.p, args.gamma)
    if spec.n != C.n:
        raise ValueError(f"sign vector has length {spec.n} but the matrix has {C.n} subsystems")
    terms = q_form_breakdown(spec, C)
    q = sum(coef * nrm ** spec.gamma for nrm, coef in terms.values())
    _emit({
        "q": q,
        "spec": {"v": list(spec.v), "alpha": spec.alpha, "p": spec.p, "gamma": spec.gamma},
        "dims": list(C.dims),
        "breakdown": [{"J": list(J), "norm": nrm, "coef": coef} for J, (nrm, coef) in terms.items()],
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    if any(n not in checks.SUITES for n in names):
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(checks.SUITES)} or all")
    seed = args.seed if args.seed is not None else _default_seed()
    results = []
    for name in names:
        kwargs = {"n_max": args.n_max} if name == "binomial-identity" else {}
        results.append(checks.run_suite(name, args.trials, seed, **kwargs))
    ok = all(r.passed for r in results)
    if args.json:
        _emit({"seed": seed, "passed": ok, "suites": [r.to_dict() for r in results]})
    else:
        for r in results:
            print("\n".join(r.lines()))
        print(f"{'PASS' if ok else 'FAIL'}: {sum(r.passed for r in results)}/{len(results)} suites, seed={seed}")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_search(args) -> int:
    dims = args.dims
    spec = FormSpec(args.v or (1,) * len(dims), args.alpha, args.p, args.gamma)
    seed = args.seed if args.seed is not None else _default_seed()
    r = args.rank if args.rank is not None else math.prod(dims)
    rep = minimize_form(spec, dims, r, args.field, args.restarts, args.max_iters, seed)
    out = rep.to_dict()
    out["settings"] = {"max_iters": args.max_iters}
    _emit(out, args.out)
    if args.expect_positive and rep.violation:
        print(f"violation found: best value {rep.best_value:.6g} < -{VIOLATION_TOL:g}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_alpha(args) -> int:
    dims = args.dims
    v = args.v or (1,) * len(dims)
    seed = args.seed if args.seed is not None else _default_seed()
    est = alpha_opt_estimate(v, args.p, args.gamma, args.rank, dims, args.field, args.tol, seed,
                             args.restarts, args.max_iters)
    _emit({
        "estimate": est.estimate,
        "proven_lower": est.proven_lower,
        "estimate_is_upper_bound_heuristic": est.upper_bound_only,
        "v": list(v), "p": args.p, "gamma": args.gamma, "rank": args.rank or math.prod(dims),
        "dims": list(dims), "field": args.field, "seed": seed, "restarts": args.restarts,
        "max_iters": args.max_iters, "bisect_tol": args.tol, "violation_tol": VIOLATION_TOL,
        "alpha_trace": [list(t) for t in est.alpha_trace],
    }, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    dims = args.dims
    v = args.v or (1,) * len(dims)
    seed = args.seed if args.seed is not None else _default_seed()
    ps, gs = parse_grid(args.p), parse_grid(args.gamma)
    rows = sweep_grid(v, ps, gs, args.rank, dims, args.field, seed, args.out, args.restarts, args.tol,
                      args.max_iters)
    if args.out is None:
        write_csv(rows, sys.stdout)
    else:
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "search": cmd_search, "alpha": cmd_alpha, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
