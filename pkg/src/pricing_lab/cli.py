"""Command-line entry point.

Exit codes: 0 success, 1 a numeric check failed, 2 bad flags or input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from . import frontier, mechanisms, verify, worstcase
from .lp import programs
from .prior import DiscretePrior, PriorError, discretize, parse_prior

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
GAP_TOL = 1e-6
SIG = 12


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    """12 significant digits; 'inf' / '-inf' / 'nan' spelled out."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG}g}"


def _clean(obj: Any) -> Any:
    """Round floats to 12 significant digits; non-finite floats become strings."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else fmt(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _clean(obj.item())
    return obj


def dump_json(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _c_value(text: str) -> float:
    try:
        c = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= c <= 1.0:
        raise argparse.ArgumentTypeError("C must lie in [0, 1]")
    return c


def _load_prior(text: Optional[str]):
    if text is None:
        raise UsageError("--prior is required")
    try:
        return parse_prior(text)
    except (PriorError, ValueError) as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_frontier(args: argparse.Namespace) -> int:
    if args.symmetric:
        pts = [frontier.symmetric_point()]
    else:
        if args.steps < 2:
            raise UsageError("--steps must be at least 2")
        if not 0.0 <= args.c_min <= args.c_max <= 1.0:
            raise UsageError("need 0 <= --c-min <= --c-max <= 1")
        pts = frontier.frontier_sweep(args.c_min, args.c_max, args.steps)
    rows = [(p.C, p.R, p.beta_argmin, frontier.baseline(p.C).R) for p in pts]
    if args.format == "json":
        _emit(dump_json([{"C": c, "R_star": r, "beta_argmin": b, "baseline_R": base}
                         for c, r, b, base in rows]), args.output)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["C", "R_star", "beta_argmin", "baseline_R"])
        for c, r, b, base in rows:
            w.writerow([fmt(c), fmt(r), "" if b is None else fmt(b), fmt(base)])
        _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _as_discrete(prior, grid: int) -> DiscretePrior:
    if isinstance(prior, DiscretePrior):
        return prior
    try:
        return discretize(prior, grid)
    except PriorError as exc:
        raise UsageError(str(exc)) from None


def cmd_rev(args: argparse.Namespace) -> int:
    if args.c is None:
        raise UsageError("--c is required")
    prior = _as_discrete(_load_prior(args.prior), args.grid)
    sol = programs.solve_rev_reduced(prior, args.c)
    lottery, dual, gap = programs.duality_gap(prior, args.c)
    price, opt = prior.monopoly()
    out = {
        "C": args.c,
        "opt": opt,
        "rev": lottery.rev,
        "mechanism": sol.to_json(),
        "lottery": lottery.to_json(),
        "dual": dual.to_json(),
        "gap": gap,
    }
    _emit(dump_json(out), args.output)
    return EXIT_OK if gap <= GAP_TOL else EXIT_FAIL


def cmd_mech(args: argparse.Namespace) -> int:
    prior = _load_prior(args.prior)
    name = args.mechanism
    try:
        if name == "guess-discount":
            rep = mechanisms.guess_discount_eval(prior)
        elif name == "hidden-price":
            rep = mechanisms.hidden_price_eval(prior)
        elif name == "heavy-tail":
            if args.eps is None:
                raise UsageError("heavy-tail needs --eps")
            if not 0.0 < args.eps < 1.0:
                raise UsageError("--eps must lie strictly between 0 and 1")
            params = mechanisms.heavy_tail_params(prior, args.eps)
            rep = mechanisms.heavy_tail_eval(prior, params)
        else:
            if args.lam is None:
                raise UsageError("baseline needs --lam")
            if not 0.0 <= args.lam <= 1.0:
                raise UsageError("--lam must lie in [0, 1]")
            rep = mechanisms.public_baseline_eval(prior, args.lam)
    except mechanisms.InsufficientTailMass as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(dump_json(rep.to_json()), args.output)
    return EXIT_OK


def cmd_envelope(args: argparse.Namespace) -> int:
    if args.c is None:
        raise UsageError("--c is required")
    if args.params is not None:
        text = args.params
        try:
            raw = json.loads(Path(text).read_text() if Path(text).is_file() else text)
            params = worstcase.EnvelopeParams.from_json(raw)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"bad envelope parameters: {exc}") from None
    elif args.beta is not None:
        if args.beta <= 0 or args.T <= 0:
            raise UsageError("--beta and --T must be positive")
        params = worstcase.f_beta_params(args.T, args.beta)
    else:
        raise UsageError("give --params or --beta")
    try:
        prior = worstcase.envelope_distribution(params, args.c)
    except worstcase.EnvelopeError as exc:
        raise UsageError(str(exc)) from None
    out: dict[str, Any] = {
        "params": params.to_json(),
        "v_L": prior.v_L,
        "v_H": prior.v_H,
        "opt": prior.monopoly()[1],
        "objective": worstcase.dual_objective_eval(prior, params, args.c),
    }
    status = EXIT_OK
    if out["objective"] < params.T:
        try:
            elim = worstcase.eliminate_eta(params, args.c)
            out["eliminate_eta"] = elim.to_json()
            if not elim.fallback:
                out["step_reduce"] = worstcase.step_reduce(elim.params, args.c).to_json()
        except worstcase.EnvelopeError as exc:
            out["error"] = str(exc)
            status = EXIT_FAIL
    _emit(dump_json(out), args.output)
    return status


def cmd_verify(args: argparse.Namespace) -> int:
    suites = verify.SUITES if args.suite == "all" else (args.suite,)
    cases = verify.TIGHTNESS_CASES
    if args.beta is not None or args.c is not None:
        if args.beta is None or args.c is None:
            raise UsageError("--beta and --c go together")
        if args.beta <= 0:
            raise UsageError("--beta must be positive")
        cases = ((args.c, args.beta),)
    if args.grid < 50:
        raise UsageError("--grid must be at least 50")
    if args.corpus_size < 1:
        raise UsageError("--corpus-size must be positive")
    rows = verify.run_suites(suites, seed=args.seed, size=args.corpus_size,
                             inject_fault=args.inject_fault, tightness_cases=cases, grid_n=args.grid)
    if args.format == "json":
        _emit(dump_json([r.to_json() for r in rows]), args.output)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "check", "max_violation", "tol", "cases", "status", "detail"])
        for r in rows:
            w.writerow([r.suite, r.check, fmt(r.max_violation), fmt(r.tol), r.cases,
                        "pass" if r.ok else "FAIL", r.detail])
        _emit(buf.getvalue(), args.output)
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pricing-lab",
                                 description="Consistency/robustness tradeoffs for pricing with unreliable signals.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, formats: bool = True) -> None:
        if formats:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", help="write here instead of standard output")

    p = sub.add_parser("frontier", help="sweep R*(C) and the public-signal baseline")
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--c-min", type=float, default=0.0)
    p.add_argument("--c-max", type=float, default=1.0)
    p.add_argument("--symmetric", action="store_true", help="only the point with C = R*(C)")
    common(p)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("rev", help="solve the revenue LPs and the dual for a prior")
    p.add_argument("--prior", required=True)
    p.add_argument("--c", type=_c_value)
    p.add_argument("--grid", type=int, default=200, help="atoms when discretising an analytic prior")
    common(p, formats=False)
    p.set_defaults(func=cmd_rev)

    p = sub.add_parser("mech", help="evaluate an explicit mechanism")
    p.add_argument("mechanism", choices=("guess-discount", "hidden-price", "heavy-tail", "baseline"))
    p.add_argument("--prior", required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--lam", type=float)
    common(p, formats=False)
    p.set_defaults(func=cmd_mech)

    p = sub.add_parser("envelope", help="worst-case prior for a dual step function")
    p.add_argument("--params", help="envelope JSON (inline or file)")
    p.add_argument("--beta", type=float, help="single-step level; builds F_beta")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--c", type=_c_value)
    common(p, formats=False)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--suite", choices=("all",) + verify.SUITES, default="all")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--corpus-size", type=int, default=100)
    p.add_argument("--inject-fault", choices=("payment",))
    p.add_argument("--beta", type=float)
    p.add_argument("--c", type=_c_value)
    p.add_argument("--grid", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
