"""Property suites over a seeded prior corpus.

Each suite returns a list of ``CheckResult`` rows (one per property), so the
CLI can print a single table and exit nonzero if any row fails.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np

from . import frontier
from .lp.lift import lift_to_signal, verify_star
from .lp.programs import (DualCertificate, MechanismSolution, PriceLottery, solve_dual,
                          solve_rev_posted, solve_rev_reduced)
from .prior import DiscretePrior, random_corpus
from .worstcase import tightness_check

C_GRID = (0.0, 0.3, 0.7, 1.0)
DUALITY_TOL = 1e-6
REPRESENTATION_TOL = 1e-7
ACHIEVABILITY_TOL = 1e-6
STAR_TOL = 1e-8
TIGHTNESS_CASES = ((1.0, 1.0), (1.0, 4.0), (0.5, 1.0))
SUITES = ("duality", "lift", "tightness", "frontier")

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    """PRICING_LAB_THREADS, with 0 or unset meaning one thread per CPU."""
    raw = os.environ.get("PRICING_LAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"PRICING_LAB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("PRICING_LAB_THREADS must be nonnegative")
    return n if n > 0 else (os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Order-preserving map, threaded when more than one worker is allowed."""
    workers = min(thread_count(), max(len(items), 1))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class CheckResult:
    suite: str
    check: str
    max_violation: float
    tol: float
    cases: int
    detail: str = ""

    @property
    def ok(self) -> bool:
        return bool(self.max_violation <= self.tol)

    def to_json(self) -> dict[str, Any]:
        return {"suite": self.suite, "check": self.check, "max_violation": self.max_violation,
                "tol": self.tol, "cases": self.cases, "ok": self.ok, "detail": self.detail}


@dataclass(frozen=True, eq=False)
class CorpusSolve:
    prior: DiscretePrior
    C: float
    opt: float
    reduced: MechanismSolution
    posted: PriceLottery
    dual: DualCertificate


_CACHE: dict[tuple, list[CorpusSolve]] = {}


def _solve_one(job: tuple[DiscretePrior, float]) -> CorpusSolve:
    prior, C = job
    return CorpusSolve(prior, C, prior.monopoly()[1], solve_rev_reduced(prior, C),
                       solve_rev_posted(prior, C), solve_dual(prior, C))


def solve_corpus(seed: int = 42, size: int = 100, c_grid: Iterable[float] = C_GRID) -> list[CorpusSolve]:
    """All three LPs for every (prior, C); memoised per (seed, size, C grid)."""
    c_grid = tuple(float(c) for c in c_grid)
    key = (seed, size, c_grid)
    if key not in _CACHE:
        jobs = [(p, c) for p in random_corpus(size, seed) for c in c_grid]
        _CACHE[key] = parallel_map(_solve_one, jobs)
    return _CACHE[key]


def suite_duality(solves: Sequence[CorpusSolve]) -> list[CheckResult]:
    gap = rep = short = 0.0
    r_star = {c: frontier.r_star(c).R for c in {s.C for s in solves}}
    for s in solves:
        scale = max(1.0, s.opt)
        gap = max(gap, abs(s.posted.rev - s.dual.objective) / scale)
        rep = max(rep, abs(s.reduced.rev - s.posted.rev) / scale)
        if s.opt > 0:
            short = max(short, r_star[s.C] - s.posted.rev / s.opt)
    n = len(solves)
    return [
        CheckResult("duality", "posted_vs_dual", gap, DUALITY_TOL, n, "|posted - dual| / max(1, OPT)"),
        CheckResult("duality", "reduced_vs_posted", rep, REPRESENTATION_TOL, n,
                    "|reduced - posted| / max(1, OPT)"),
        CheckResult("duality", "achievability", max(short, 0.0), ACHIEVABILITY_TOL, n,
                    "R*(C) - Rev/OPT"),
    ]


def suite_lift(solves: Sequence[CorpusSolve], inject_fault: Optional[str] = None) -> list[CheckResult]:
    worst = 0.0
    family = ""
    for s in solves:
        lifted = lift_to_signal(s.prior, s.C, s.reduced)
        rep = verify_star(s.prior, s.C, lifted)
        if rep.max_violation > worst:
            worst, family = rep.max_violation, rep.worst_cell[0] if rep.worst_cell else ""
    rows = [CheckResult("lift", "star_constraints", worst, STAR_TOL, len(solves), family)]
    if inject_fault is not None:
        if inject_fault != "payment":
            raise ValueError(f"unknown fault {inject_fault!r}")
        s = solves[0]
        lifted = lift_to_signal(s.prior, s.C, s.reduced).with_payment_fault(0, 0, 0.1)
        rep = verify_star(s.prior, s.C, lifted)
        cell = rep.worst_cell[0] if rep.worst_cell else ""
        rows.append(CheckResult("lift", "injected_payment_fault", rep.max_violation, STAR_TOL, 1, cell))
    return rows


def suite_tightness(cases: Iterable[tuple[float, float]] = TIGHTNESS_CASES,
                    grid_n: int = 200, T: float = 1.0) -> list[CheckResult]:
    rows = []
    for C, beta in cases:
        rep = tightness_check(C, beta, T, grid_n)
        excess = max(rep.lower - rep.delta - rep.ratio, rep.ratio - rep.upper - rep.delta, 0.0)
        rows.append(CheckResult(
            "tightness", f"C={C:g},beta={beta:g}", excess, 0.0, 1,
            f"{rep.lower:.6f} - {rep.delta:g} <= {rep.ratio:.6f} <= {rep.upper:.6f} + {rep.delta:g}"))
    return rows


def suite_frontier(steps: int = 101) -> list[CheckResult]:
    pts = frontier.frontier_sweep(0.0, 1.0, steps)
    R = np.array([p.R for p in pts])
    C = np.array([p.C for p in pts])
    dominance = float(np.max((1.0 - C) - R))
    monotone = float(np.max(np.diff(R), initial=0.0))
    concave = float(np.max(0.5 * (R[:-2] + R[2:]) - R[1:-1], initial=0.0))
    margins = [frontier.r_star(c).R - (1.0 - c) for c in (0.25, 0.5, 0.75, 1.0)]
    return [
        CheckResult("frontier", "dominance", max(dominance, 0.0), 0.0, steps, "(1 - C) - R*(C)"),
        CheckResult("frontier", "strict_margin", max(0.01 - min(margins), 0.0), 0.0, 4,
                    "0.01 - min margin at C in {0.25, 0.5, 0.75, 1}"),
        CheckResult("frontier", "monotone", monotone, 1e-12, steps, "R*(C_k+1) - R*(C_k)"),
        CheckResult("frontier", "concave", concave, 1e-9, steps, "midpoint deficit"),
    ]


def run_suites(suites: Iterable[str] = SUITES, seed: int = 42, size: int = 100,
               inject_fault: Optional[str] = None,
               tightness_cases: Iterable[tuple[float, float]] = TIGHTNESS_CASES,
               grid_n: int = 200) -> list[CheckResult]:
    suites = list(suites)
    for s in suites:
        if s not in SUITES:
            raise ValueError(f"unknown suite {s!r}")
    rows: list[CheckResult] = []
    need_corpus = any(s in ("duality", "lift") for s in suites)
    solves = solve_corpus(seed, size) if need_corpus else []
    for s in suites:
        if s == "duality":
            rows += suite_duality(solves)
        elif s == "lift":
            rows += suite_lift(solves, inject_fault)
        elif s == "tightness":
            rows += suite_tightness(tightness_cases, grid_n)
        else:
            rows += suite_frontier()
    return rows
