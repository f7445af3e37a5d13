"""Closed-form consistency/robustness frontier and the public-signal baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
BETA_MIN = 1e-6
BETA_MAX = 1e6


@dataclass(frozen=True)
class FrontierPoint:
    C: float
    R: float
    # minimiser of the dual objective; 0.0 / inf when the infimum is a limit,
    # None for schemes that have no beta (the baseline)
    beta_argmin: Optional[float] = None


def _check_c(C: float) -> None:
    if not (0.0 <= C <= 1.0):
        raise ValueError(f"consistency must lie in [0, 1], got {C!r}")


def dual_objective(beta: float, C: float) -> float:
    """(1 + b) - C (b + b^2) ln(1 + 1/b)."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return (1.0 + beta) - C * (beta + beta * beta) * math.log1p(1.0 / beta)


def boundary_limits(C: float) -> tuple[float, float]:
    """Limits of the dual objective as beta -> 0 and beta -> inf.

    Expanding ln(1 + 1/b) for large b gives 1 + (1 - C) b - C/2 + O(1/b),
    so the upper limit is finite only at C = 1.
    """
    upper = 0.5 if C == 1.0 else math.inf
    return 1.0, upper


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   rtol: float = 1e-10, max_iter: int = 500) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on [lo, hi]; returns (argmin, min)."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(abs(a), abs(b), 1e-300):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def r_star(C: float, beta_max: float = BETA_MAX, scan_points: int = 400) -> FrontierPoint:
    """Largest robustness achievable at consistency ``C``.

    Log-spaced scan over beta, golden-section refinement in log(beta) around
    the best scan point, then comparison with both boundary limits.
    """
    _check_c(C)
    if scan_points < 200:
        raise ValueError("scan needs at least 200 points")
    log_lo, log_hi = math.log(BETA_MIN), math.log(beta_max)
    grid = np.linspace(log_lo, log_hi, scan_points)
    betas = np.exp(grid)
    vals = (1.0 + betas) - C * (betas + betas**2) * np.log1p(1.0 / betas)
    k = int(np.argmin(vals))
    best_beta, best_val = float(betas[k]), float(vals[k])

    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, scan_points - 1)]
    t, v = golden_section(lambda s: dual_objective(math.exp(s), C), a, b)
    if v < best_val:
        best_beta, best_val = math.exp(t), v

    at_zero, at_inf = boundary_limits(C)
    if at_inf <= best_val and at_inf <= at_zero:
        return FrontierPoint(C, at_inf, math.inf)
    if at_zero <= best_val:
        return FrontierPoint(C, at_zero, 0.0)
    return FrontierPoint(C, best_val, best_beta)


def symmetric_point(tol: float = 1e-8) -> FrontierPoint:
    """The C at which C == R*(C), by bisection on C - R*(C)."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid - r_star(mid).R > 0:
            hi = mid
        else:
            lo = mid
    c = 0.5 * (lo + hi)
    pt = r_star(c)
    return FrontierPoint(c, pt.R, pt.beta_argmin)


def baseline(C: float) -> FrontierPoint:
    """Guarantee of randomising between posting s and posting the monopoly price."""
    _check_c(C)
    return FrontierPoint(C, 1.0 - C, None)


def frontier_sweep(c_min: float = 0.0, c_max: float = 1.0, steps: int = 101) -> list[FrontierPoint]:
    if not (0.0 <= c_min <= c_max <= 1.0):
        raise ValueError("need 0 <= c_min <= c_max <= 1")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    return [r_star(float(c)) for c in np.linspace(c_min, c_max, steps)]
