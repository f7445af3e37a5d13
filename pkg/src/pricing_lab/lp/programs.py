"""Revenue LPs for a finite prior under a consistency requirement C.

Three formulations of the same optimum:

* ``solve_rev_reduced``: direct mechanism (x(v), p(v)) with all pairwise IC
  constraints, IR and the utility cap
  u(v) <= (1 - C) E[s] + E[(v - s)^+].
* ``solve_rev_posted``: a lottery over posted prices (one mass per support point).
* ``solve_dual``: the dual of the posted-price LP in (eta, beta) form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..prior import DiscretePrior
from .simplex import LpResult, StandardLp, solve_standard


class LpFailure(RuntimeError):
    """Raised when an LP that should be solvable is not."""


def _check_c(C: float) -> None:
    if not (0.0 <= C <= 1.0):
        raise ValueError(f"consistency must lie in [0, 1], got {C!r}")


def utility_cap(prior: DiscretePrior, C: float) -> np.ndarray:
    """(1 - C) E[s] + E[(v - s)^+] at each support value v."""
    v = prior.values
    excess = np.maximum(v[:, None] - v[None, :], 0.0) @ prior.probs
    return (1.0 - C) * prior.mean() + excess


def _require(res: LpResult, what: str) -> LpResult:
    if not res.ok:
        raise LpFailure(f"{what} LP ended with status {res.status}")
    return res


# ---------------------------------------------------------------------------
# direct mechanism
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MechanismSolution:
    values: np.ndarray
    C: float
    x: np.ndarray
    p: np.ndarray
    rev: float
    cap: np.ndarray

    @property
    def u(self) -> np.ndarray:
        return self.values * self.x - self.p

    def to_json(self) -> dict[str, Any]:
        return {"C": self.C, "rev": self.rev, "x": self.x.tolist(), "p": self.p.tolist()}


def solve_rev_reduced(prior: DiscretePrior, C: float) -> MechanismSolution:
    """Optimal revenue over IC/IR mechanisms respecting the utility cap.

    Solved in (x, u) with p = v x - u: IR becomes u >= 0 and every right-hand
    side is nonnegative, so the origin is a feasible start. Values are sorted,
    so the adjacent IC pairs imply monotone x and with it every other IC pair.
    """
    _check_c(C)
    v, f = prior.values, prior.probs
    n = v.size
    cap = utility_cap(prior, C)

    # IC for (true i, report j): u_j - u_i + (v_i - v_j) x_j <= 0, neighbours only
    pairs = [(i, i + 1) for i in range(n - 1)] + [(i + 1, i) for i in range(n - 1)]
    A = np.zeros((len(pairs), 2 * n))
    for r, (i, j) in enumerate(pairs):
        A[r, j] += v[i] - v[j]
        A[r, n + j] += 1.0
        A[r, n + i] -= 1.0
    c = np.concatenate([f * v, -f])
    bounds = [(0.0, 1.0)] * n + [(0.0, float(k)) for k in cap]
    lp = StandardLp(c, A, ["<="] * len(pairs), np.zeros(len(pairs)), bounds)
    res = _require(solve_standard(lp), "reduced mechanism")
    x = np.clip(res.x[:n], 0.0, 1.0)
    u = np.clip(res.x[n:], 0.0, None)
    p = v * x - u
    return MechanismSolution(v, C, x, p, float(f @ p), cap)


# ---------------------------------------------------------------------------
# posted-price lottery
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PriceLottery:
    prices: np.ndarray
    g: np.ndarray
    rev: float
    C: float

    def buyer_utility(self, v: np.ndarray) -> np.ndarray:
        """sum over prices t <= v of (v - t) g(t)."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return np.maximum(v[:, None] - self.prices[None, :], 0.0) @ self.g

    def to_json(self) -> dict[str, Any]:
        return {"C": self.C, "rev": self.rev, "prices": self.prices.tolist(), "g": self.g.tolist()}


def solve_rev_posted(prior: DiscretePrior, C: float) -> PriceLottery:
    """Randomised posted price with the cap imposed at support points.

    Between consecutive support points both the buyer's utility and the cap are
    linear in v, so checking the support points covers the whole range.
    """
    _check_c(C)
    v = prior.values
    n = v.size
    cap = utility_cap(prior, C)
    A = np.vstack([np.maximum(v[:, None] - v[None, :], 0.0), np.ones((1, n))])
    b = np.concatenate([cap, [1.0]])
    lp = StandardLp(prior.revenues(), A, ["<="] * (n + 1), b)
    res = _require(solve_standard(lp), "posted-price")
    g = np.clip(res.x, 0.0, None)
    return PriceLottery(v.copy(), g, float(prior.revenues() @ g), C)


# ---------------------------------------------------------------------------
# dual
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Dual pair (eta, beta) on the grid [0, v_1, ..., v_n].

    ``beta[0]`` is beta(0), the level multiplying (1 - C) E[s];
    ``beta[k]`` for k >= 1 is the level on [v_k, v_{k+1}); ``beta[-1] = 0``.
    """

    grid: np.ndarray
    beta: np.ndarray
    eta: float
    objective: float
    C: float

    def to_json(self) -> dict[str, Any]:
        return {"eta": self.eta, "beta": self.beta.tolist()}


def _dual_data(prior: DiscretePrior, C: float):
    v = prior.values
    n = v.size
    dv = np.diff(v)  # right differences, length n - 1
    below_or_at = np.cumsum(prior.probs)[:-1]  # P[V <= v_k] on (v_k, v_{k+1})
    # objective over (eta, beta_0, ..., beta_{n-1}); beta_n = 0 is not a variable
    c = np.zeros(n + 1)
    c[0] = 1.0
    c[1] = (1.0 - C) * prior.mean()
    c[2:] = dv * below_or_at
    # coverage row at t = v_j: eta + sum_{k >= j} beta_k dv_k >= v_j P[V >= v_j]
    cover = np.zeros((n, n + 1))
    cover[:, 0] = 1.0
    for j in range(n):
        cover[j, 2 + j:] = dv[j:]
    rhs = prior.revenues()
    # monotonicity beta_k - beta_{k-1} <= 0, k = 1..n-1
    mono = np.zeros((n - 1, n + 1))
    for k in range(1, n):
        mono[k - 1, 1 + k] = 1.0
        mono[k - 1, k] = -1.0
    return c, cover, rhs, mono


def solve_dual(prior: DiscretePrior, C: float) -> DualCertificate:
    _check_c(C)
    c, cover, rhs, mono = _dual_data(prior, C)
    n = prior.values.size
    A = np.vstack([cover, mono])
    senses = [">="] * n + ["<="] * (n - 1)
    b = np.concatenate([rhs, np.zeros(n - 1)])
    lp = StandardLp(c, A, senses, b, maximize=False)
    res = _require(solve_standard(lp), "dual")
    z = np.clip(res.x, 0.0, None)
    beta = np.concatenate([z[1:], [0.0]])
    grid = np.concatenate([[0.0], prior.values])
    return DualCertificate(grid, beta, float(z[0]), float(c @ z), C)


def dual_value(prior: DiscretePrior, C: float, eta: float, beta: np.ndarray) -> float:
    """Dual objective of an arbitrary (eta, beta) on the prior's grid."""
    c, *_ = _dual_data(prior, C)
    return float(c @ np.concatenate([[eta], beta[:-1]]))


def dual_violation(prior: DiscretePrior, cert: DualCertificate) -> float:
    """Largest violation of coverage, monotonicity, sign and beta(v_max) = 0."""
    _, cover, rhs, _ = _dual_data(prior, cert.C)
    z = np.concatenate([[cert.eta], cert.beta[:-1]])
    worst = float(np.max(rhs - cover @ z, initial=0.0))
    worst = max(worst, float(np.max(np.diff(cert.beta), initial=0.0)))
    worst = max(worst, -cert.eta, -float(cert.beta.min()), abs(float(cert.beta[-1])))
    return worst


def duality_gap(prior: DiscretePrior, C: float) -> tuple[PriceLottery, DualCertificate, float]:
    primal = solve_rev_posted(prior, C)
    dual = solve_dual(prior, C)
    return primal, dual, abs(dual.objective - primal.rev)


def rev_ratio(prior: DiscretePrior, C: float) -> float:
    """Rev(F, C) / OPT(F) via the posted-price LP."""
    opt = prior.monopoly()[1]
    if opt <= 0:
        return math.nan
    return solve_rev_posted(prior, C).rev / opt
