"""Lift a reduced mechanism back to a signal-dependent one and audit it.

For each report v the lifted rule allocates when the seller's signal s lies
below a cutoff t(v), with a tie probability alpha(v) on the atom at t(v), so
that E_s[x(s, v)] = x(v). Payments follow

    p(s, v) = s x(s, v) - (1 - C) s + p(v) - E_s'[s' x(s', v) - (1 - C) s']

which keeps E_s[p(s, v)] = p(v). In the accurate state the contract is fixed
at x = 1, p = C v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

import numpy as np

from ..prior import DiscretePrior
from .programs import MechanismSolution, utility_cap

CAP_TOL = 1e-8
STAR_TOL = 1e-8


class LiftError(ValueError):
    """The reduced mechanism cannot be lifted (it violates the utility cap)."""


@dataclass(frozen=True, eq=False)
class LiftedMechanism:
    """Signal-dependent hallucinatory-state rule; rows index s, columns index v."""

    values: np.ndarray
    probs: np.ndarray
    C: float
    cutoff: np.ndarray  # -inf where x(v) = 0
    alpha: np.ndarray
    offset: np.ndarray  # p(v) - E_s[s x(s, v) - (1 - C) s]
    x_matrix: np.ndarray
    p_matrix: np.ndarray
    target_x: np.ndarray
    target_p: np.ndarray

    def expected_x(self) -> np.ndarray:
        return self.probs @ self.x_matrix

    def expected_p(self) -> np.ndarray:
        return self.probs @ self.p_matrix

    def with_payment_fault(self, s_idx: int, v_idx: int, delta: float = 0.1) -> "LiftedMechanism":
        """Copy with ``delta`` added to a single payment cell."""
        p = self.p_matrix.copy()
        p[s_idx, v_idx] += delta
        return replace(self, p_matrix=p)

    def to_json(self) -> dict[str, Any]:
        return {
            "C": self.C,
            "cutoff": [None if math.isinf(t) else float(t) for t in self.cutoff],
            "alpha": self.alpha.tolist(),
            "offset": self.offset.tolist(),
        }


def lift_to_signal(prior: DiscretePrior, C: float, sol: MechanismSolution) -> LiftedMechanism:
    v, f = prior.values, prior.probs
    n = v.size
    if sol.x.shape != (n,) or sol.p.shape != (n,):
        raise LiftError("solution does not match the prior's support")
    cap = utility_cap(prior, C)
    u = v * sol.x - sol.p
    excess = float(np.max(u - cap))
    if excess > CAP_TOL:
        raise LiftError(f"utility cap violated by {excess:.3g}")

    below = np.concatenate([[0.0], np.cumsum(f)[:-1]])  # F(v_k) = P[s < v_k]
    upto = np.cumsum(f)
    cutoff = np.full(n, -math.inf)
    alpha = np.ones(n)
    X = np.zeros((n, n))
    for j in range(n):
        xj = float(np.clip(sol.x[j], 0.0, 1.0))
        if xj <= 0.0:
            continue
        k = int(np.searchsorted(upto, xj - 1e-15, side="left"))
        k = min(k, n - 1)
        cutoff[j] = v[k]
        alpha[j] = float(np.clip((xj - below[k]) / f[k], 0.0, 1.0))
        X[:k, j] = 1.0
        X[k, j] = alpha[j]

    rebate = (1.0 - C) * v
    offset = sol.p - (f @ (v[:, None] * X) - f @ rebate)
    P = v[:, None] * X - rebate[:, None] + offset[None, :]
    return LiftedMechanism(
        values=v.copy(), probs=f.copy(), C=float(C), cutoff=cutoff, alpha=alpha,
        offset=offset, x_matrix=X, p_matrix=P,
        target_x=sol.x.copy(), target_p=sol.p.copy(),
    )


@dataclass
class StarReport:
    """Largest violation per constraint family; ``ok`` iff all within tolerance."""

    violations: dict[str, float] = field(default_factory=dict)
    worst_cell: Optional[tuple[str, tuple[int, ...]]] = None
    tol: float = STAR_TOL

    @property
    def max_violation(self) -> float:
        return max(self.violations.values(), default=0.0)

    @property
    def ok(self) -> bool:
        return self.max_violation <= self.tol

    def to_json(self) -> dict[str, Any]:
        return {"max_violation": self.max_violation, "ok": self.ok, "families": self.violations}


def verify_star(prior: DiscretePrior, C: float, lifted: LiftedMechanism) -> StarReport:
    """Brute-force audit over every (v, v') pair and every signal realisation.

    Families:
      ic_h         E_s[v x(s,v) - p(s,v)] >= E_s[v x(s,v') - p(s,v')]
      ic_a_to_h    v - C v >= v x(v,v') - p(v,v')   (signal equals v)
      ir_h, ir_a   nonnegative utility in both states
      consistency  accurate-state payment C v >= C v
      feasibility  0 <= x(s, v) <= 1
      round_trip   E_s x(s,v) = x(v), E_s p(s,v) = p(v)
      payment_rule every cell matches the lift's payment identity
    """
    v, f = prior.values, prior.probs
    X, P = lifted.x_matrix, lifted.p_matrix
    ex = f @ X  # E_s x(s, v') per report v'
    ep = f @ P
    # utility of true value v (rows) reporting v' (cols) in the hallucinatory state
    util_h = v[:, None] * ex[None, :] - ep[None, :]
    truthful_h = np.diag(util_h)
    viol: dict[str, float] = {}
    cells: dict[str, tuple[int, ...]] = {}

    def record(name: str, arr: np.ndarray) -> None:
        arr = np.asarray(arr, dtype=float)
        if arr.size == 0:
            viol[name] = 0.0
            return
        k = int(np.argmax(arr))
        viol[name] = max(0.0, float(arr.flat[k]))
        cells[name] = tuple(int(i) for i in np.unravel_index(k, arr.shape))

    record("ic_h", util_h - truthful_h[:, None])
    # accurate state: the seller's signal equals the true value v (row s = v)
    acc_util = v - C * v
    record("ic_a_to_h", v[:, None] * X - P - acc_util[:, None])
    record("ir_h", -truthful_h)
    record("ir_a", -acc_util)
    record("consistency", C * v - C * v)
    record("feasibility", np.maximum(X - 1.0, -X))
    record("round_trip", np.concatenate([np.abs(ex - lifted.target_x), np.abs(ep - lifted.target_p)]))
    rule = v[:, None] * X - ((1.0 - C) * v)[:, None] + lifted.offset[None, :]
    record("payment_rule", np.abs(P - rule))

    worst = max(viol, key=viol.get) if viol else None
    return StarReport(violations=viol, worst_cell=(worst, cells.get(worst, ())) if worst else None)
