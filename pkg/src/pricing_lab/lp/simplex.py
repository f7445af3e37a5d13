"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Problems here have at most a few hundred rows, so a dense tableau is fine and
keeps each pivot auditable. The final basic solution is re-solved directly
from the basis matrix to strip accumulated pivoting error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

PIVOT_TOL = 1e-9
COST_TOL = 1e-10
FEAS_TOL = 1e-9
PIVOT_REL = 0.1

SENSES = ("<=", "=", ">=")


class LpError(ValueError):
    """Malformed linear program."""


@dataclass
class StandardLp:
    """optimise c.x subject to rows ``A x (sense) b`` and per-variable bounds."""

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    bounds: Optional[Sequence[tuple[float, float]]] = None
    maximize: bool = True

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        self.A = A
        self.b = np.asarray(self.b, dtype=float).ravel()
        if A.ndim != 2 or A.shape[1] != n:
            raise LpError(f"constraint matrix has shape {A.shape}, expected (m, {n})")
        if self.b.size != A.shape[0] or len(self.senses) != A.shape[0]:
            raise LpError("rows, senses and right-hand sides disagree in length")
        if any(s not in SENSES for s in self.senses):
            raise LpError(f"senses must be among {SENSES}")
        if self.bounds is None:
            self.bounds = [(0.0, math.inf)] * n
        if len(self.bounds) != n:
            raise LpError("one (lo, hi) bound pair per variable")
        for lo, hi in self.bounds:
            if lo > hi or lo == math.inf or hi == -math.inf:
                raise LpError(f"invalid bound ({lo}, {hi})")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.c))):
            raise LpError("LP data must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation at ``x``."""
        worst = 0.0
        if self.A.shape[0]:
            ax = self.A @ x
            for s, lhs, rhs in zip(self.senses, ax, self.b):
                if s == "<=":
                    worst = max(worst, lhs - rhs)
                elif s == ">=":
                    worst = max(worst, rhs - lhs)
                else:
                    worst = max(worst, abs(lhs - rhs))
        for xi, (lo, hi) in zip(x, self.bounds):
            worst = max(worst, lo - xi, xi - hi)
        return float(worst)


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0
    max_violation: float = math.nan
    basis: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Rows hold B^-1 [M | b]; ``cost`` holds reduced costs for maximisation.

    Every ``refresh`` pivots the tableau is rebuilt from the basis matrix;
    long degenerate Bland sequences otherwise accumulate enough error to
    derail the ratio test.
    """

    def __init__(self, M: np.ndarray, rhs: np.ndarray, basis: list[int], refresh: int = 50):
        self.M = M
        self.rhs = rhs
        self.T = np.hstack([M, rhs[:, None]])
        self.basis = basis
        self.refresh = refresh
        self.iterations = 0

    def set_objective(self, c: np.ndarray) -> None:
        self.c = c
        cb = c[self.basis]
        self.cost = c - cb @ self.T[:, :-1]
        self.value = float(cb @ self.T[:, -1])

    def reinvert(self) -> None:
        B = self.M[:, self.basis]
        try:
            sol = np.linalg.solve(B, np.hstack([self.M, self.rhs[:, None]]))
        except np.linalg.LinAlgError:
            return
        self.T = sol
        self.set_objective(self.c)

    def drop(self, keep: list[int], ncols: int) -> None:
        """Keep rows ``keep`` and the first ``ncols`` columns."""
        self.M = self.M[keep, :ncols]
        self.rhs = self.rhs[keep]
        self.T = np.hstack([self.T[keep, :ncols], self.T[keep, -1:]])
        self.basis = [self.basis[r] for r in keep]

    def pivot(self, r: int, e: int) -> None:
        T = self.T
        T[r] /= T[r, e]
        col = T[:, e].copy()
        col[r] = 0.0
        rows = np.nonzero(col)[0]
        T[rows] -= np.outer(col[rows], T[r])
        ce = self.cost[e]
        self.cost -= ce * T[r, :-1]
        self.value += ce * T[r, -1]
        self.basis[r] = e
        self.iterations += 1
        if self.iterations % self.refresh == 0:
            self.reinvert()

    def run(self, max_iter: int) -> str:
        """Bland's rule: lowest-index improving column, lowest-index leaving row on ties."""
        for _ in range(max_iter):
            candidates = np.nonzero(self.cost > COST_TOL)[0]
            if candidates.size == 0:
                return "optimal"
            e = int(candidates[0])
            col = self.T[:, e]
            rows = np.nonzero(col > PIVOT_TOL)[0]
            if rows.size == 0:
                return "unbounded"
            ratios = np.maximum(self.T[rows, -1], 0.0) / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            # Bland's tie-break, skipping pivots that are tiny next to the
            # largest tied one; those leave a near-singular basis
            tied = tied[col[tied] >= PIVOT_REL * col[tied].max()]
            r = int(min(tied, key=lambda i: self.basis[i]))
            self.pivot(r, e)
        raise RuntimeError("simplex iteration limit reached")


def _to_standard(lp: StandardLp):
    """Rewrite with nonnegative variables: x = offset + S y."""
    n = lp.c.size
    cols: list[np.ndarray] = []
    offset = np.zeros(n)
    extra_rows: list[tuple[int, float]] = []  # (y index, upper bound)
    for j, (lo, hi) in enumerate(lp.bounds):
        e = np.zeros(n)
        if math.isfinite(lo):
            offset[j] = lo
            e[j] = 1.0
            cols.append(e)
            if math.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif math.isfinite(hi):
            offset[j] = hi
            e[j] = -1.0
            cols.append(e)
        else:
            e[j] = 1.0
            cols.append(e)
            cols.append(-e)
    S = np.column_stack(cols) if cols else np.zeros((n, 0))
    A = lp.A @ S
    b = lp.b - lp.A @ offset
    senses = list(lp.senses)
    if extra_rows:
        U = np.zeros((len(extra_rows), S.shape[1]))
        for i, (k, ub) in enumerate(extra_rows):
            U[i, k] = 1.0
        A = np.vstack([A, U])
        b = np.concatenate([b, [ub for _, ub in extra_rows]])
        senses += ["<="] * len(extra_rows)
    c = lp.c @ S if lp.maximize else -(lp.c @ S)
    return A, b, senses, c, S, offset


def solve_standard(lp: StandardLp, max_iter: int = 50_000) -> LpResult:
    """Solve ``lp`` to an optimal basic solution, or report infeasible/unbounded."""
    A, b, senses, c, S, offset = _to_standard(lp)
    m, ny = A.shape

    # normalise to b >= 0
    A = A.copy()
    b = b.copy()
    senses = list(senses)
    for i in range(m):
        if b[i] < 0:
            A[i] *= -1.0
            b[i] *= -1.0
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    n_slack = sum(s != "=" for s in senses)
    n_art = sum(s != "<=" for s in senses)
    ncols = ny + n_slack + n_art
    M = np.zeros((m, ncols))
    M[:, :ny] = A
    basis = [-1] * m
    k_slack, k_art = ny, ny + n_slack
    for i, s in enumerate(senses):
        if s == "<=":
            M[i, k_slack] = 1.0
            basis[i] = k_slack
            k_slack += 1
        elif s == ">=":
            M[i, k_slack] = -1.0
            k_slack += 1
            M[i, k_art] = 1.0
            basis[i] = k_art
            k_art += 1
        else:
            M[i, k_art] = 1.0
            basis[i] = k_art
            k_art += 1
    n_struct = ny + n_slack
    tab = _Tableau(M, b, basis)

    if n_art:
        phase1 = np.zeros(ncols)
        phase1[n_struct:] = -1.0
        tab.set_objective(phase1)
        tab.run(max_iter)
        if tab.value < -FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpResult("infeasible", iterations=tab.iterations)
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for r in range(m):
            if tab.basis[r] >= n_struct:
                row = tab.T[r, :n_struct]
                nz = np.nonzero(np.abs(row) > PIVOT_TOL)[0]
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                    keep.append(r)
            else:
                keep.append(r)
        tab.drop(keep, n_struct)

    cost = np.zeros(n_struct)
    cost[:ny] = c
    tab.set_objective(cost)
    status = tab.run(max_iter)
    if status == "unbounded":
        return LpResult("unbounded", iterations=tab.iterations)

    # re-solve the final basis for a clean vertex
    y_full = np.zeros(n_struct)
    if tab.basis:
        try:
            yb = np.linalg.solve(tab.M[:, tab.basis], tab.rhs)
        except np.linalg.LinAlgError:
            yb = tab.T[:, -1]
        y_full[tab.basis] = yb
    y_full[np.abs(y_full) < 1e-13] = 0.0
    y_full = np.maximum(y_full, 0.0)
    x = offset + S @ y_full[:ny]
    obj = float(lp.c @ x)
    return LpResult("optimal", x=x, objective=obj, iterations=tab.iterations,
                    max_violation=lp.violation(x), basis=list(tab.basis))
