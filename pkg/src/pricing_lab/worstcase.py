"""Worst-case priors built from dual step functions, and the tightness harness.

A dual pair (eta, beta) with beta a nonincreasing step function on [0, U]
defines B(v) = eta + integral_v^U beta(w) dw and two thresholds

    v_L = max{v : B(v) >= T},   v_H = inf{v : beta(v) < (1 - C) beta(0)}.

The envelope prior has revenue min{v, T, B(v)} at every price below v_H and
sells nothing above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import frontier
from .lp.programs import solve_rev_posted
from .prior import AnalyticPrior, DiscretePrior, Prior

EQ_TOL = 1e-10


class EnvelopeError(ValueError):
    """Parameters outside the region where the envelope construction applies."""


# ---------------------------------------------------------------------------
# step functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous nonincreasing step function, zero from ``starts[-1]`` on.

    ``levels[k]`` holds on [starts[k], starts[k+1]); the last level is 0.
    """

    starts: np.ndarray
    levels: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.starts, dtype=float).ravel()
        lv = np.asarray(self.levels, dtype=float).ravel()
        if s.size == 0 or s.shape != lv.shape:
            raise EnvelopeError("starts and levels must be non-empty and of equal length")
        if s[0] != 0.0:
            raise EnvelopeError("first step must start at 0")
        if np.any(np.diff(s) < 0) or not np.all(np.isfinite(s)):
            raise EnvelopeError("step starts must be finite and ascending")
        # right-continuous normal form: a repeated start keeps only its last level
        last = np.append(s[1:] != s[:-1], True)
        s, lv = s[last], lv[last]
        if np.any(lv < 0) or np.any(np.diff(lv) > 0):
            raise EnvelopeError("levels must be nonnegative and nonincreasing")
        if lv[-1] != 0.0:
            raise EnvelopeError("last level must be 0")
        merged = np.append(True, lv[1:] != lv[:-1])
        s, lv = s[merged].copy(), lv[merged].copy()
        s.setflags(write=False)
        lv.setflags(write=False)
        object.__setattr__(self, "starts", s)
        object.__setattr__(self, "levels", lv)

    @classmethod
    def single(cls, level: float, end: float) -> "StepFunction":
        if level <= 0 or end <= 0:
            return cls([0.0], [0.0])
        return cls([0.0, end], [level, 0.0])

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "StepFunction":
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def to_pairs(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self.starts, self.levels)]

    @property
    def zero_from(self) -> float:
        return float(self.starts[-1])

    def __call__(self, v: float) -> float:
        k = int(np.searchsorted(self.starts, v, side="right")) - 1
        return float(self.levels[max(k, 0)])

    def integral(self, lo: float, hi: float) -> float:
        """Integral over [lo, hi]."""
        if hi <= lo:
            return 0.0
        ends = np.concatenate([self.starts[1:], [math.inf]])
        a = np.clip(self.starts, lo, hi)
        b = np.clip(ends, lo, hi)
        return float(np.sum(self.levels * (b - a)))

    def segments(self) -> list[tuple[float, float, float]]:
        """(start, end, level) for every nonzero step."""
        return [(float(self.starts[k]), float(self.starts[k + 1]), float(self.levels[k]))
                for k in range(self.starts.size - 1)]


@dataclass(frozen=True, eq=False)
class EnvelopeParams:
    T: float
    eta: float
    beta: StepFunction
    U: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise EnvelopeError("T must be positive")
        if self.eta < 0:
            raise EnvelopeError("eta must be nonnegative")
        U = self.beta.zero_from if self.U is None else float(self.U)
        if U < self.beta.zero_from:
            raise EnvelopeError("beta must vanish at U")
        object.__setattr__(self, "U", U)

    def B(self, v: float) -> float:
        """eta + integral of beta over [v, U]."""
        return self.eta + self.beta.integral(v, self.U)

    def to_json(self) -> dict[str, Any]:
        return {"T": self.T, "beta": self.beta.to_pairs(), "eta": self.eta, "U": self.U}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "EnvelopeParams":
        return cls(float(obj["T"]), float(obj.get("eta", 0.0)),
                   StepFunction.from_pairs(obj["beta"]), obj.get("U"))


def compute_thresholds(params: EnvelopeParams, C: float) -> tuple[float, float]:
    beta0 = params.beta(0.0)
    if beta0 <= 0:
        raise EnvelopeError("beta is identically zero")
    T = params.T
    # v_L: B is continuous and nonincreasing; walk the breakpoints from the right
    if params.B(0.0) < T:
        raise EnvelopeError("B(0) < T: no v with B(v) >= T")
    if params.eta >= T:
        v_L = params.U
    else:
        pts = [float(s) for s in params.beta.starts] + [params.U]
        pts = sorted(set(p for p in pts if p <= params.U))
        v_L = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            b_lo, b_hi = params.B(lo), params.B(hi)
            if b_lo >= T > b_hi:
                level = params.beta(lo)
                v_L = lo + (b_lo - T) / level
                break
    # v_H: first step whose level drops below (1 - C) beta(0)
    thresh = (1.0 - C) * beta0
    below = np.nonzero(params.beta.levels < thresh)[0]
    v_H = float(params.beta.starts[below[0]]) if below.size else params.U
    return float(v_L), float(min(v_H, params.U))


# ---------------------------------------------------------------------------
# envelope distribution
# ---------------------------------------------------------------------------


class EnvelopePrior(AnalyticPrior):
    """Survival 1 below T, T/v on [T, v_L), B(v)/v on [v_L, v_H), atom B(v_H)/v_H at v_H."""

    family = "envelope"

    def __init__(self, params: EnvelopeParams, v_L: float, v_H: float):
        if not (params.T <= v_L + 1e-12 and v_L <= v_H + 1e-12):
            raise EnvelopeError(f"thresholds out of order: T={params.T}, v_L={v_L}, v_H={v_H}")
        self.env = params
        self.T = params.T
        self.v_L = v_L
        self.v_H = v_H
        self._top_atom = min(self.T, params.B(v_H)) / v_H
        # B(v) = c0 - c1 v on each piece of [v_L, v_H)
        cuts = sorted({v_L, v_H} | {float(s) for s in params.beta.starts if v_L < s < v_H})
        self._pieces = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            slope = params.beta(lo)
            self._pieces.append((lo, hi, params.B(lo) + slope * lo, slope))

    def params(self) -> dict[str, Any]:
        return {**self.env.to_json(), "v_L": self.v_L, "v_H": self.v_H}

    def support(self) -> tuple[float, float]:
        return self.T, self.v_H

    def breakpoints(self) -> list[float]:
        return sorted({self.T, self.v_L, self.v_H} | {p[0] for p in self._pieces})

    def survival(self, v: float) -> float:
        if v <= self.T:
            return 1.0
        if v < self.v_L:
            return self.T / v
        if v < self.v_H:
            return self.env.B(v) / v
        if v == self.v_H:
            return self._top_atom
        return 0.0

    def cdf_strict(self, v: float) -> float:
        return 1.0 - self.survival(v)

    def atom(self, v: float) -> float:
        return self._top_atom if v == self.v_H else 0.0

    def _antiderivative(self, v: float) -> float:
        v = min(v, self.v_H)
        total = min(v, self.T)
        if v > self.T:
            total += self.T * math.log(min(v, self.v_L) / self.T)
        for lo, hi, c0, c1 in self._pieces:
            if v <= lo:
                break
            top = min(v, hi)
            total += c0 * math.log(top / lo) - c1 * (top - lo)
        return total

    def monopoly(self) -> tuple[float, float]:
        cands = self.breakpoints()
        revs = np.array([c * self.survival(c) for c in cands])
        # revenue is flat at T on [T, v_L]; ignore rounding when picking the smallest
        k = int(np.nonzero(revs >= revs.max() * (1.0 - 1e-12))[0][0])
        return float(cands[k]), float(revs[k])


def envelope_distribution(params: EnvelopeParams, C: float) -> EnvelopePrior:
    v_L, v_H = compute_thresholds(params, C)
    return EnvelopePrior(params, v_L, v_H)


def f_beta_params(T: float, beta: float) -> EnvelopeParams:
    """Single-step dual at level beta on [0, T + T/beta)."""
    if not (T > 0 and beta > 0):
        raise ValueError("T and beta must be positive")
    U = T + T / beta
    return EnvelopeParams(T, 0.0, StepFunction.single(beta, U), U)


def f_beta(T: float, beta: float) -> EnvelopePrior:
    """Prior with revenue T - beta (v - T) on [T, T + T/beta] and OPT = T."""
    params = f_beta_params(T, beta)
    return EnvelopePrior(params, T, params.U)


# ---------------------------------------------------------------------------
# dual objective and the two reductions
# ---------------------------------------------------------------------------


def dual_objective_eval(prior: Prior, params: EnvelopeParams, C: float) -> float:
    """(1 - C) E[s] beta(0) + integral of beta(v) F(v) dv + eta."""
    total = params.eta
    beta0 = params.beta(0.0)
    if beta0 > 0 and C < 1.0:
        total += (1.0 - C) * prior.mean() * beta0
    for lo, hi, level in params.beta.segments():
        # integral of F = length - integral of survival
        total += level * ((hi - lo) - prior.integrated_survival(lo, hi))
    return float(total)


@dataclass
class ReductionResult:
    params: EnvelopeParams
    objective_before: float
    objective_after: float
    fallback: bool = False
    note: str = ""
    thresholds: tuple[float, float] = field(default=(math.nan, math.nan))

    def to_json(self) -> dict[str, Any]:
        return {"params": self.params.to_json(), "objective_before": self.objective_before,
                "objective_after": self.objective_after, "fallback": self.fallback, "note": self.note}


def _require_below_T(params: EnvelopeParams, C: float) -> tuple[EnvelopePrior, float]:
    prior = envelope_distribution(params, C)
    obj = dual_objective_eval(prior, params, C)
    if not obj < params.T:
        raise EnvelopeError(f"dual objective {obj:.6g} is not below T={params.T}")
    return prior, obj


def eliminate_eta(params: EnvelopeParams, C: float) -> ReductionResult:
    """Fold eta and the tail of beta beyond v_H into a flat extension.

    The new beta keeps beta on [0, v_H) and sits at (1 - C) beta(0) on
    [v_H, U~), with U~ = v_H + B(v_H) / ((1 - C) beta(0)). The worst-case
    prior, and hence the objective against it, is unchanged.
    """
    prior, before = _require_below_T(params, C)
    v_H = prior.v_H
    mass = params.B(v_H)
    beta0 = params.beta(0.0)
    ext = (1.0 - C) * beta0
    if mass <= 0.0:
        new = _truncate(params, v_H, 0.0, v_H)
    elif ext <= 0.0:
        # C = 1: the extension level vanishes and U~ is undefined
        return ReductionResult(params, before, before, fallback=True,
                               note="extension level (1-C)beta(0) is zero; eta kept",
                               thresholds=(prior.v_L, v_H))
    else:
        U_new = v_H + mass / ext
        new = _truncate(params, v_H, ext, U_new)
    after = dual_objective_eval(prior, new, C)
    if abs(after - before) > EQ_TOL * max(1.0, abs(before)):
        raise EnvelopeError(f"eta elimination changed the objective: {before!r} -> {after!r}")
    return ReductionResult(new, before, after, thresholds=(prior.v_L, v_H))


def _truncate(params: EnvelopeParams, v_H: float, level: float, U_new: float) -> EnvelopeParams:
    starts = [float(s) for s in params.beta.starts if s < v_H]
    levels = [params.beta(s) for s in starts]
    if level > 0 and U_new > v_H:
        starts.append(v_H)
        levels.append(level)
    starts.append(U_new)
    levels.append(0.0)
    return EnvelopeParams(params.T, 0.0, StepFunction(starts, levels), U_new)


def step_reduce(params: EnvelopeParams, C: float, T: Optional[float] = None) -> ReductionResult:
    """Replace beta by a single step at beta(v_L) on [0, v_L + T / beta(v_L))."""
    if params.eta != 0.0:
        raise EnvelopeError("step reduction needs eta = 0; run eliminate_eta first")
    T = params.T if T is None else float(T)
    if T != params.T:
        raise EnvelopeError("T must match the envelope parameters")
    prior, before = _require_below_T(params, C)
    level = params.beta(prior.v_L)
    if level <= 0.0:
        raise EnvelopeError("beta(v_L) = 0")
    U_new = prior.v_L + T / level
    new = EnvelopeParams(T, 0.0, StepFunction.single(level, U_new), U_new)
    after = dual_objective_eval(envelope_distribution(new, C), new, C)
    if after > before + EQ_TOL:
        raise EnvelopeError(f"step reduction increased the objective: {before!r} -> {after!r}")
    return ReductionResult(new, before, after, thresholds=(prior.v_L, prior.v_H))


# ---------------------------------------------------------------------------
# tightness harness
# ---------------------------------------------------------------------------


def discretize_f_beta(T: float, beta: float, grid_n: int) -> DiscretePrior:
    """Quantile-midpoint atoms, with the first cell's atom moved to the peak T."""
    prior = f_beta(T, beta)
    pts = [T] + [prior.quantile((i + 0.5) / grid_n) for i in range(1, grid_n)]
    return DiscretePrior.from_pairs((v, 1.0 / grid_n) for v in pts)


@dataclass(frozen=True)
class TightnessReport:
    C: float
    beta: float
    T: float
    grid_n: int
    rev: float
    ratio: float
    lower: float  # R*(C)
    upper: float  # min(1, g(beta; C))
    delta: float

    @property
    def ok(self) -> bool:
        return self.lower - self.delta <= self.ratio <= self.upper + self.delta

    def to_json(self) -> dict[str, Any]:
        return {"C": self.C, "beta": self.beta, "T": self.T, "grid_n": self.grid_n, "rev": self.rev,
                "ratio": self.ratio, "lower": self.lower, "upper": self.upper,
                "delta": self.delta, "ok": self.ok}


def tightness_check(C: float, beta: float, T: float = 1.0, grid_n: int = 200) -> TightnessReport:
    """R*(C) - delta <= Rev(discretised F_beta, C) / T <= min(1, g(beta; C)) + delta."""
    if grid_n < 50:
        raise ValueError("grid_n must be at least 50")
    disc = discretize_f_beta(T, beta, grid_n)
    rev = solve_rev_posted(disc, C).rev
    lower = frontier.r_star(C).R
    upper = min(1.0, frontier.dual_objective(beta, C))
    return TightnessReport(C, beta, T, grid_n, rev, rev / T, lower, upper, 4.0 / grid_n)
