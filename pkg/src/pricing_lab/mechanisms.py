"""Explicit pricing mechanisms and the (C, R) pairs they achieve.

Revenues are the idealised hallucinatory-state revenues: when the buyer is
asked to guess the seller's signal she is treated as never guessing right.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import integrate

from .prior import AnalyticPrior, DiscretePrior, Prior

REPORT_TOL = 1e-12


class InsufficientTailMass(ValueError):
    """The prior is not heavy-tailed enough for the requested epsilon."""

    def __init__(self, detail: str):
        super().__init__(f"insufficient tail mass: {detail}")


@dataclass(frozen=True)
class TradeoffReport:
    mechanism: str
    C: float
    R: float
    rev: float
    opt: float
    aux: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("C", "R"):
            val = getattr(self, name)
            if not (-REPORT_TOL <= val <= 1.0 + REPORT_TOL):
                raise ValueError(f"{name}={val!r} outside [0, 1]")

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class HeavyTailParams:
    eps: float
    a: float
    b: float
    q_a: float  # P[V < a]
    m_a: float  # E[V 1[V <= a]]
    m_b: float  # effective E[V 1[V <= b]], including any split atom at b
    p_star: float
    b_atom_fraction: float = 1.0  # share of the atom at b used in calibration

    def calibration_residual(self) -> float:
        """eps (m(b) - m(a)) - (m(a) - q(a) p*)."""
        return self.eps * (self.m_b - self.m_a) - (self.m_a - self.q_a * self.p_star)


def _quantile_integral(prior: AnalyticPrior, fn: Callable[[float], float], u_lo: float) -> float:
    """Integral of fn(Q(u)) over u in [u_lo, 1] for an analytic prior."""
    if u_lo >= 1.0:
        return 0.0
    # split where the quantile function changes formula
    cuts = sorted({u_lo, 1.0} | {
        min(1.0, max(u_lo, 1.0 - prior.survival_strict(b))) for b in prior.breakpoints()
        if math.isfinite(b)
    } | {
        min(1.0, max(u_lo, prior.cdf_strict(b))) for b in prior.breakpoints() if math.isfinite(b)
    })
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi > lo:
            val, _ = integrate.quad(lambda u: fn(prior.quantile(u)), lo, hi,
                                    epsabs=1e-14, epsrel=1e-12, limit=200)
            total += val
    return total


# ---------------------------------------------------------------------------
# guess-for-discount
# ---------------------------------------------------------------------------


def p_plus(prior: Prior, s: float) -> float:
    """Smallest revenue-maximising price among prices >= s."""
    if s < 0:
        raise ValueError("signal must be nonnegative")
    if isinstance(prior, DiscretePrior):
        v = prior.values
        cand = np.concatenate([[s], v[v > s]])
        rev = np.array([prior.revenue(float(c)) for c in cand])
        k = int(np.argmax(rev))
        return float(cand[k])
    # built-in analytic revenue curves are nonincreasing above the monopoly price
    price, _ = prior.monopoly()
    return float(price) if s <= price else float(s)


def guess_discount_eval(prior: Prior) -> TradeoffReport:
    price, opt = prior.monopoly()
    q_star = prior.survival(price)
    if isinstance(prior, DiscretePrior):
        rev = sum(f * prior.revenue(p_plus(prior, float(s))) for s, f in zip(prior.values, prior.probs))
    else:
        # signals at or below p* are priced at p*; above it the signal itself is posted
        below = 1.0 - prior.survival_strict(price)
        rev = opt * below + _quantile_integral(prior, prior.revenue, below)
    rev = float(rev)
    R = rev / opt if opt > 0 else 1.0
    return TradeoffReport("guess_discount", 1.0, R, rev, opt,
                          {"p_star": price, "q_star": q_star, "bound": 1.0 - q_star / 2.0})


# ---------------------------------------------------------------------------
# hidden price
# ---------------------------------------------------------------------------


def hidden_price_eval(prior: Prior) -> TradeoffReport:
    mu = prior.mean()
    if not (math.isfinite(mu) and mu > 0):
        raise ValueError("hidden-price mechanism needs a finite positive mean")
    price, opt = prior.monopoly()
    C = min(price / mu, 1.0)
    # default price C s + p* - C mu
    aux = {"p_star": price, "mean": mu, "slope": C, "intercept": price - C * mu}
    return TradeoffReport("hidden_price", C, 1.0, opt, opt, aux)


# ---------------------------------------------------------------------------
# heavy tail
# ---------------------------------------------------------------------------

A_MARGIN = 1.05


def _bisect_first(pred: Callable[[float], bool], lo: float, hi: float, iters: int = 200) -> float:
    """Smallest point of [lo, hi] where a monotone predicate turns true (pred(hi) true)."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return hi


def heavy_tail_params(prior: Prior, eps: float) -> HeavyTailParams:
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie strictly between 0 and 1")
    price, _ = prior.monopoly()
    lo, hi = prior.support()
    if not math.isfinite(hi):
        hi = prior._finite_upper(hi)

    def q(a: float) -> float:
        return prior.cdf_strict(a)

    def good(a: float) -> bool:
        qa = q(a)
        return qa > 1.0 - eps and prior.partial_expectation(a) > qa * price

    if isinstance(prior, DiscretePrior):
        v = prior.values
        grid = np.concatenate([0.5 * (v[:-1] + v[1:]), [v[-1]]])
        hits = [float(a) for a in grid if a >= price and good(float(a))]
        if not hits:
            raise InsufficientTailMass(f"no cutoff a meets both conditions for eps={eps}")
        a = hits[0]
    else:
        if not good(hi):
            raise InsufficientTailMass(f"no cutoff a meets both conditions for eps={eps}")
        a0 = _bisect_first(good, max(price, lo), hi)
        a = min(A_MARGIN * a0, 0.5 * (a0 + hi))
        if not good(a):
            a = a0
    qa = q(a)
    ma = prior.partial_expectation(a)
    target = ma + (ma - qa * price) / eps

    if prior.partial_expectation(hi) < target:
        raise InsufficientTailMass(
            f"need E[V 1[V <= b]] = {target:.6g} but the whole prior only has {prior.mean():.6g}")
    if isinstance(prior, DiscretePrior):
        v = prior.values
        ok = [float(t) for t in v if t >= a and prior.partial_expectation(float(t)) >= target]
        b = ok[0]
    else:
        b = _bisect_first(lambda t: prior.partial_expectation(t) >= target, a, hi)
    frac = 1.0
    mb = prior.partial_expectation(b)
    atom = prior.atom(b)
    if atom > 0 and mb - target > 1e-12 * max(1.0, target):
        # target falls inside the jump at an atom: use only part of it
        below = mb - b * atom
        frac = (target - below) / (b * atom)
        mb = below + frac * b * atom
    return HeavyTailParams(eps=eps, a=a, b=b, q_a=qa, m_a=ma, m_b=mb, p_star=price,
                           b_atom_fraction=frac)


def heavy_tail_eval(prior: Prior, params: HeavyTailParams) -> TradeoffReport:
    price, opt = prior.monopoly()
    rev = params.q_a * prior.revenue(params.p_star)
    aux = asdict(params)
    aux["calibration_residual"] = params.calibration_residual()
    aux["atom_split"] = params.b_atom_fraction < 1.0
    return TradeoffReport("heavy_tail", 1.0 - params.eps, rev / opt, rev, opt, aux)


# ---------------------------------------------------------------------------
# public-signal baseline
# ---------------------------------------------------------------------------


def signal_posting_revenue(prior: Prior) -> float:
    """E_s[s P[V >= s]]: revenue of posting an independent draw as the price."""
    if isinstance(prior, DiscretePrior):
        return float(prior.probs @ prior.revenues())
    return _quantile_integral(prior, prior.revenue, 0.0)


def public_baseline_eval(prior: Prior, lam: float) -> TradeoffReport:
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lambda must lie in [0, 1]")
    _, opt = prior.monopoly()
    exact = (1.0 - lam) * opt + lam * signal_posting_revenue(prior)
    aux = {"lambda": lam, "exact_rev": exact, "exact_R": exact / opt if opt > 0 else 1.0}
    return TradeoffReport("baseline", lam, 1.0 - lam, (1.0 - lam) * opt, opt, aux)
