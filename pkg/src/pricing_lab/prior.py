"""Value distributions, revenue curves and monopoly pricing.

Every prior exposes the same small surface:

* ``cdf_strict(v)``   = P[V < v]
* ``survival(v)``     = P[V >= v]  (includes the atom at v)
* ``atom(v)``         = P[V = v]
* ``integrated_survival(x, y)`` = integral of P[V >= w] over [x, y]

Means, partial expectations and E[(v - s)^+] are all derived from the
integrated survival function, so each family only has to supply a closed-form
antiderivative.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

PROB_SUM_TOL = 1e-9
_BISECT_ITERS = 200


class PriorError(ValueError):
    """Raised for malformed prior specifications."""


# ---------------------------------------------------------------------------
# shared behaviour
# ---------------------------------------------------------------------------


class _PriorBase:
    def cdf_strict(self, v: float) -> float:
        raise NotImplementedError

    def atom(self, v: float) -> float:
        return 0.0

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def _antiderivative(self, v: float) -> float:
        """Integral of the survival function over [0, v]."""
        raise NotImplementedError

    def survival(self, v: float) -> float:
        return 1.0 - self.cdf_strict(v)

    def survival_strict(self, v: float) -> float:
        """P[V > v]."""
        return self.survival(v) - self.atom(v)

    def integrated_survival(self, x: float, y: float) -> float:
        return self._antiderivative(y) - self._antiderivative(x)

    def mean(self) -> float:
        return self._antiderivative(math.inf)

    def partial_expectation(self, a: float) -> float:
        """E[V * 1[V <= a]]."""
        if a <= 0:
            return 0.0
        return self._antiderivative(a) - a * self.survival_strict(a)

    def partial_expectation_left(self, a: float) -> float:
        """E[V * 1[V < a]]."""
        return self.partial_expectation(a) - a * self.atom(a)

    def expected_excess(self, v: float) -> float:
        """E[(v - s)^+] for s drawn from this prior."""
        if v <= 0:
            return 0.0
        return v - self._antiderivative(v)

    def revenue(self, p: float) -> float:
        return p * self.survival(p)

    def quantile(self, u: float) -> float:
        """Generalised inverse inf{v : P[V <= v] >= u}."""
        lo, hi = self.support()
        if u <= 0:
            return lo
        hi = self._finite_upper(hi)
        if 1.0 - self.survival_strict(lo) >= u:
            return lo
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if 1.0 - self.survival_strict(mid) >= u:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        return hi

    def price_at_quantile(self, q: float) -> float:
        """Largest price that still sells with probability at least ``q``."""
        lo, hi = self.support()
        hi = self._finite_upper(hi)
        if self.survival(hi) >= q:
            return hi
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if self.survival(mid) >= q:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        return lo

    def _finite_upper(self, hi: float) -> float:
        if math.isfinite(hi):
            return hi
        # walk out until the tail mass is negligible
        hi = max(1.0, self.support()[0])
        while self.survival(hi) > 1e-17:
            hi *= 2.0
        return hi


# ---------------------------------------------------------------------------
# discrete priors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscretePrior(_PriorBase):
    """Finite-support distribution; ``values`` strictly ascending."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).ravel()
        probs = np.asarray(self.probs, dtype=float).ravel()
        if values.size == 0 or values.shape != probs.shape:
            raise PriorError("values and probs must be non-empty and of equal length")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise PriorError("values must be finite and nonnegative")
        if np.any(np.diff(values) <= 0):
            raise PriorError("values must be strictly ascending")
        if np.any(probs <= 0):
            raise PriorError("probabilities must be positive")
        total = probs.sum()
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise PriorError(f"probabilities sum to {float(total)!r}, not 1")
        probs = probs / total
        values.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        # tails[i] = P[V >= values[i]]
        tails = np.cumsum(probs[::-1])[::-1].copy()
        tails.setflags(write=False)
        object.__setattr__(self, "_tails", tails)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "DiscretePrior":
        """Build from (value, prob) pairs, sorting and merging duplicates."""
        merged: dict[float, float] = {}
        for v, p in pairs:
            merged[float(v)] = merged.get(float(v), 0.0) + float(p)
        vs = sorted(merged)
        return cls(np.array(vs), np.array([merged[v] for v in vs]))

    def __len__(self) -> int:
        return self.values.size

    @property
    def tails(self) -> np.ndarray:
        """P[V >= v_i] at each support point."""
        return self._tails

    @property
    def cdf_at_support(self) -> np.ndarray:
        """Strict CDF F(v_i) = P[V < v_i] at each support point."""
        return 1.0 - self._tails

    def support(self) -> tuple[float, float]:
        return float(self.values[0]), float(self.values[-1])

    def cdf_strict(self, v: float) -> float:
        k = np.searchsorted(self.values, v, side="left")
        return float(self.probs[:k].sum())

    def survival(self, v: float) -> float:
        k = np.searchsorted(self.values, v, side="left")
        return float(self._tails[k]) if k < self.values.size else 0.0

    def atom(self, v: float) -> float:
        k = np.searchsorted(self.values, v, side="left")
        if k < self.values.size and self.values[k] == v:
            return float(self.probs[k])
        return 0.0

    def _antiderivative(self, v: float) -> float:
        return float(np.dot(self.probs, np.minimum(v, self.values)))

    def mean(self) -> float:
        return float(np.dot(self.probs, self.values))

    def partial_expectation(self, a: float) -> float:
        mask = self.values <= a
        return float(np.dot(self.probs[mask], self.values[mask]))

    def expected_excess(self, v: float) -> float:
        return float(np.dot(self.probs, np.maximum(v - self.values, 0.0)))

    def quantile(self, u: float) -> float:
        if u <= 0:
            return float(self.values[0])
        cum = np.cumsum(self.probs)
        k = int(np.searchsorted(cum, u - 1e-15, side="left"))
        return float(self.values[min(k, self.values.size - 1)])

    def price_at_quantile(self, q: float) -> float:
        ok = np.nonzero(self._tails >= q)[0]
        return float(self.values[ok[-1]]) if ok.size else float(self.values[0])

    def revenues(self) -> np.ndarray:
        """v_i * P[V >= v_i] for every support point."""
        return self.values * self._tails

    def monopoly(self) -> tuple[float, float]:
        rev = self.revenues()
        k = int(np.argmax(rev))  # first index == smallest maximising price
        return float(self.values[k]), float(rev[k])


# ---------------------------------------------------------------------------
# analytic priors
# ---------------------------------------------------------------------------


class AnalyticPrior(_PriorBase):
    """Parametric prior with closed-form CDF and integrated survival."""

    family: str = ""

    def params(self) -> dict[str, float]:
        raise NotImplementedError

    def monopoly(self) -> tuple[float, float]:
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        """Points where the CDF changes formula (used to split integrals)."""
        return list(self.support())

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


@dataclass(frozen=True, repr=False)
class Uniform(AnalyticPrior):
    lo: float = 0.0
    hi: float = 1.0
    family = "uniform"

    def __post_init__(self) -> None:
        if not (0 <= self.lo < self.hi < math.inf):
            raise PriorError("uniform needs 0 <= lo < hi < inf")

    def params(self) -> dict[str, float]:
        return {"lo": self.lo, "hi": self.hi}

    def support(self) -> tuple[float, float]:
        return self.lo, self.hi

    def cdf_strict(self, v: float) -> float:
        return min(1.0, max(0.0, (v - self.lo) / (self.hi - self.lo)))

    def _antiderivative(self, v: float) -> float:
        lo, hi = self.lo, self.hi
        if v <= lo:
            return max(v, 0.0)
        w = min(v, hi)
        return lo + (hi * (w - lo) - 0.5 * (w * w - lo * lo)) / (hi - lo)

    def quantile(self, u: float) -> float:
        u = min(max(u, 0.0), 1.0)
        return self.lo + u * (self.hi - self.lo)

    def price_at_quantile(self, q: float) -> float:
        q = min(max(q, 0.0), 1.0)
        return self.hi - q * (self.hi - self.lo)

    def monopoly(self) -> tuple[float, float]:
        p = max(self.lo, 0.5 * self.hi)
        return p, self.revenue(p)


@dataclass(frozen=True, repr=False)
class Exponential(AnalyticPrior):
    rate: float = 1.0
    family = "exponential"

    def __post_init__(self) -> None:
        if not (0 < self.rate < math.inf):
            raise PriorError("exponential needs a positive finite rate")

    def params(self) -> dict[str, float]:
        return {"rate": self.rate}

    def support(self) -> tuple[float, float]:
        return 0.0, math.inf

    def cdf_strict(self, v: float) -> float:
        return 0.0 if v <= 0 else -math.expm1(-self.rate * v)

    def _antiderivative(self, v: float) -> float:
        if v <= 0:
            return max(v, 0.0)
        return -math.expm1(-self.rate * v) / self.rate

    def quantile(self, u: float) -> float:
        if u >= 1:
            return math.inf
        return -math.log1p(-max(u, 0.0)) / self.rate

    def price_at_quantile(self, q: float) -> float:
        if q <= 0:
            return math.inf
        return -math.log(min(q, 1.0)) / self.rate

    def monopoly(self) -> tuple[float, float]:
        p = 1.0 / self.rate
        return p, self.revenue(p)


@dataclass(frozen=True, repr=False)
class EqualRevenue(AnalyticPrior):
    """P[V >= v] = 1/v on [1, M], with the leftover mass 1/M as an atom at M."""

    truncation: float = 100.0
    family = "equal_revenue"

    def __post_init__(self) -> None:
        if not (1.0 < self.truncation < math.inf):
            raise PriorError("equal-revenue truncation must be finite and > 1")

    def params(self) -> dict[str, float]:
        return {"truncation": self.truncation}

    def support(self) -> tuple[float, float]:
        return 1.0, self.truncation

    def cdf_strict(self, v: float) -> float:
        if v <= 1.0:
            return 0.0
        if v > self.truncation:
            return 1.0
        return 1.0 - 1.0 / v

    def atom(self, v: float) -> float:
        return 1.0 / self.truncation if v == self.truncation else 0.0

    def _antiderivative(self, v: float) -> float:
        if v <= 1.0:
            return max(v, 0.0)
        return 1.0 + math.log(min(v, self.truncation))

    def quantile(self, u: float) -> float:
        if u <= 0:
            return 1.0
        if u >= 1.0 - 1.0 / self.truncation:
            return self.truncation
        return 1.0 / (1.0 - u)

    def price_at_quantile(self, q: float) -> float:
        if q <= 1.0 / self.truncation:
            return self.truncation
        return 1.0 / min(q, 1.0)

    def monopoly(self) -> tuple[float, float]:
        # every price in [1, M] earns 1; smallest maximiser is 1
        return 1.0, 1.0


@dataclass(frozen=True, repr=False)
class PointMass(AnalyticPrior):
    value: float = 1.0
    family = "point_mass"

    def __post_init__(self) -> None:
        if not (0 <= self.value < math.inf):
            raise PriorError("point mass needs a finite nonnegative value")

    def params(self) -> dict[str, float]:
        return {"value": self.value}

    def support(self) -> tuple[float, float]:
        return self.value, self.value

    def cdf_strict(self, v: float) -> float:
        return 0.0 if v <= self.value else 1.0

    def atom(self, v: float) -> float:
        return 1.0 if v == self.value else 0.0

    def _antiderivative(self, v: float) -> float:
        return min(max(v, 0.0), self.value)

    def quantile(self, u: float) -> float:
        return self.value

    def price_at_quantile(self, q: float) -> float:
        return self.value

    def monopoly(self) -> tuple[float, float]:
        return self.value, self.value


Prior = DiscretePrior | AnalyticPrior


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def monopoly(prior: Prior) -> tuple[float, float]:
    """(smallest revenue-maximising posted price, its revenue)."""
    return prior.monopoly()


def partial_expectation(prior: Prior, a: float) -> float:
    if a < 0:
        raise ValueError("cutoff must be nonnegative")
    return prior.partial_expectation(a)


@dataclass(frozen=True, eq=False)
class RevenueCurve:
    """Revenue as a function of sale probability, with its running maximum."""

    q: np.ndarray
    r: np.ndarray
    r_plus: np.ndarray
    q_star: float
    opt: float


def revenue_curve(prior: Prior, grid_size: int = 201) -> RevenueCurve:
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    price, opt = prior.monopoly()
    q_star = prior.survival(price)
    qs = set(np.linspace(0.0, 1.0, grid_size).tolist())
    qs.add(q_star)
    if isinstance(prior, DiscretePrior):
        qs.update(prior.tails.tolist())
    q = np.array(sorted(qs))
    r = np.array([0.0 if qi <= 0 else qi * prior.price_at_quantile(qi) for qi in q])
    r_plus = np.maximum.accumulate(r)
    return RevenueCurve(q=q, r=r, r_plus=r_plus, q_star=float(q_star), opt=float(opt))


def discretize(analytic: AnalyticPrior, n: int) -> DiscretePrior:
    """Atoms of mass 1/n at the quantile midpoints (i + 0.5)/n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not math.isfinite(analytic.support()[1]):
        raise PriorError(f"{analytic!r} has unbounded support; truncate it first")
    pts = [analytic.quantile((i + 0.5) / n) for i in range(n)]
    return DiscretePrior.from_pairs((v, 1.0 / n) for v in pts)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_ANALYTIC = {
    "uniform": lambda d: Uniform(float(d.get("lo", 0.0)), float(d.get("hi", 1.0))),
    "exponential": lambda d: Exponential(float(d.get("rate", 1.0))),
    "equal_revenue": lambda d: EqualRevenue(float(d["truncation"])),
    "point_mass": lambda d: PointMass(float(d["value"])),
}


def prior_from_json(obj: dict[str, Any]) -> Prior:
    try:
        kind = obj["type"]
    except (KeyError, TypeError):
        raise PriorError("prior JSON needs a 'type' field") from None
    if kind == "discrete":
        values = obj.get("values")
        probs = obj.get("probs")
        if not isinstance(values, list) or not isinstance(probs, list):
            raise PriorError("discrete prior needs 'values' and 'probs' lists")
        return DiscretePrior(np.array(values, dtype=float), np.array(probs, dtype=float))
    if kind not in _ANALYTIC:
        raise PriorError(f"unknown prior type {kind!r}")
    try:
        return _ANALYTIC[kind](obj)
    except KeyError as exc:
        raise PriorError(f"{kind} prior missing field {exc}") from None


def prior_to_json(prior: Prior) -> dict[str, Any]:
    if isinstance(prior, DiscretePrior):
        return {"type": "discrete", "values": prior.values.tolist(), "probs": prior.probs.tolist()}
    return {"type": prior.family, **prior.params()}


def parse_prior(text: str) -> Prior:
    """Parse a CLI prior: shorthand, inline JSON, or a path to a JSON file.

    Shorthands: ``uniform01``, ``exp:RATE``, ``er:M``, ``point:V``.
    """
    text = text.strip()
    if text == "uniform01":
        return Uniform(0.0, 1.0)
    for prefix, build in (("exp:", Exponential), ("er:", EqualRevenue), ("point:", PointMass)):
        if text.startswith(prefix):
            try:
                return build(float(text[len(prefix):]))
            except ValueError as exc:
                raise PriorError(str(exc)) from None
    if text.startswith("{"):
        try:
            return prior_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise PriorError(f"bad prior JSON: {exc}") from None
    path = Path(text)
    if path.is_file():
        try:
            return prior_from_json(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise PriorError(f"bad prior JSON in {path}: {exc}") from None
    raise PriorError(f"cannot interpret prior {text!r}")


def random_discrete(rng: np.random.Generator, max_n: int = 20, vmax: float = 10.0) -> DiscretePrior:
    """Random finite prior: 1..max_n distinct values in [0, vmax], Dirichlet masses."""
    n = int(rng.integers(1, max_n + 1))
    values = np.unique(np.round(rng.uniform(0.0, vmax, size=n), 6))
    probs = rng.dirichlet(np.ones(values.size))
    # Dirichlet can underflow to exact zeros for tiny alphas; guard anyway
    probs = np.maximum(probs, 1e-6)
    return DiscretePrior(values, probs / probs.sum())


def random_corpus(size: int = 100, seed: int = 42, max_n: int = 20, vmax: float = 10.0) -> list[DiscretePrior]:
    rng = np.random.default_rng(seed)
    return [random_discrete(rng, max_n, vmax) for _ in range(size)]


__all__: Sequence[str] = [
    "AnalyticPrior",
    "DiscretePrior",
    "EqualRevenue",
    "Exponential",
    "PointMass",
    "Prior",
    "PriorError",
    "RevenueCurve",
    "Uniform",
    "discretize",
    "monopoly",
    "parse_prior",
    "partial_expectation",
    "prior_from_json",
    "prior_to_json",
    "random_corpus",
    "revenue_curve",
]
