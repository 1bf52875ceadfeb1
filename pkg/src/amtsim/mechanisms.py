"""Threshold decision rules, pivotal values and the transfer schemes built on them.

Everything here is a pure function of a valuation profile.  These routines
are the readable reference implementation; the Monte Carlo kernels repeat
the same arithmetic in compiled form and are tested against them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .distributions import Transform, ValuationDistribution, reduced_form
from .errors import ConfigError, PivotalValueError, UnsupportedParityError

MEAN_ADJUSTED = "mean-adjusted"
ABSOLUTE = "absolute"
SCHEMES = ("pivotal", "dagger", "double-dagger")


def _groups(pairs: Sequence[tuple]) -> dict[tuple, np.ndarray]:
    out: dict[tuple, list[int]] = {}
    for i, key in enumerate(pairs):
        out.setdefault(key, []).append(i)
    return {k: np.asarray(v) for k, v in out.items()}


@dataclass(frozen=True)
class DecisionRule:
    """Provide iff ``sum_i h_i(v_i) >= threshold``.

    In mean-adjusted mode the threshold is ``sum_i mu_h_i + level``; in
    absolute mode it is ``level`` itself.
    """

    dists: tuple[ValuationDistribution, ...]
    transforms: tuple[Transform, ...]
    mode: str
    level: float
    mu_h: tuple[float, ...] = field(repr=False)

    @classmethod
    def build(cls, dists, transforms, mode: str, level: float) -> DecisionRule:
        dists, transforms = tuple(dists), tuple(transforms)
        if len(dists) != len(transforms) or not dists:
            raise ConfigError("need one transform per agent")
        if mode not in (MEAN_ADJUSTED, ABSOLUTE):
            raise ConfigError(f"unknown threshold mode {mode!r}")
        means: dict[tuple, float] = {}
        mu = []
        for d, h in zip(dists, transforms):
            if (d, h) not in means:
                means[(d, h)] = h.mean(d)
            mu.append(means[(d, h)])
        return cls(dists, transforms, mode, float(level), tuple(mu))

    @classmethod
    def amt(cls, dists, transforms, alpha: float) -> DecisionRule:
        return cls.build(dists, transforms, MEAN_ADJUSTED, alpha)

    @classmethod
    def absolute(cls, dists, transforms, threshold: float) -> DecisionRule:
        return cls.build(dists, transforms, ABSOLUTE, threshold)

    @classmethod
    def iid(cls, dist: ValuationDistribution, h: Transform, n: int, mode: str,
            level: float) -> DecisionRule:
        return cls.build((dist,) * n, (h,) * n, mode, level)

    @property
    def n(self) -> int:
        return len(self.dists)

    @property
    def threshold(self) -> float:
        if self.mode == ABSOLUTE:
            return self.level
        return math.fsum(self.mu_h) + self.level

    @property
    def groups(self) -> dict[tuple, np.ndarray]:
        return _groups(list(zip(self.dists, self.transforms)))

    def monotone(self) -> bool:
        """Whether every h_i is nondecreasing on its agent's support."""
        checked = {}
        for key in set(zip(self.dists, self.transforms)):
            d, h = key
            checked[key] = h.kind == "constant" or h.is_increasing_on(d)
        return all(checked.values())

    def h_values(self, profiles) -> np.ndarray:
        v = np.asarray(profiles, dtype=float)
        out = np.empty_like(v)
        for (d, h), idx in self.groups.items():
            out[..., idx] = h(v[..., idx], d)
        return out

    def hsum(self, profiles) -> np.ndarray:
        return self.h_values(profiles).sum(axis=-1)

    def decide(self, profiles):
        """Provision decision for one profile (shape ``(n,)``) or a batch ``(..., n)``."""
        q = (self.hsum(profiles) >= self.threshold).astype(np.int64)
        return int(q) if q.ndim == 0 else q


def efficient_rule(dists, cost: float) -> DecisionRule:
    """Ex post efficient provision: sum of valuations at least the cost."""
    dists = tuple(dists)
    return DecisionRule.absolute(dists, (Transform.identity(),) * len(dists), cost)


def pivot_rule(dists, cost: float) -> DecisionRule:
    """The pivot mechanism's rule, written as a mean-adjusted identity rule."""
    dists = tuple(dists)
    alpha = cost - math.fsum(d.mean for d in dists)
    return DecisionRule.amt(dists, (Transform.identity(),) * len(dists), alpha)


def profit_rule(dists, transforms, cost: float) -> DecisionRule:
    """Provide iff the centred transform sum ``sum (h_i - mu_h_i)`` reaches the cost.

    For ``h = psi`` the centring is a no-op (virtual valuations have mean
    zero on supports starting at 0), so this is the plain rule
    ``sum psi_i >= cost``.
    """
    if cost < 0.0:
        raise ConfigError("profit rules need a nonnegative cost")
    return DecisionRule.amt(dists, transforms, cost)


def pivotal_value(rule: DecisionRule, i: int, others, cap: float | None = None) -> float:
    """inf{v >= 0 : rule provides at (v, others)}.

    ``others`` lists the valuations of the agents other than ``i`` in their
    original order.  Unreachable thresholds return the cap (the support top
    of agent ``i`` by default) when it is finite and ``inf`` otherwise.
    """
    others = np.asarray(others, dtype=float)
    if others.shape != (rule.n - 1,):
        raise ValueError(f"expected {rule.n - 1} other valuations")
    profile = np.insert(others, i, 0.0)
    hv = rule.h_values(profile)
    rest = math.fsum(np.delete(hv, i))
    d, h = rule.dists[i], rule.transforms[i]
    b = d.hi if cap is None else float(cap)
    y = rule.threshold - rest
    x = h.inverse(y, d, upper=b if math.isfinite(b) else None)
    if math.isnan(x):
        raise PivotalValueError(f"pivotal value of agent {i} did not bracket")
    if x == math.inf:
        return b if math.isfinite(b) else math.inf
    return min(max(x, 0.0), b)


def _pivotals(rule: DecisionRule, profile: np.ndarray, hv: np.ndarray) -> np.ndarray:
    """Pivotal values of all agents at once; only agents whose removal flips q matter."""
    total = hv.sum()
    T = rule.threshold
    out = np.zeros(rule.n)
    for (d, h), idx in rule.groups.items():
        y = T - (total - hv[idx])
        top = d.hi
        h0 = float(h(np.array([0.0]), d)[0])
        for k, j in enumerate(idx):
            if y[k] <= h0:
                continue
            x = h.inverse(y[k], d, upper=min(top, profile[j]))
            if math.isnan(x):
                raise PivotalValueError(f"pivotal value of agent {j} did not bracket")
            # the decision was taken on the full sum; rounding cannot push v-hat past v_j
            out[j] = min(x, profile[j], top)
    return out


def transfers_pivotal(rule: DecisionRule, profile) -> np.ndarray:
    """Baseline transfers t_i = v-hat_i * q (zero when the good is not provided)."""
    v = np.asarray(profile, dtype=float)
    hv = rule.h_values(v)
    if hv.sum() < rule.threshold:
        return np.zeros(rule.n)
    return _pivotals(rule, v, hv)


def budget(rule: DecisionRule, profile, cost: float) -> float:
    v = np.asarray(profile, dtype=float)
    q = rule.decide(v)
    return math.fsum(transfers_pivotal(rule, v)) - cost * q


def transfers_double_dagger(rule: DecisionRule, profile, cost: float) -> np.ndarray:
    """Baseline transfers shifted so every agent covers an equal share of the budget."""
    t = transfers_pivotal(rule, profile)
    q = rule.decide(np.asarray(profile, dtype=float))
    B = math.fsum(t) - cost * q
    return t - B / rule.n


class ConditionalBudget(Protocol):
    """Supplies E[B | V_i = v] and E[B] for the pairwise budget scheme."""

    mean: float

    def conditional(self, i: int, v: float) -> float: ...


@dataclass(frozen=True)
class FixedBudget:
    """A conditional-budget source backed by a plain function (or a constant)."""

    mean: float = 0.0
    fn: Callable[[int, float], float] | None = None

    def conditional(self, i: int, v: float) -> float:
        return self.mean if self.fn is None else float(self.fn(i, v))


def transfers_dagger(rule: DecisionRule, profile, cost: float,
                     estimator: ConditionalBudget) -> np.ndarray:
    """Pairwise scheme: agents (1,2), (3,4), ... pass the budget surplus along.

    With 0-based indices, agent ``2k`` pays ``t - (2/n)(B - E[B | V_2k])`` and
    agent ``2k+1`` pays ``t - (2/n)(E[B | V_2k] - E[B])``, which leaves an ex
    post budget equal to the estimator's E[B].
    """
    n = rule.n
    if n % 2:
        raise UnsupportedParityError("the pairwise budget scheme needs an even number of agents")
    v = np.asarray(profile, dtype=float)
    t = transfers_pivotal(rule, v)
    B = math.fsum(t) - cost * rule.decide(v)
    out = t.copy()
    for k in range(0, n, 2):
        g = estimator.conditional(k, float(v[k]))
        out[k] = t[k] - (2.0 / n) * (B - g)
        out[k + 1] = t[k + 1] - (2.0 / n) * (g - estimator.mean)
    return out


@dataclass(frozen=True)
class Outcome:
    q: int
    transfers: np.ndarray
    cost: float
    values: np.ndarray
    quantity: float = 1.0

    @property
    def budget(self) -> float:
        return math.fsum(self.transfers) - self.cost * self.q

    @property
    def welfare(self) -> float:
        return math.fsum(self.values) * self.q - math.fsum(self.transfers)

    @property
    def efficient_welfare(self) -> float:
        s = math.fsum(self.values)
        return s - self.cost if s >= self.cost else 0.0


@dataclass(frozen=True)
class Mechanism:
    """A decision rule, a transfer scheme and the cost of the good."""

    rule: DecisionRule
    cost: float
    scheme: str = "pivotal"
    estimator: ConditionalBudget | None = None

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown transfer scheme {self.scheme!r}")
        if self.scheme == "dagger":
            if self.estimator is None:
                raise ConfigError("the pairwise scheme needs a conditional-budget estimator")
            if self.rule.n % 2:
                raise UnsupportedParityError(
                    "the pairwise budget scheme needs an even number of agents")

    def transfers(self, profile) -> np.ndarray:
        if self.scheme == "pivotal":
            return transfers_pivotal(self.rule, profile)
        if self.scheme == "double-dagger":
            return transfers_double_dagger(self.rule, profile, self.cost)
        return transfers_dagger(self.rule, profile, self.cost, self.estimator)

    def run(self, profile) -> Outcome:
        v = np.asarray(profile, dtype=float)
        return Outcome(self.rule.decide(v), self.transfers(v), self.cost, v)

    def utility(self, i: int, value: float, report: float, profile) -> float:
        """Agent i's ex post utility at true ``value`` when reporting ``report``."""
        v = np.array(profile, dtype=float)
        v[i] = report
        return value * self.rule.decide(v) - self.transfers(v)[i]


def reduced_form_wrap(utility: Callable[[np.ndarray, float], np.ndarray], qbar: float,
                      dist: ValuationDistribution) -> ValuationDistribution:
    """Reduced-form valuation law ``u(V, qbar)`` for a quantity-``qbar`` good."""
    return reduced_form(utility, qbar, dist)


def run_reduced(mechanism: Mechanism, values, utility, qbar: float) -> Outcome:
    """Run a binary mechanism on reduced-form values; the quantity is 0 or ``qbar``."""
    v = np.asarray(values, dtype=float)
    rv = np.asarray(utility(v, qbar), dtype=float)
    out = mechanism.run(rv)
    return Outcome(out.q, out.transfers, out.cost, rv, quantity=qbar * out.q)
