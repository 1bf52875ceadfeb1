"""Closed-form bounds and growth-rate diagnostics.

Each function evaluates one explicit expression: normal truncated means,
Berry-Esseen error terms, the budget and regret bounds they feed, Hoeffding
tail bounds, the incentive slack of the equal-share scheme and the profit
ratio floors.  When psi and h are perfectly correlated the bivariate normal
approximation has a singular covariance; the bounds then fall back to the
univariate approximation of the psi-sum (see ``_band``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .distributions import MomentBundle
from .errors import DegenerateCorrelationError

C1_DEFAULT = 0.56
C2_DEFAULT = 70.0
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def Phi(x: float) -> float:
    """Standard normal cdf, accurate in the lower tail."""
    return float(special.ndtr(x))


@dataclass(frozen=True)
class RateSchedule:
    """``adjustment``: n -> -kappa sqrt(n) (log n)^exponent;
    ``cost``: n -> kappa n^exponent."""

    kind: str
    kappa: float
    exponent: float

    def __post_init__(self) -> None:
        if self.kind not in ("adjustment", "cost"):
            raise ValueError("schedule kind is 'adjustment' or 'cost'")
        if self.kind == "adjustment" and not self.kappa > 0.0:
            raise ValueError("adjustment schedules need kappa > 0")
        if self.kind == "cost" and (self.kappa < 0.0 or self.exponent < 0.0):
            raise ValueError("cost schedules need kappa >= 0 and exponent >= 0")

    @classmethod
    def adjustment(cls, kappa: float = 1.0, beta: float = 0.25) -> RateSchedule:
        return cls("adjustment", float(kappa), float(beta))

    @classmethod
    def cost(cls, kappa: float = 1.0, gamma: float = 0.4) -> RateSchedule:
        return cls("cost", float(kappa), float(gamma))

    def __call__(self, n: float) -> float:
        if self.kind == "adjustment":
            return -self.kappa * math.sqrt(n) * math.log(n) ** self.exponent
        return self.kappa * n ** self.exponent


@dataclass(frozen=True)
class BoundReport:
    central: float
    band: float
    lower: float
    upper: float

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= x <= self.upper + slack


def normal_truncated_mean(sigma_xy: float, sigma_y: float, n: float, alpha: float) -> float:
    """E[X 1{Y >= alpha}] for (X, Y) centred normal with Var Y = n sigma_y^2."""
    if not sigma_y > 0.0:
        raise ValueError("sigma_y must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    return math.sqrt(n) * (sigma_xy / sigma_y) * phi(alpha / (math.sqrt(n) * sigma_y))


def be_bound_uni(n: float, sigma: float, rho: float, C1: float = C1_DEFAULT) -> float:
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    return C1 * rho / (math.sqrt(n) * sigma ** 3)


def be_bound_multi(m: MomentBundle, C2: float = C2_DEFAULT, n: float | None = None) -> float:
    if m.degenerate:
        raise DegenerateCorrelationError("bivariate bound needs psi and h not perfectly correlated")
    n = m.n if n is None else n
    return C2 / math.sqrt(n) * m.eta * (m.rho_psi + m.rho_h)


def _band(m: MomentBundle, C1: float, C2: float) -> float:
    """Error-band coefficient (before the n^{1/4} factor) for the psi-sum.

    Non-degenerate bundles use the bivariate term; when psi is an affine
    image of h the psi-sum is itself the thresholded variable and the
    univariate term applies.
    """
    if m.degenerate:
        return 2.0 * C1 * m.rho_psi / m.sigma_psi ** 3 + 2.0 * m.sigma2_psi
    return 2.0 * C2 * m.eta * (m.rho_psi + m.rho_h) + 2.0 * m.sigma2_psi


def truncated_mean_bounds(m: MomentBundle, alpha: float, which: str = "multi",
                          C1: float = C1_DEFAULT, C2: float = C2_DEFAULT,
                          n: float | None = None) -> BoundReport:
    """Bracket for E[S_psi 1{S_h >= alpha}] (``multi``) or E[S_psi 1{S_psi >= alpha}] (``uni``)."""
    n = m.n if n is None else n
    q = n ** 0.25
    if which == "uni":
        central = normal_truncated_mean(m.sigma2_psi, m.sigma_psi, n, alpha)
        band = q * (2.0 * C1 * m.rho_psi / m.sigma_psi ** 3 + 2.0 * m.sigma2_psi)
    elif which == "multi":
        central = normal_truncated_mean(m.sigma_psi_h, m.sigma_h, n, alpha)
        band = q * _band(m, C1, C2)
    else:
        raise ValueError("which is 'uni' or 'multi'")
    return BoundReport(central, band, central - band, central + band)


def budget_bounds(m: MomentBundle, alpha: float, cost: float, C1: float = C1_DEFAULT,
                  C2: float = C2_DEFAULT, n: float | None = None) -> BoundReport:
    """Bracket for the ex ante budget of the mean-adjusted rule at ``alpha``."""
    t = truncated_mean_bounds(m, alpha, "multi", C1, C2, n)
    return BoundReport(t.central, t.band, t.central - t.band - cost, t.upper)


def regret_terms(m: MomentBundle, alpha: float, cost: float, C1: float = C1_DEFAULT,
                 C2: float = C2_DEFAULT, n: float | None = None) -> tuple[float, ...]:
    """The six addends of the regret-ratio bound, in order."""
    n = m.n if n is None else n
    if not m.mu > 0.0:
        raise ValueError("mean valuation must be positive")
    rn = math.sqrt(n)
    n34 = n ** 0.75
    if m.degenerate:
        fifth = 2.0 * C1 * m.rho_psi / m.sigma_psi ** 3 / (n34 * m.mu)
    else:
        fifth = 2.0 * C2 * m.eta * (m.rho_psi + m.rho_h) / (n34 * m.mu)
    return (
        cost / (n * m.mu),
        Phi(alpha / (rn * m.sigma_h)),
        C1 * m.rho_h / (rn * m.sigma_h ** 3),
        (m.sigma_psi / _SQRT_2PI) / (rn * m.mu),
        fifth,
        2.0 * m.sigma2_psi / (n34 * m.mu),
    )


def regret_upper_bound(m: MomentBundle, alpha: float, cost: float, C1: float = C1_DEFAULT,
                       C2: float = C2_DEFAULT, n: float | None = None) -> float:
    return math.fsum(regret_terms(m, alpha, cost, C1, C2, n))


@dataclass(frozen=True)
class HoeffdingBounds:
    bound_ii: float
    mu: float
    b: float

    def bound_i(self, delta: float) -> float:
        """Limit bound on P(W <= delta W*)."""
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        return math.exp(-2.0 * (1.0 - delta) ** 2 * self.mu ** 2 / self.b ** 2)


def hoeffding_ex_post(n: float, alpha: float, cost: float, mu: float, b: float,
                      b_h: float) -> HoeffdingBounds:
    """Hoeffding bounds for the ex post welfare events (bounded supports)."""
    if not (math.isfinite(b) and math.isfinite(b_h) and b > 0.0 and b_h > 0.0):
        raise ValueError("Hoeffding bounds need finite positive support bounds")
    first = math.exp(-2.0 * alpha ** 2 / (n * b_h ** 2))
    second = math.exp(-2.0 * (cost - n * mu) ** 2 / (n * b ** 2))
    return HoeffdingBounds(first + second, mu, b)


def gamma_bound(m: MomentBundle, n: int, alpha: float, cost: float, b: float, h_b: float,
                C1: float = C1_DEFAULT, C2: float = C2_DEFAULT) -> float:
    """Interim misreporting slack of the equal-share scheme.

    ``m`` holds the moments of the n-1 opponents; ``b`` is the agent's
    support top and ``h_b`` its transform there.
    """
    if not math.isfinite(b):
        raise ValueError("the incentive bound needs a bounded support")
    k = n - 1
    central = math.sqrt(k) * (m.sigma_psi_h / m.sigma_h) * phi(
        (alpha - h_b) / (math.sqrt(k) * m.sigma_h))
    return 2.0 / n * (central + k ** 0.25 * _band(m, C1, C2) + cost + b)


def profit_ratio_bound(m: MomentBundle) -> float:
    """Correlation floor sigma_psi_h / (sigma_psi sigma_h) on the profit ratio."""
    if not (m.sigma2_psi > 0.0 and m.sigma2_h > 0.0):
        raise ValueError("variances must be positive")
    return m.sigma_psi_h / (m.sigma_psi * m.sigma_h)


def dhr_profit_bound(mu: float, variance: float) -> float:
    """(sqrt 2 / 2) sqrt(1 + mu^2 / sigma^2), the identity-transform floor under DHR."""
    if not variance > 0.0:
        raise ValueError("variance must be positive")
    return math.sqrt(2.0) / 2.0 * math.sqrt(1.0 + mu * mu / variance)


def fit_loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(n)."""
    x = np.asarray(ns, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size < 3 or x.size != y.size:
        raise ValueError("need at least three (n, value) pairs")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("log-log fit needs positive n and values")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


RELATIONS = ("o", "O", "omega", "Omega", "Theta", "O_eps", "omega_eps")


@dataclass(frozen=True)
class RateCheck:
    """Outcome of a finite-grid trend test. Diagnostic only: limits are not decidable."""

    holds: bool
    relation: str
    ratios: tuple[float, ...]
    slope: float
    note: str = "diagnostic only"

    def __bool__(self) -> bool:
        return self.holds


def check_rate_membership(d: Callable[[float], float], relation: str,
                          e: Callable[[float], float], grid: Sequence[float], *,
                          tol: float = 0.02, eps: float = 0.05) -> RateCheck:
    """Test ``d_n = relation(e_n)`` by the trend of |d_n| / |e_n| on ``grid``.

    ``o``/``omega`` need a strictly decreasing/increasing ratio; ``O``,
    ``Omega`` and ``Theta`` bound the log-log slope of the ratio by ``tol``
    from the appropriate side; ``O_eps`` needs slope <= -eps and
    ``omega_eps`` needs n^eps times the ratio to increase strictly.
    """
    if relation not in RELATIONS:
        raise ValueError(f"relation must be one of {RELATIONS}")
    ns = np.asarray(sorted(grid), dtype=float)
    if ns.size < 3:
        raise ValueError("need at least three grid points")
    r = np.array([abs(d(n)) / abs(e(n)) for n in ns])
    slope = float(np.polyfit(np.log(ns), np.log(r), 1)[0]) if np.all(r > 0) else math.nan
    step = np.diff(r)
    if relation == "o":
        ok = bool(np.all(step < 0.0))
    elif relation == "omega":
        ok = bool(np.all(step > 0.0))
    elif relation == "O":
        ok = slope <= tol
    elif relation == "Omega":
        ok = slope >= -tol
    elif relation == "Theta":
        ok = abs(slope) <= tol
    elif relation == "O_eps":
        ok = slope <= -eps
    else:
        ok = bool(np.all(np.diff(r * ns ** eps) > 0.0))
    return RateCheck(ok, relation, tuple(float(x) for x in r), slope)
