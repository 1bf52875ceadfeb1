"""Valuation laws: built-in families, tabulated laws and monotone pushforwards."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import PchipInterpolator

from ..errors import ConfigError, UnsupportedUtilityError
from . import _scalar as sc

FAMILIES = ("uniform", "exponential", "weibull", "exp-mixture", "tabulated", "pushforward")
_CODES = {"uniform": sc.UNIFORM, "exponential": sc.EXPONENTIAL, "weibull": sc.WEIBULL,
          "exp-mixture": sc.MIXEXP, "tabulated": sc.TABULATED}


@dataclass(frozen=True)
class Kernel:
    """Flat numeric description of a law, as consumed by the numba routines."""

    code: int
    params: np.ndarray
    cap: float
    Fcap: float
    hi: float
    tx: np.ndarray
    tF: np.ndarray
    td: np.ndarray


@dataclass(frozen=True)
class ValuationDistribution:
    """One agent's valuation law.

    ``params`` depends on ``family``: ``(lo, hi)`` for uniform, ``(rate,)``
    for exponential, ``(shape, scale)`` for Weibull, ``(weight, rate1,
    rate2)`` for the two-component exponential mixture.  Tabulated laws
    carry their ``(v, F(v))`` knots in ``knots``.  A finite ``cap``
    truncates the law to ``[lo, cap]``.
    """

    family: str
    params: tuple[float, ...] = ()
    cap: float = math.inf
    knots: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    base: ValuationDistribution | None = None
    push: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown distribution family {self.family!r}")
        p = self.params
        if self.family == "uniform" and not (len(p) == 2 and 0.0 <= p[0] < p[1] < math.inf):
            raise ConfigError("uniform needs 0 <= lo < hi < inf")
        if self.family == "exponential" and not (len(p) == 1 and p[0] > 0.0):
            raise ConfigError("exponential needs a positive rate")
        if self.family == "weibull" and not (len(p) == 2 and p[0] > 0.0 and p[1] > 0.0):
            raise ConfigError("weibull needs positive shape and scale")
        if self.family == "exp-mixture" and not (
            len(p) == 3 and 0.0 < p[0] < 1.0 and p[1] > 0.0 and p[2] > 0.0
        ):
            raise ConfigError("exp-mixture needs weight in (0,1) and two positive rates")
        if self.family == "tabulated":
            _check_knots(self.knots)
        if self.family == "pushforward" and (self.base is None or self.push is None):
            raise ConfigError("pushforward needs a base law and a map")
        if not self.cap > self.lo:
            raise ConfigError("cap must exceed the support lower bound")
        if self.family == "pushforward" and math.isfinite(self.cap):
            raise ConfigError("cap a pushforward through its base law instead")

    # -- constructors -------------------------------------------------------

    @classmethod
    def uniform(cls, lo: float = 0.0, hi: float = 1.0) -> ValuationDistribution:
        return cls("uniform", (float(lo), float(hi)))

    @classmethod
    def exponential(cls, rate: float = 1.0) -> ValuationDistribution:
        return cls("exponential", (float(rate),))

    @classmethod
    def weibull(cls, shape: float, scale: float = 1.0) -> ValuationDistribution:
        return cls("weibull", (float(shape), float(scale)))

    @classmethod
    def exp_mixture(cls, weight: float, rate1: float, rate2: float) -> ValuationDistribution:
        return cls("exp-mixture", (float(weight), float(rate1), float(rate2)))

    @classmethod
    def tabulated(cls, v, F) -> ValuationDistribution:
        knots = (tuple(float(x) for x in v), tuple(float(x) for x in F))
        return cls("tabulated", (), knots=knots)

    @classmethod
    def from_csv(cls, path: str | Path) -> ValuationDistribution:
        """Read a two-column ``v,F(v)`` table; a non-numeric first row is a header."""
        v, F = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for k, row in enumerate(csv.reader(fh)):
                if not row or not "".join(row).strip():
                    continue
                try:
                    a, b = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if k == 0:
                        continue
                    raise ConfigError(f"{path}: bad row {k + 1}: {row!r}") from None
                v.append(a)
                F.append(b)
        return cls.tabulated(v, F)

    def truncated(self, cap: float) -> ValuationDistribution:
        return ValuationDistribution(self.family, self.params, float(cap), self.knots,
                                     self.base, self.push)

    # -- support ------------------------------------------------------------

    @property
    def lo(self) -> float:
        if self.family == "uniform":
            return self.params[0]
        if self.family == "tabulated":
            return self.knots[0][0]
        if self.family == "pushforward":
            return float(self.push(np.array([self.base.lo]))[0])
        return 0.0

    @property
    def hi(self) -> float:
        if self.family == "uniform":
            top = self.params[1]
        elif self.family == "tabulated":
            top = self.knots[0][-1]
        elif self.family == "pushforward":
            top = float(self.push(np.array([self.base.hi]))[0]) if math.isfinite(self.base.hi) \
                else math.inf
        else:
            top = math.inf
        return min(top, self.cap)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.hi)

    @property
    def codeable(self) -> bool:
        """Whether the fused simulation kernel can draw from this law."""
        return self.family in _CODES

    # -- numeric core -------------------------------------------------------

    @cached_property
    def kernel(self) -> Kernel:
        if not self.codeable:
            raise TypeError(f"{self.family} laws have no kernel form")
        p = np.zeros(4)
        if self.family == "tabulated":
            tx, tF, td = _pchip_arrays(self.knots)
            p[0], p[1] = 0.0, float(tx.size)
        else:
            tx = tF = td = np.zeros(1)
            p[: len(self.params)] = self.params
        code = _CODES[self.family]
        Fcap = 1.0
        if math.isfinite(self.cap):
            Fcap = float(sc.base_cdf(code, p, tx, tF, td, self.cap))
            if Fcap >= 1.0:
                Fcap = 1.0
            elif not Fcap > 0.0:
                raise ConfigError("cap leaves no probability mass")
        return Kernel(code, p, self.cap, Fcap, self.hi, tx, tF, td)

    def _args(self):
        k = self.kernel
        return k.code, k.params, k.tx, k.tF, k.td, k.cap, k.Fcap

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        if self.family == "pushforward":
            return self.base.cdf(self._pull(v))
        return sc.vec_cdf(*self._args(), v.ravel()).reshape(v.shape)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        if self.family == "pushforward":
            x = self._pull(v)
            return self.base.pdf(x) / self._push_slope(x)
        return sc.vec_pdf(*self._args(), v.ravel()).reshape(v.shape)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "pushforward":
            return np.asarray(self.push(self.base.quantile(u)), dtype=float)
        return sc.vec_quantile(*self._args(), u.ravel()).reshape(u.shape)

    def sample(self, u):
        """Inverse-cdf draw: the valuation at uniform level ``u``."""
        return self.quantile(u)

    def survival(self, v):
        return 1.0 - self.cdf(v)

    @cached_property
    def mean(self) -> float:
        if not math.isfinite(self.cap):
            p = self.params
            if self.family == "uniform":
                return 0.5 * (p[0] + p[1])
            if self.family == "exponential":
                return 1.0 / p[0]
            if self.family == "weibull":
                return p[1] * special.gamma(1.0 + 1.0 / p[0])
            if self.family == "exp-mixture":
                return p[0] / p[1] + (1.0 - p[0]) / p[2]
        return self.expect(lambda v: v)

    def expect(self, g: Callable[[np.ndarray], np.ndarray], *, epsabs: float = 1e-10) -> float:
        """E[g(V)] by adaptive quadrature on the quantile scale."""
        def integrand(u):
            return float(g(self.quantile(np.array([u])))[0])

        val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=epsabs, epsrel=1e-10, limit=400)
        return float(val)

    # -- pushforward helpers --------------------------------------------------

    def _pull(self, y: np.ndarray) -> np.ndarray:
        """Invert the pushforward map pointwise by bracketing root search."""
        base = self.base
        lo = base.lo
        hi = base.hi if base.bounded else float(base.quantile(np.array([1.0 - 1e-16]))[0])
        glo = float(self.push(np.array([lo]))[0])
        ghi = float(self.push(np.array([hi]))[0])
        out = np.empty(y.size)
        for k, t in enumerate(y.ravel()):
            if t <= glo:
                out[k] = lo
            elif t >= ghi:
                out[k] = hi
            else:
                out[k] = optimize.brentq(lambda x: float(self.push(np.array([x]))[0]) - t,
                                         lo, hi, xtol=1e-14)
        return out.reshape(y.shape)

    def _push_slope(self, x: np.ndarray) -> np.ndarray:
        step = 1e-6 * np.maximum(1.0, np.abs(x))
        a = np.maximum(x - step, self.base.lo)
        b = x + step
        return (self.push(b) - self.push(a)) / (b - a)


def _check_knots(knots) -> None:
    if knots is None:
        raise ConfigError("tabulated law needs (v, F) knots")
    v, F = (np.asarray(k, dtype=float) for k in knots)
    if v.size < 2 or v.size != F.size:
        raise ConfigError("tabulated law needs at least two (v, F) rows of equal length")
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(F))):
        raise ConfigError("tabulated knots must be finite")
    if v[0] < 0.0 or np.any(np.diff(v) <= 0.0):
        raise ConfigError("tabulated v must be nonnegative and strictly increasing")
    if np.any(np.diff(F) < 0.0) or abs(F[0]) > 1e-12 or abs(F[-1] - 1.0) > 1e-12:
        raise ConfigError("tabulated F must be nondecreasing from 0 to 1")


def _pchip_arrays(knots):
    x = np.asarray(knots[0], dtype=float)
    F = np.asarray(knots[1], dtype=float)
    d = PchipInterpolator(x, F).derivative()(x)
    return x, F, np.asarray(d, dtype=float)


def reduced_form(utility: Callable[[np.ndarray, float], np.ndarray], qbar: float,
                 dist: ValuationDistribution, *, grid: int = 2001) -> ValuationDistribution:
    """Law of the reduced-form valuation ``u(V, qbar)``.

    The map ``v -> u(v, qbar)`` must be nondecreasing on the support; the
    result is its pushforward, with quantile ``u(quantile_V(p), qbar)``.
    """
    levels = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    x = np.concatenate(([dist.lo], dist.quantile(levels)))
    if dist.bounded:
        x = np.append(x, dist.hi)
    y = np.asarray(utility(x, qbar), dtype=float)
    if not np.all(np.isfinite(y)) or np.any(y < 0.0):
        raise UnsupportedUtilityError("utility must be finite and nonnegative")
    if np.any(np.diff(y) < -1e-12 * np.maximum(1.0, np.abs(y[1:]))):
        raise UnsupportedUtilityError("utility is not monotone in the valuation")
    zero = np.asarray(utility(x, 0.0), dtype=float)
    if np.any(np.abs(zero) > 1e-12):
        raise UnsupportedUtilityError("utility must vanish at zero quantity")

    def push(v, _u=utility, _q=qbar):
        return np.asarray(_u(np.asarray(v, dtype=float), _q), dtype=float)

    return ValuationDistribution("pushforward", (float(qbar),), base=dist, push=push)
