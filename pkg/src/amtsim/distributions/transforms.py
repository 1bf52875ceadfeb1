"""Monotone transforms h applied to valuations before thresholding."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from . import _scalar as sc
from .core import ValuationDistribution
from .moments import virtual_valuation

KINDS = ("identity", "affine", "power", "virtual", "constant")
_CODES = {"identity": sc.H_IDENTITY, "affine": sc.H_AFFINE, "power": sc.H_POWER,
          "virtual": sc.H_PSI, "constant": sc.H_CONSTANT}


@dataclass(frozen=True)
class Transform:
    """A map h on valuations.

    ``affine`` is ``a + s*v`` with ``params=(a, s)``, ``power`` is ``v**p``,
    ``virtual`` is the virtual valuation of whichever law it is paired with,
    and ``constant`` (``params=(k,)``) exists for degenerate checks.
    """

    kind: str = "identity"
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown transform {self.kind!r}")
        if self.kind == "affine" and not (len(self.params) == 2 and self.params[1] > 0.0):
            raise ConfigError("affine transform needs (intercept, positive slope)")
        if self.kind == "power" and not (len(self.params) == 1 and self.params[0] > 0.0):
            raise ConfigError("power transform needs a positive exponent")
        if self.kind == "constant" and len(self.params) != 1:
            raise ConfigError("constant transform needs its value")

    @classmethod
    def identity(cls) -> Transform:
        return cls("identity")

    @classmethod
    def affine(cls, intercept: float, slope: float) -> Transform:
        return cls("affine", (float(intercept), float(slope)))

    @classmethod
    def power(cls, exponent: float) -> Transform:
        return cls("power", (float(exponent),))

    @classmethod
    def virtual(cls) -> Transform:
        return cls("virtual")

    @classmethod
    def constant(cls, value: float = 0.0) -> Transform:
        return cls("constant", (float(value),))

    def code(self) -> tuple[int, np.ndarray]:
        hp = np.zeros(4)
        hp[: len(self.params)] = self.params
        return _CODES[self.kind], hp

    def __call__(self, v, dist: ValuationDistribution | None = None):
        v = np.asarray(v, dtype=float)
        if self.kind == "identity":
            return v.copy()
        if self.kind == "affine":
            return self.params[0] + self.params[1] * v
        if self.kind == "power":
            return np.power(v, self.params[0])
        if self.kind == "constant":
            return np.full(v.shape, self.params[0])
        if dist is None:
            raise ConfigError("the virtual transform needs the agent's distribution")
        return virtual_valuation(dist, np.maximum(v, dist.lo), strict=False)

    def derivative(self, v, dist: ValuationDistribution | None = None):
        v = np.asarray(v, dtype=float)
        if self.kind == "identity":
            return np.ones(v.shape)
        if self.kind == "affine":
            return np.full(v.shape, self.params[1])
        if self.kind == "power":
            p = self.params[0]
            with np.errstate(divide="ignore"):
                return p * np.power(v, p - 1.0)
        if self.kind == "constant":
            return np.zeros(v.shape)
        step = 1e-6 * np.maximum(1.0, np.abs(v))
        a = np.maximum(v - step, dist.lo)
        b = np.minimum(v + step, dist.hi)
        return (self(b, dist) - self(a, dist)) / (b - a)

    @property
    def strictly_increasing(self) -> bool:
        """Known analytically; the virtual transform depends on the law."""
        return self.kind in ("identity", "affine", "power")

    def is_increasing_on(self, dist: ValuationDistribution, grid: int = 2001) -> bool:
        """Strict monotonicity on a quantile grid of ``dist``."""
        if self.strictly_increasing:
            return True
        if self.kind == "constant":
            return False
        u = np.arange(1, grid + 1) / (grid + 1)
        y = self(dist.quantile(u), dist)
        return bool(np.all(np.isfinite(y)) and np.all(np.diff(y) > 0.0))

    def mean(self, dist: ValuationDistribution) -> float:
        """mu_h = E[h(V)]."""
        if self.kind == "identity":
            return dist.mean
        if self.kind == "affine":
            return self.params[0] + self.params[1] * dist.mean
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "virtual":
            # int (v f - (1 - F)) dv = -[v (1 - F)] over the support, i.e. lo
            return dist.lo
        return dist.expect(lambda v: self(v, dist))

    def bound(self, dist: ValuationDistribution) -> float:
        """b_h = sup |h| over the support (infinite for unbounded images)."""
        lo, hi = dist.lo, dist.hi
        if self.kind == "constant":
            return abs(self.params[0])
        if not math.isfinite(hi):
            return math.inf
        ends = self(np.array([lo, hi]), dist)
        if self.kind != "virtual":
            return float(np.max(np.abs(ends)))
        u = np.linspace(0.0, 1.0, 4003)[1:-1]
        inner = self(dist.quantile(u), dist)
        return float(np.nanmax(np.abs(np.concatenate((ends, inner)))))

    def inverse(self, y: float, dist: ValuationDistribution, upper: float | None = None) -> float:
        """Smallest v >= 0 with h(v) >= y, searched on ``[0, upper]``.

        Returns ``inf`` when ``y`` is not reached before ``upper`` (the
        support's top by default).
        """
        top = dist.hi if upper is None else upper
        h0 = float(self(np.array([0.0]), dist)[0])
        if h0 >= y:
            return 0.0
        if self.kind == "identity":
            x = y
        elif self.kind == "affine":
            x = (y - self.params[0]) / self.params[1]
        elif self.kind == "power":
            x = y ** (1.0 / self.params[0])
        elif self.kind == "constant":
            return math.inf
        else:
            if not math.isfinite(top):
                top = _grow_bracket(lambda v: float(self(np.array([v]), dist)[0]) - y, dist)
            g = lambda v: float(self(np.array([v]), dist)[0]) - y  # noqa: E731
            if not math.isfinite(g(top)) or g(top) < 0.0:
                return math.inf
            # psi is undefined where the density vanishes with mass still above;
            # it tends to -inf there, so NaN counts as "not reached"
            # keep g(b) >= 0 so the returned point always provides
            a, b = 0.0, top
            tol = 1e-12 * max(1.0, top)
            for _ in range(200):
                if b - a <= tol:
                    break
                mid = 0.5 * (a + b)
                if g(mid) >= 0.0:
                    b = mid
                else:
                    a = mid
            return b
        return x if x <= top else math.inf


def _grow_bracket(g, dist: ValuationDistribution) -> float:
    top = max(1.0, dist.mean)
    for _ in range(200):
        val = g(top)
        if math.isfinite(val) and val >= 0.0:
            return top
        top *= 2.0
    return math.inf
