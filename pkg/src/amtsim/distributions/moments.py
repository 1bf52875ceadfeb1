"""Virtual valuations, shape diagnostics and the averaged moment bundle."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np
from scipy import integrate

from ..errors import DegenerateCorrelationError, DivergentMomentError, SingularDensityError
from . import _scalar as sc
from .core import ValuationDistribution

if TYPE_CHECKING:
    from .transforms import Transform

DEFAULT_GRID = 10_001
QUAD_EPSABS = 1e-8
DEGENERACY_TOL = 1e-8


class EndpointWarning(UserWarning):
    """psi was evaluated at a finite upper endpoint and replaced by its limit."""


def virtual_valuation(dist: ValuationDistribution, v, *, strict: bool = True):
    """psi(v) = v - (1 - F(v)) / f(v).

    Below the density floor the formula is undefined: ``strict`` raises
    :class:`SingularDensityError`, otherwise NaN is returned there.  At a
    finite upper endpoint the survival term vanishes and the one-sided limit
    ``psi(hi) = hi`` is used, with an :class:`EndpointWarning`.
    """
    v = np.asarray(v, dtype=float)
    flat = v.ravel()
    if dist.codeable:
        out = sc.vec_psi(*dist._args(), flat)
    else:
        f = dist.pdf(flat)
        s = dist.survival(flat)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(f > sc.DENSITY_FLOOR, flat - s / f, np.nan)
    hi = dist.hi
    if math.isfinite(hi):
        at_top = flat >= hi
        if np.any(at_top):
            warnings.warn("virtual valuation at the upper endpoint uses its one-sided limit",
                          EndpointWarning, stacklevel=2)
            out = np.where(at_top & ~np.isfinite(out), hi, out)
    if strict and np.any(np.isnan(out)):
        bad = flat[np.isnan(out)][0]
        raise SingularDensityError(f"density below {sc.DENSITY_FLOOR:g} at v={bad:.17g}")
    return out.reshape(v.shape) if v.ndim else float(out[0])


def _levels(grid: int) -> np.ndarray:
    if grid < 2:
        raise ValueError("grid must have at least two points")
    return np.arange(1, grid + 1) / (grid + 1)


def is_myerson_regular(dist: ValuationDistribution, grid: int = DEFAULT_GRID) -> bool:
    """Whether psi is nondecreasing across the quantile grid (a diagnostic)."""
    v = dist.quantile(_levels(grid))
    p = virtual_valuation(dist, v)
    scale = np.maximum(1.0, np.abs(p[1:]))
    return bool(np.all(np.diff(p) >= -1e-12 * scale))


def hazard_rate(dist: ValuationDistribution, v):
    v = np.asarray(v, dtype=float)
    f = dist.pdf(v)
    s = dist.survival(v)
    if np.any(f <= sc.DENSITY_FLOOR):
        raise SingularDensityError("density below floor on the hazard grid")
    return f / s


def has_dhr(dist: ValuationDistribution, grid: int = DEFAULT_GRID) -> bool:
    """Whether the hazard f/(1-F) is nonincreasing across the quantile grid."""
    v = dist.quantile(_levels(grid))
    if dist.codeable and dist.family != "uniform" and not math.isfinite(dist.cap):
        # survival from the closed form avoids cancellation in the far tail
        k = dist.kernel
        s = np.array([sc.base_sf(k.code, k.params, k.tx, k.tF, k.td, x) for x in v])
        f = dist.pdf(v)
        if np.any(f <= sc.DENSITY_FLOOR):
            raise SingularDensityError("density below floor on the hazard grid")
        r = f / s
    else:
        r = hazard_rate(dist, v)
    scale = np.maximum(1.0, np.abs(r[1:]))
    return bool(np.all(np.diff(r) <= 1e-12 * scale))


def _quad(fn: Callable[[float], float], what: str) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, 0.0, 1.0, epsabs=QUAD_EPSABS, epsrel=1e-10, limit=500)
    if not (math.isfinite(val) and math.isfinite(err)) or err > max(1e-6, 1e-6 * abs(val)):
        raise DivergentMomentError(f"quadrature for {what} did not converge (err={err:.3g})")
    return float(val)


def cov_psi_h(dist: ValuationDistribution, h: Transform) -> float:
    """sigma_psi_h = E[int_0^V v dh(v)].

    Evaluated on the quantile scale as int_0^1 Q(u) h'(Q(u)) (1-u) / f(Q(u)) du,
    which is the same integral after substituting v = Q(u) and exchanging
    the order of integration.
    """
    if h.kind == "constant":
        return 0.0

    def integrand(u: float) -> float:
        v = dist.quantile(np.array([u]))
        f = float(dist.pdf(v)[0])
        if not f > sc.DENSITY_FLOOR:
            return 0.0 if f == math.inf else math.nan
        return float(v[0] * h.derivative(v, dist)[0]) * (1.0 - u) / f

    return _quad(integrand, "cov(psi, h)")


@dataclass(frozen=True)
class AgentMoments:
    mu: float
    mu_h: float
    sigma2_psi: float
    rho_psi: float
    sigma2_h: float
    rho_h: float
    sigma_psi_h: float
    b: float
    b_h: float


def agent_moments(dist: ValuationDistribution, h: Transform) -> AgentMoments:
    """Per-agent moments by quantile-scale quadrature."""
    def at(u: float) -> tuple[float, float]:
        v = dist.quantile(np.array([u]))
        return virtual_valuation(dist, v, strict=False)[0], float(h(v, dist)[0])

    mu_h = h.mean(dist)
    s2p = _quad(lambda u: at(u)[0] ** 2, "E psi^2")
    r_p = _quad(lambda u: abs(at(u)[0]) ** 3, "E |psi|^3")
    s2h = _quad(lambda u: (at(u)[1] - mu_h) ** 2, "E (h - mu_h)^2")
    r_h = _quad(lambda u: abs(at(u)[1] - mu_h) ** 3, "E |h - mu_h|^3")
    for rho, s2, name in ((r_p, s2p, "psi"), (r_h, s2h, "h")):
        if rho < (1.0 - 1e-6) * s2 ** 1.5 - 1e-12:
            raise DivergentMomentError(f"Lyapunov ordering fails for {name}: quadrature unreliable")
    return AgentMoments(
        mu=dist.mean, mu_h=mu_h, sigma2_psi=s2p, rho_psi=r_p, sigma2_h=s2h, rho_h=r_h,
        sigma_psi_h=cov_psi_h(dist, h), b=dist.hi, b_h=h.bound(dist),
    )


@dataclass(frozen=True)
class MomentBundle:
    """Population averages over n agents of the per-agent moments.

    ``eta`` is ``((s2_psi + s2_h) / (s2_psi s2_h - s_psi_h^2))^{3/2}``; it is
    infinite when psi and h are (numerically) perfectly correlated.
    """

    n: int
    mu: float
    sigma2_psi: float
    rho_psi: float
    sigma2_h: float
    rho_h: float
    sigma_psi_h: float
    eta: float
    b: float
    b_h: float

    @property
    def sigma_psi(self) -> float:
        return math.sqrt(self.sigma2_psi)

    @property
    def sigma_h(self) -> float:
        return math.sqrt(self.sigma2_h)

    @property
    def degenerate(self) -> bool:
        return not math.isfinite(self.eta)

    @property
    def correlation(self) -> float:
        return self.sigma_psi_h / (self.sigma_psi * self.sigma_h)

    def resized(self, n: int) -> MomentBundle:
        """The same averages attributed to ``n`` agents (exact for i.i.d. agents)."""
        return replace(self, n=int(n))


def eta_from(s2p: float, s2h: float, sph: float) -> float:
    det = s2p * s2h - sph * sph
    if det <= DEGENERACY_TOL * s2p * s2h:
        return math.inf
    return ((s2p + s2h) / det) ** 1.5


def compute_moments(dists: Sequence[ValuationDistribution], hs: Sequence[Transform], *,
                    strict: bool = False) -> MomentBundle:
    """Average the per-agent moments of ``(dists[i], hs[i])``.

    With ``strict`` a perfectly correlated (psi, h) pair raises
    :class:`DegenerateCorrelationError`; otherwise the bundle is returned with
    ``eta = inf`` and callers decide how to proceed.
    """
    if len(dists) != len(hs):
        raise ValueError("need one transform per distribution")
    n = len(dists)
    if n < 2:
        raise ValueError("need at least two agents")
    cache: dict[tuple, AgentMoments] = {}
    rows = []
    for d, h in zip(dists, hs):
        key = (d, h)
        if key not in cache:
            cache[key] = agent_moments(d, h)
        rows.append(cache[key])

    def avg(name: str) -> float:
        return math.fsum(getattr(r, name) for r in rows) / n

    s2p, s2h, sph = avg("sigma2_psi"), avg("sigma2_h"), avg("sigma_psi_h")
    eta = eta_from(s2p, s2h, sph)
    if strict and not math.isfinite(eta):
        raise DegenerateCorrelationError("psi and h are perfectly correlated; eta is infinite")
    return MomentBundle(
        n=n, mu=avg("mu"), sigma2_psi=s2p, rho_psi=avg("rho_psi"), sigma2_h=s2h,
        rho_h=avg("rho_h"), sigma_psi_h=sph, eta=eta, b=avg("b"), b_h=avg("b_h"),
    )


def iid_moments(dist: ValuationDistribution, h: Transform, n: int, *,
                strict: bool = False) -> MomentBundle:
    return compute_moments([dist] * n, [h] * n, strict=strict)
