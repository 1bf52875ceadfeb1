"""Replicated simulation of mechanisms: ex ante reports, conditional budgets,
incentive probes and ex post tail frequencies.

Every replication writes its own row of a result array, so estimates are
reductions over arrays whose contents do not depend on how replications
were split across worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import mechanisms as mech
from ..distributions import ValuationDistribution
from ..errors import ConfigError, SimulationError, UnboundedSupportError
from . import kernel as K
from .rng import uniforms

MIN_REPLICATIONS = 100
FAILURE_LIMIT = 1e-3
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class RngPlan:
    """Master seed plus a stream id; replication ``r`` of agent ``j`` uses
    counter ``(j, stream, r)`` under key ``seed``."""

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not 0 <= int(self.stream) < 2**32:
            raise ConfigError("stream id must fit in 32 bits")

    def substream(self, stream: int) -> RngPlan:
        return RngPlan(self.seed, stream)


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    R: int
    exact_zero: bool = False

    @classmethod
    def of(cls, x: np.ndarray) -> Estimate:
        x = np.asarray(x, dtype=float)
        R = x.size
        se = float(np.std(x, ddof=1) / math.sqrt(R)) if R > 1 else math.nan
        return cls(float(np.mean(x)), se, R)

    @classmethod
    def zero(cls, R: int) -> Estimate:
        return cls(0.0, 0.0, R, exact_zero=True)

    def lower(self, z: float) -> float:
        return self.value - z * self.se

    def upper(self, z: float) -> float:
        return self.value + z * self.se


def ratio_estimate(num: np.ndarray, den: np.ndarray) -> Estimate:
    """mean(num)/mean(den) with a delta-method standard error (same draws)."""
    mn, md = float(np.mean(num)), float(np.mean(den))
    R = num.size
    if md == 0.0:
        return Estimate(math.nan, math.nan, R)
    z = (num - (mn / md) * den) / md
    return Estimate(mn / md, float(np.std(z, ddof=1) / math.sqrt(R)), R)


@dataclass(frozen=True)
class ExAnteReport:
    n: int
    alpha: float
    cost: float
    scheme: str
    budget: Estimate
    welfare: Estimate
    efficient_welfare: Estimate
    provision: Estimate
    regret: Estimate
    failures: int = 0
    psi_surplus: Estimate | None = None

    @property
    def profit(self) -> Estimate:
        """The ex ante budget read as a seller's profit."""
        return self.budget


# -- type tables ---------------------------------------------------------------


@dataclass(frozen=True)
class _Tables:
    agent_type: np.ndarray
    members: np.ndarray
    moff: np.ndarray
    fam: np.ndarray
    par: np.ndarray
    cap: np.ndarray
    Fcap: np.ndarray
    hi: np.ndarray
    hc: np.ndarray
    hp: np.ndarray
    tx: np.ndarray
    tF: np.ndarray
    td: np.ndarray


def _tables(rule: mech.DecisionRule) -> _Tables:
    keys: dict[tuple, int] = {}
    agent_type = np.empty(rule.n, dtype=np.int64)
    for j, key in enumerate(zip(rule.dists, rule.transforms)):
        agent_type[j] = keys.setdefault(key, len(keys))
    order = np.argsort(agent_type, kind="stable")
    counts = np.bincount(agent_type, minlength=len(keys))
    moff = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    m = len(keys)
    fam = np.empty(m, dtype=np.int64)
    par = np.zeros((m, 4))
    cap, Fcap, hi = np.empty(m), np.empty(m), np.empty(m)
    hc = np.empty(m, dtype=np.int64)
    hp = np.zeros((m, 4))
    tx, tF, td = [np.zeros(1)], [np.zeros(1)], [np.zeros(1)]
    offset = 1
    for (d, h), t in keys.items():
        k = d.kernel
        fam[t] = k.code
        par[t] = k.params
        if d.family == "tabulated":
            par[t, 0] = offset
            tx.append(k.tx)
            tF.append(k.tF)
            td.append(k.td)
            offset += k.tx.size
        cap[t], Fcap[t], hi[t] = k.cap, k.Fcap, k.hi
        hc[t], hp[t] = h.code()
    return _Tables(agent_type, order.astype(np.int64), moff, fam, par, cap, Fcap, hi, hc, hp,
                   np.concatenate(tx), np.concatenate(tF), np.concatenate(td))


def _kernel_ready(rule: mech.DecisionRule) -> bool:
    return all(d.codeable for d in set(rule.dists))


def _chunks(R: int, n: int) -> list[tuple[int, int]]:
    size = max(1, min(R, _CHUNK_ELEMENTS // max(n, 1)))
    return [(s, min(R, s + size)) for s in range(0, R, size)]


def _run_chunks(fn, R: int, n: int, workers: int) -> None:
    spans = _chunks(R, n)
    if workers <= 1 or len(spans) == 1:
        for a, b in spans:
            fn(a, b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for fut in [pool.submit(fn, a, b) for a, b in spans]:
            fut.result()


# -- free replications ---------------------------------------------------------


def simulate_free(rule: mech.DecisionRule, R: int, plan: RngPlan, *, transfers: bool = True,
                  psi: bool = False, workers: int = 1, backend: str = "auto") -> np.ndarray:
    """Per-replication columns (q, sum v, sum t, sum psi, failed) for R draws."""
    out = np.empty((R, K.N_FREE))
    n = rule.n
    if backend == "auto":
        backend = "kernel" if _kernel_ready(rule) else "reference"
    if backend == "kernel":
        tb = _tables(rule)
        T = rule.threshold

        def work(a: int, b: int) -> None:
            bufs = [np.empty(n) for _ in range(4)]
            K.run_free(np.uint64(plan.seed), np.uint64(plan.stream), np.uint64(a), out[a:b], T,
                       tb.agent_type, tb.members, tb.moff, tb.fam, tb.par, tb.cap, tb.Fcap,
                       tb.hi, tb.hc, tb.hp, tb.tx, tb.tF, tb.td, transfers, psi, *bufs)
    elif backend == "reference":
        def work(a: int, b: int) -> None:
            for r in range(a, b):
                out[r] = _reference_row(rule, plan, r, transfers, psi)
    else:
        raise ConfigError(f"unknown backend {backend!r}")
    _run_chunks(work, R, n, workers)
    return out


def draw_profile(rule: mech.DecisionRule, plan: RngPlan, rep: int) -> np.ndarray:
    """The valuation profile of replication ``rep`` (same draws as the kernel)."""
    u = uniforms(plan.seed, plan.stream, rep, rule.n)
    v = np.empty(rule.n)
    for (d, _h), idx in rule.groups.items():
        v[idx] = d.quantile(u[idx])
    return v


def _reference_row(rule, plan, rep, transfers, psi) -> np.ndarray:
    from ..distributions import virtual_valuation

    v = draw_profile(rule, plan, rep)
    hv = rule.h_values(v)
    q = 1.0 if hv.sum() >= rule.threshold else 0.0
    bad = bool(np.isnan(hv).any())
    st = 0.0
    if transfers and q == 1.0 and not bad:
        st = float(np.sum(mech._pivotals(rule, v, hv)))
    sp = 0.0
    if psi:
        ps = np.empty(rule.n)
        for (d, _h), idx in rule.groups.items():
            ps[idx] = virtual_valuation(d, v[idx], strict=False)
        sp = float(np.sum(ps))
        bad = bad or math.isnan(sp)
    return np.array([q, float(np.sum(v)), st, sp, 1.0 if bad else 0.0])


def check_failures(fail: np.ndarray) -> int:
    count = int(np.count_nonzero(fail))
    if count > FAILURE_LIMIT * fail.size:
        raise SimulationError(f"{count} of {fail.size} replications failed "
                              f"(limit {FAILURE_LIMIT:.1%})")
    return count


def estimate_exante(mechanism: mech.Mechanism, R: int, plan: RngPlan, *, workers: int = 1,
                    psi: bool = False, backend: str = "auto") -> ExAnteReport:
    """Budget, welfare, efficient welfare, provision probability and regret ratio.

    All fields come from the same R profiles.  The pairwise scheme's budget
    is its estimator's E[B] on every profile; the equal-share scheme's
    budget is exactly zero.
    """
    if R < MIN_REPLICATIONS:
        raise ConfigError(f"need at least {MIN_REPLICATIONS} replications")
    rule, c = mechanism.rule, mechanism.cost
    cols = simulate_free(rule, R, plan, transfers=mechanism.scheme == "pivotal", psi=psi,
                         workers=workers, backend=backend)
    failures = check_failures(cols[:, K.FAIL])
    cols = cols[cols[:, K.FAIL] == 0.0]
    q, sv, st, sp = cols[:, K.Q], cols[:, K.SUM_V], cols[:, K.SUM_T], cols[:, K.SUM_PSI]
    Rk = q.size
    wstar = np.where(sv >= c, sv - c, 0.0)
    if mechanism.scheme == "pivotal":
        b = st - c * q
        budget = Estimate.of(b)
        w = sv * q - st
    elif mechanism.scheme == "double-dagger":
        budget = Estimate.zero(Rk)
        w = (sv - c) * q
    else:
        eb = float(mechanism.estimator.mean)
        budget = Estimate(eb, float(getattr(mechanism.estimator, "mean_se", 0.0)), Rk)
        w = (sv - c) * q - eb
    regret = ratio_estimate(wstar - w, wstar)
    surplus = None
    if psi:
        surplus = Estimate.of(np.where(sp >= c, sp - c, 0.0))
    alpha = rule.level if rule.mode == mech.MEAN_ADJUSTED else math.nan
    return ExAnteReport(rule.n, alpha, c, mechanism.scheme, budget, Estimate.of(w),
                        Estimate.of(wstar), Estimate.of(q), regret, failures, surplus)


# -- pinned replications -------------------------------------------------------


def simulate_pinned(rule: mech.DecisionRule, i: int, values, R: int, plan: RngPlan, *,
                    partner: int = -1, workers: int = 1,
                    backend: str = "auto") -> np.ndarray:
    """Array ``(R, K, 5)`` of (q, sum v, sum t, t_i, v_partner) with V_i pinned.

    Opponents use exactly the draws they have in the free simulation, so
    pinned values share common random numbers with each other.
    """
    zs = np.asarray(values, dtype=float).ravel()
    if not 0 <= i < rule.n:
        raise ConfigError("pinned agent index out of range")
    out = np.empty((R, zs.size, K.N_PINNED))
    fail = np.zeros(R)
    n = rule.n
    if backend == "auto":
        backend = "kernel" if _kernel_ready(rule) else "reference"
    if backend == "kernel":
        tb = _tables(rule)
        T = rule.threshold

        def work(a: int, b: int) -> None:
            bufs = [np.empty(n) for _ in range(4)]
            K.run_pinned(np.uint64(plan.seed), np.uint64(plan.stream), np.uint64(a), out[a:b],
                         fail[a:b], i, partner, zs, T, tb.agent_type, tb.members, tb.moff,
                         tb.fam, tb.par, tb.cap, tb.Fcap, tb.hi, tb.hc, tb.hp, tb.tx, tb.tF,
                         tb.td, *bufs)
    elif backend == "reference":
        def work(a: int, b: int) -> None:
            for r in range(a, b):
                v = draw_profile(rule, plan, r)
                for k, z in enumerate(zs):
                    v[i] = z
                    t = mech.transfers_pivotal(rule, v)
                    out[r, k] = (rule.decide(v), np.sum(v), np.sum(t), t[i],
                                 v[partner] if partner >= 0 else math.nan)
    else:
        raise ConfigError(f"unknown backend {backend!r}")
    _run_chunks(work, R, n * max(1, zs.size), workers)
    check_failures(fail)
    return out[fail == 0.0]


def estimate_conditional_budget(mechanism: mech.Mechanism, i: int, v_i: float, R: int,
                                plan: RngPlan, *, workers: int = 1) -> Estimate:
    """E[B | V_i = v_i] of the baseline scheme, by simulating the other agents."""
    return conditional_budget_curve(mechanism, i, [v_i], R, plan, workers=workers)[0]


def conditional_budget_curve(mechanism: mech.Mechanism, i: int, values, R: int, plan: RngPlan,
                             *, workers: int = 1) -> list[Estimate]:
    if R < MIN_REPLICATIONS:
        raise ConfigError(f"need at least {MIN_REPLICATIONS} replications")
    arr = simulate_pinned(mechanism.rule, i, values, R, plan, workers=workers)
    b = arr[:, :, K.PSUM_T] - mechanism.cost * arr[:, :, K.PQ]
    return [Estimate.of(b[:, k]) for k in range(b.shape[1])]


@dataclass(frozen=True)
class BudgetCurve:
    """Interpolated E[B | V_i = v] per agent type, plus E[B].

    Built by pinning one representative agent of each distinct
    (distribution, transform) pair on a quantile grid.  It satisfies the
    conditional-budget protocol used by the pairwise transfer scheme.
    """

    mean: float
    mean_se: float
    agent_type: np.ndarray = field(repr=False)
    grids: tuple[np.ndarray, ...] = field(repr=False)
    values: tuple[np.ndarray, ...] = field(repr=False)

    def conditional(self, i: int, v: float) -> float:
        t = int(self.agent_type[i])
        return float(np.interp(v, self.grids[t], self.values[t]))


def fit_budget_curve(mechanism: mech.Mechanism, R: int, plan: RngPlan, *, points: int = 33,
                     workers: int = 1) -> BudgetCurve:
    """Estimate E[B] and E[B | V_i = .] on a quantile grid for each agent type."""
    rule = mechanism.rule
    base = mech.Mechanism(rule, mechanism.cost, "pivotal")
    tb = _tables(rule)
    report = estimate_exante(base, R, plan, workers=workers)
    grids, vals = [], []
    levels = (np.arange(points) + 0.5) / points
    for t in range(tb.moff.size - 1):
        rep = int(tb.members[tb.moff[t]])
        d: ValuationDistribution = rule.dists[rep]
        g = d.quantile(levels)
        if d.bounded:
            g = np.concatenate(([d.lo], g, [d.hi]))
        else:
            g = np.concatenate(([d.lo], g))
        est = conditional_budget_curve(base, rep, g, R, plan.substream(plan.stream + 1),
                                       workers=workers)
        grids.append(g)
        vals.append(np.array([e.value for e in est]))
    return BudgetCurve(report.budget.value, report.budget.se, tb.agent_type, tuple(grids),
                       tuple(vals))


# -- incentives ---------------------------------------------------------------


def _pinned_transfer(mechanism: mech.Mechanism, i: int, zs: np.ndarray,
                     arr: np.ndarray) -> np.ndarray:
    """Agent i's transfer under the mechanism's scheme, shape (R, K)."""
    c, n = mechanism.cost, mechanism.rule.n
    t = arr[:, :, K.PT_PIN]
    if mechanism.scheme == "pivotal":
        return t
    B = arr[:, :, K.PSUM_T] - c * arr[:, :, K.PQ]
    if mechanism.scheme == "double-dagger":
        return t - B / n
    est = mechanism.estimator
    if i % 2 == 0:
        g = np.array([est.conditional(i, z) for z in zs])
        return t - (2.0 / n) * (B - g[None, :])
    partner_v = arr[:, 0, K.PV_PARTNER]
    g = np.array([est.conditional(i - 1, v) for v in partner_v])
    return t - (2.0 / n) * (g[:, None] - est.mean)


def _pinned_utilities(mechanism, i, zs, R, plan, workers):
    partner = i - 1 if (mechanism.scheme == "dagger" and i % 2 == 1) else -1
    arr = simulate_pinned(mechanism.rule, i, zs, R, plan, partner=partner, workers=workers)
    return arr[:, :, K.PQ], _pinned_transfer(mechanism, i, zs, arr)


@dataclass(frozen=True)
class IncentiveProbe:
    gamma: float
    se: float
    value: float
    report: float
    gains: np.ndarray = field(repr=False)
    gain_se: np.ndarray = field(repr=False)


def probe_incentives(mechanism: mech.Mechanism, i: int, values, reports, R: int,
                     plan: RngPlan, *, workers: int = 1) -> IncentiveProbe:
    """Largest interim gain from misreporting over the (value, report) grid.

    Every pinned report sees the same opponent draws, so each gain is a
    mean of paired per-replication differences.
    """
    values = np.asarray(values, dtype=float).ravel()
    reports = np.asarray(reports, dtype=float).ravel()
    zs = np.unique(np.concatenate((values, reports)))
    q, t = _pinned_utilities(mechanism, i, zs, R, plan, workers)
    pos = {z: k for k, z in enumerate(zs)}
    gains = np.empty((values.size, reports.size))
    ses = np.empty_like(gains)
    for a, v in enumerate(values):
        kt = pos[v]
        truth = v * q[:, kt] - t[:, kt]
        for b, r in enumerate(reports):
            kr = pos[r]
            if kr == kt:
                gains[a, b], ses[a, b] = 0.0, 0.0
                continue
            e = Estimate.of(v * q[:, kr] - t[:, kr] - truth)
            gains[a, b], ses[a, b] = e.value, e.se
    a, b = np.unravel_index(int(np.argmax(gains)), gains.shape)
    return IncentiveProbe(float(gains[a, b]), float(ses[a, b]), float(values[a]),
                          float(reports[b]), gains, ses)


def interim_utilities(mechanism: mech.Mechanism, i: int, values, R: int, plan: RngPlan, *,
                      workers: int = 1) -> list[Estimate]:
    """E[v q(v, V_-i) - t_i(v, V_-i)] for each pinned truthful value v."""
    zs = np.asarray(values, dtype=float).ravel()
    q, t = _pinned_utilities(mechanism, i, zs, R, plan, workers)
    return [Estimate.of(z * q[:, k] - t[:, k]) for k, z in enumerate(zs)]


def interim_transfers(mechanism: mech.Mechanism, i: int, values, R: int, plan: RngPlan, *,
                      workers: int = 1) -> list[Estimate]:
    zs = np.asarray(values, dtype=float).ravel()
    _q, t = _pinned_utilities(mechanism, i, zs, R, plan, workers)
    return [Estimate.of(t[:, k]) for k in range(zs.size)]


# -- ex post tails --------------------------------------------------------------


@dataclass(frozen=True)
class TailReport:
    delta: float
    welfare_shortfall: Estimate
    mismatch: Estimate


def _binomial(hits: np.ndarray) -> Estimate:
    R = hits.size
    p = float(np.mean(hits))
    return Estimate(p, math.sqrt(p * (1.0 - p) / R), R)


def estimate_ex_post_tails(mechanism: mech.Mechanism, delta: float, R: int, plan: RngPlan, *,
                           workers: int = 1) -> TailReport:
    """Frequencies of W <= delta W* and of W + B != W* (baseline transfers)."""
    if not 0.0 < delta < 1.0:
        raise ConfigError("delta must lie in (0, 1)")
    if not all(d.bounded for d in set(mechanism.rule.dists)):
        raise UnboundedSupportError("ex post tail bounds need bounded valuations")
    if R < MIN_REPLICATIONS:
        raise ConfigError(f"need at least {MIN_REPLICATIONS} replications")
    c = mechanism.cost
    cols = simulate_free(mechanism.rule, R, plan, workers=workers)
    check_failures(cols[:, K.FAIL])
    cols = cols[cols[:, K.FAIL] == 0.0]
    q, sv, st = cols[:, K.Q], cols[:, K.SUM_V], cols[:, K.SUM_T]
    wstar = np.where(sv >= c, sv - c, 0.0)
    w = sv * q - st
    wb = (sv - c) * q
    tol = 1e-9 * (np.abs(sv) + c)
    return TailReport(delta, _binomial(w <= delta * wstar), _binomial(np.abs(wb - wstar) > tol))


# -- tail-integral identity -------------------------------------------------------


def truncated_mean_via_tail(x, y, alpha: float) -> float:
    """E[X 1{Y >= alpha}] under the empirical law, through tail integrals.

    Computes int_0^inf P(X > s, Y >= alpha) ds - int_-inf^0 P(X < s, Y >= alpha) ds
    by integrating the empirical step functions exactly.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    N = x.size
    kept = np.sort(x[y >= alpha])
    pos = kept[kept > 0.0]
    neg = -kept[kept < 0.0]
    return (_survival_area(pos) - _survival_area(neg)) / N


def _survival_area(z: np.ndarray) -> float:
    """int_0^inf #{z_k > s} ds for nonnegative z, summed panel by panel."""
    if z.size == 0:
        return 0.0
    z = np.sort(z)
    edges = np.concatenate(([0.0], z))
    counts = z.size - np.arange(z.size)
    return math.fsum(np.diff(edges) * counts)
