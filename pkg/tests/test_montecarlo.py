from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from amtsim import mechanisms as mech
from amtsim import theory
from amtsim.distributions import Transform, ValuationDistribution, iid_moments
from amtsim.errors import ConfigError, UnboundedSupportError
from amtsim.montecarlo import (
    Estimate,
    RngPlan,
    draw_profile,
    estimate_conditional_budget,
    estimate_exante,
    estimate_ex_post_tails,
    fit_budget_curve,
    interim_transfers,
    probe_incentives,
    simulate_free,
    simulate_pinned,
    truncated_mean_via_tail,
)
from amtsim.montecarlo import kernel as K

U = ValuationDistribution.uniform()
E1 = ValuationDistribution.exponential(1.0)
ID = Transform.identity()

# E[B] for i.i.d. Uniform[0,1], identity, n=100, alpha=-3, c=0 from an
# independent vectorized numpy simulation with 10^6 draws (default_rng(123456))
ORACLE_B100 = (1.3434300602897224, 0.005892859601377576)

CROSS = {
    "uniform-id": mech.DecisionRule.iid(U, ID, 40, mech.MEAN_ADJUSTED, -1.5),
    "exp-psi": mech.DecisionRule.iid(E1, Transform.virtual(), 30, mech.ABSOLUTE, 0.5),
    "weibull-power": mech.DecisionRule.iid(ValuationDistribution.weibull(0.7), Transform.power(0.5),
                                           25, mech.MEAN_ADJUSTED, -0.8),
    "mixed": mech.DecisionRule.amt(
        (ValuationDistribution.tabulated([0, 0.5, 1, 2], [0, 0.3, 0.7, 1]),
         ValuationDistribution.exp_mixture(0.5, 1.0, 10.0).truncated(2.5), U,
         ValuationDistribution.uniform(0.2, 1.4)) * 5,
        (ID, ID, Transform.power(2.0), Transform.affine(0.1, 3.0)) * 5, -1.0),
}


@pytest.mark.parametrize("name", sorted(CROSS))
def test_kernel_matches_reference_free(name):
    rule = CROSS[name]
    a = simulate_free(rule, 200, RngPlan(17), psi=True, backend="kernel")
    b = simulate_free(rule, 200, RngPlan(17), psi=True, backend="reference")
    assert np.array_equal(a[:, K.Q], b[:, K.Q])
    assert np.allclose(a, b, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("name", sorted(CROSS))
def test_kernel_matches_reference_pinned(name):
    rule = CROSS[name]
    zs = rule.dists[1].quantile(np.array([0.1, 0.5, 0.9]))
    a = simulate_pinned(rule, 1, zs, 100, RngPlan(5), partner=0, backend="kernel")
    b = simulate_pinned(rule, 1, zs, 100, RngPlan(5), partner=0, backend="reference")
    assert np.allclose(a, b, rtol=1e-9, atol=1e-9)


def test_draw_profile_matches_free_run():
    rule = CROSS["mixed"]
    cols = simulate_free(rule, 5, RngPlan(8, 3), transfers=False)
    for r in range(5):
        assert cols[r, K.SUM_V] == pytest.approx(draw_profile(rule, RngPlan(8, 3), r).sum())


def test_results_independent_of_workers():
    rule = CROSS["uniform-id"]
    a = simulate_free(rule, 3000, RngPlan(99), workers=1)
    b = simulate_free(rule, 3000, RngPlan(99), workers=4)
    assert np.array_equal(a, b)


def test_rng_plan_validation():
    with pytest.raises(ConfigError):
        RngPlan(-1)
    with pytest.raises(ConfigError):
        RngPlan(1, 2**32)


def test_too_few_replications():
    m = mech.Mechanism(CROSS["uniform-id"], 0.0)
    with pytest.raises(ConfigError):
        estimate_exante(m, 50, RngPlan(1))


def test_budget_near_truncated_normal_mean():
    rule = mech.DecisionRule.iid(U, ID, 100, mech.MEAN_ADJUSTED, -3.0)
    rep = estimate_exante(mech.Mechanism(rule, 0.0), 200_000, RngPlan(2024))
    b = rep.budget
    ref, ref_se = ORACLE_B100
    assert abs(b.value - ref) <= 4 * math.hypot(b.se, ref_se)
    br = theory.truncated_mean_bounds(iid_moments(U, ID, 100), -3.0)
    assert br.central == pytest.approx(1.34224, abs=1e-4)
    assert br.contains(b.value)


def test_report_internal_consistency():
    rule = mech.DecisionRule.iid(U, ID, 50, mech.MEAN_ADJUSTED, -2.0)
    c = 20.0
    m = mech.Mechanism(rule, c)
    rep = estimate_exante(m, 5000, RngPlan(3))
    ratio = (rep.efficient_welfare.value - rep.welfare.value) / rep.efficient_welfare.value
    assert rep.regret.value == pytest.approx(ratio, rel=1e-9)
    cols = simulate_free(rule, 5000, RngPlan(3))
    q, sv = cols[:, K.Q], cols[:, K.SUM_V]
    coupled = np.mean((sv - c) * ((sv >= c).astype(float) - q))
    lhs = rep.efficient_welfare.value - rep.welfare.value - rep.budget.value
    assert lhs == pytest.approx(coupled, rel=1e-9, abs=1e-9)


def test_standard_error_scaling():
    rule = mech.DecisionRule.iid(U, ID, 60, mech.MEAN_ADJUSTED, -1.0)
    m = mech.Mechanism(rule, 3.0)
    a = estimate_exante(m, 4000, RngPlan(10)).budget.se
    b = estimate_exante(m, 16000, RngPlan(11)).budget.se
    assert 0.4 <= b / a <= 0.6


def test_equal_share_budget_flag_and_forced_provision():
    rule = mech.DecisionRule.iid(U, ID, 20, mech.MEAN_ADJUSTED, -1e6)
    rep = estimate_exante(mech.Mechanism(rule, 2.0, "double-dagger"), 500, RngPlan(4))
    assert rep.budget.exact_zero and rep.budget.value == 0.0
    assert rep.provision.value == 1.0


def test_conditional_budget_quadrature_oracle():
    # n=2, threshold 0.5, v_1 pinned at 1: q = 1 always and
    # E[B | v_1 = 1] = E[(0.5 - V_2)^+] = 1/8
    rule = mech.DecisionRule.iid(U, ID, 2, mech.MEAN_ADJUSTED, -0.5)
    est = estimate_conditional_budget(mech.Mechanism(rule, 0.0), 0, 1.0, 40_000, RngPlan(6))
    assert abs(est.value - 0.125) <= 4 * est.se


def test_conditional_budget_at_mean_matches_unconditional():
    rule = mech.DecisionRule.iid(U, ID, 400, mech.MEAN_ADJUSTED, -10.0)
    m = mech.Mechanism(rule, 0.0)
    cond = estimate_conditional_budget(m, 0, 0.5, 20_000, RngPlan(7))
    full = estimate_exante(m, 20_000, RngPlan(8)).budget
    assert abs(cond.value - full.value) <= 4 * math.hypot(cond.se, full.se)


def test_pairwise_scheme_preserves_interim_transfers():
    rule = mech.DecisionRule.iid(U, ID, 2, mech.MEAN_ADJUSTED, -0.3)
    base = mech.Mechanism(rule, 0.2)
    curve = fit_budget_curve(base, 40_000, RngPlan(12), points=17)
    dag = mech.Mechanism(rule, 0.2, "dagger", curve)
    grid = np.linspace(0.1, 0.9, 5)
    for i in (0, 1):
        a = interim_transfers(dag, i, grid, 20_000, RngPlan(13))
        b = interim_transfers(base, i, grid, 20_000, RngPlan(14))
        for x, y in zip(a, b):
            assert abs(x.value - y.value) <= 4 * math.hypot(x.se, y.se) + 2e-3


def test_probe_pivotal_scheme_is_incentive_compatible():
    rule = mech.DecisionRule.iid(U, ID, 30, mech.MEAN_ADJUSTED, -1.0)
    m = mech.Mechanism(rule, 0.0)
    p = probe_incentives(m, 0, [0.2, 0.5, 0.8], np.linspace(0, 1, 11), 2000, RngPlan(15))
    assert p.gamma <= 4 * p.se + 1e-12
    truth = probe_incentives(m, 0, [0.5], [0.5], 500, RngPlan(15))
    assert truth.gamma == 0.0


def test_ex_post_tails_forced_provision():
    rule = mech.DecisionRule.iid(U, ID, 30, mech.MEAN_ADJUSTED, -1e6)
    tails = estimate_ex_post_tails(mech.Mechanism(rule, 0.0), 0.5, 1000, RngPlan(16))
    assert tails.mismatch.value == 0.0


def test_ex_post_shortfall_envelope():
    rule = mech.DecisionRule.iid(U, ID, 10, mech.MEAN_ADJUSTED, 0.5)
    c = 4.0
    m = mech.Mechanism(rule, c)
    delta = 1e-9
    tails = estimate_ex_post_tails(m, delta, 5000, RngPlan(18))
    cols = simulate_free(rule, 5000, RngPlan(18))
    q, sv, st_ = cols[:, K.Q], cols[:, K.SUM_V], cols[:, K.SUM_T]
    # with q = 0 we have W = 0 <= delta W* whether or not W* > 0
    missed = np.mean(q == 0)
    wasted = np.mean((q == 1) & (sv * q - st_ <= 0))
    assert tails.welfare_shortfall.value <= missed + wasted + 1e-12


def test_ex_post_requires_bounded_support():
    rule = mech.DecisionRule.iid(E1, ID, 4, mech.MEAN_ADJUSTED, 0.0)
    with pytest.raises(UnboundedSupportError):
        estimate_ex_post_tails(mech.Mechanism(rule, 0.0), 0.5, 200, RngPlan(1))


def test_tail_identity_examples():
    assert truncated_mean_via_tail([-1.0, 1.0], [-1.0, 1.0], 0.0) == pytest.approx(0.5)
    x = np.array([0.3, -2.0, 5.0, 1.5])
    assert truncated_mean_via_tail(x, x + 100, -np.inf) == pytest.approx(x.mean())


@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=60),
       st.floats(-60, 60))
def test_tail_identity_equals_direct_mean(pairs, alpha):
    x, y = (np.array(c) for c in zip(*pairs))
    direct = np.mean(x * (y >= alpha))
    assert truncated_mean_via_tail(x, y, alpha) == pytest.approx(direct, abs=1e-9)


def test_estimate_bounds():
    e = Estimate.of(np.array([1.0, 2.0, 3.0, 4.0]))
    assert e.lower(2.0) < e.value < e.upper(2.0)
    assert Estimate.zero(10).exact_zero
