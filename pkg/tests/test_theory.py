from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from amtsim import theory
from amtsim.distributions import MomentBundle, Transform, ValuationDistribution, iid_moments
from amtsim.errors import DegenerateCorrelationError

U = ValuationDistribution.uniform()
ID = Transform.identity()


def _bundle(**kw) -> MomentBundle:
    base = dict(n=100, mu=0.5, sigma2_psi=1.0, rho_psi=1.0, sigma2_h=1.0, rho_h=1.0,
                sigma_psi_h=0.0, eta=2.0 ** 1.5, b=1.0, b_h=1.0)
    base.update(kw)
    return MomentBundle(**base)


def test_normal_truncated_mean_examples():
    assert theory.normal_truncated_mean(1.0, 1.0, 100, 0.0) == pytest.approx(3.98942, abs=1e-5)
    assert theory.normal_truncated_mean(0.0, 1.0, 100, 2.5) == 0.0
    assert theory.normal_truncated_mean(0.5, 1.0, 1, 1.0) == pytest.approx(0.120985, abs=1e-6)


def test_normal_truncated_mean_against_quadrature():
    # E[X 1{Y >= a}] with X = (s_xy / s_y^2) Y + noise reduces to a 1-d integral
    sxy, sy, n, a = 0.3, 0.8, 7.0, -0.9
    sd = math.sqrt(n) * sy
    val, _ = integrate.quad(
        lambda y: (sxy / sy ** 2) * y * math.exp(-0.5 * (y / sd) ** 2) / (sd * math.sqrt(2 * math.pi)),
        a, np.inf)
    assert theory.normal_truncated_mean(sxy, sy, n, a) == pytest.approx(val, rel=1e-9)


@given(st.floats(0.01, 5), st.floats(1, 1e4), st.floats(0, 50))
def test_normal_truncated_mean_even_and_linear(s, n, a):
    f = theory.normal_truncated_mean
    assert f(s * s, s, n, a) == pytest.approx(f(s * s, s, n, -a), rel=1e-12)
    assert f(2 * s * s, s, n, a) == pytest.approx(2 * f(s * s, s, n, a), rel=1e-12)


def test_berry_esseen_examples():
    assert theory.be_bound_uni(100, 1.0, 1.0) == pytest.approx(0.056)
    assert theory.be_bound_uni(100, 2.0, 1.0) == pytest.approx(0.007)
    vals = [theory.be_bound_uni(n, 1.0, 1.0) for n in (10, 100, 1000, 10_000)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    m = _bundle()
    assert theory.be_bound_multi(m, 1.0) == pytest.approx(0.5657, abs=1e-4)
    assert theory.be_bound_multi(m, 1.0, n=200) == pytest.approx(
        theory.be_bound_multi(m, 1.0) / math.sqrt(2))
    with pytest.raises(DegenerateCorrelationError):
        theory.be_bound_multi(_bundle(sigma_psi_h=1.0, eta=math.inf), 1.0)


def test_truncated_mean_bounds_reference_case():
    m = iid_moments(U, ID, 100)
    r = theory.truncated_mean_bounds(m, -3.0)
    assert r.central == pytest.approx(1.34224, abs=1e-4)
    assert r.lower < r.central < r.upper
    far = theory.truncated_mean_bounds(m, -1e9)
    assert far.central == 0.0 and far.contains(0.0)


def test_multi_reduces_to_uni_when_x_equals_y():
    m = _bundle(sigma_psi_h=1.0, eta=math.inf)
    a = theory.truncated_mean_bounds(m, -2.0, "multi")
    b = theory.truncated_mean_bounds(m, -2.0, "uni")
    assert a == b


def test_budget_bounds_shift_by_cost():
    m = iid_moments(U, ID, 1000)
    a = theory.truncated_mean_bounds(m, -40.0)
    assert theory.budget_bounds(m, -40.0, 0.0) == a
    b = theory.budget_bounds(m, -40.0, 5.0)
    assert b.lower == pytest.approx(a.lower - 5.0) and b.upper == a.upper


def test_regret_bound_values():
    m = iid_moments(U, ID, 16000)
    a = theory.RateSchedule.adjustment()
    c = theory.RateSchedule.cost(2.0, 0.4)
    assert theory.regret_upper_bound(m, a(16000), c(16000)) < 0.05
    vals = [theory.regret_upper_bound(m.resized(n), a(n), c(n)) for n in (1000, 4000, 16000)]
    assert vals == pytest.approx([0.1248, 0.0548, 0.0244], abs=1e-4)
    phis = [theory.regret_terms(m, al, 10.0)[1] for al in (-50, -100, -200, -400)]
    assert all(y < x for x, y in zip(phis, phis[1:]))


def test_hoeffding_examples():
    h = theory.hoeffding_ex_post(100, -20.0, 10.0, 0.5, 1.0, 1.0)
    assert h.bound_ii == pytest.approx(math.exp(-8) + math.exp(-32), rel=1e-12)
    assert h.bound_ii == pytest.approx(3.3546e-4, rel=1e-4)
    assert theory.hoeffding_ex_post(100, 0.0, 10.0, 0.5, 1.0, 1.0).bound_ii >= 1.0
    assert theory.hoeffding_ex_post(100, -20.0, 50.0, 0.5, 1.0, 1.0).bound_ii >= 1.0
    assert 0.0 < h.bound_i(0.5) < 1.0


def test_gamma_bound_times_root_n_shrinks():
    a = theory.RateSchedule.adjustment()
    c = theory.RateSchedule.cost(2.0, 0.4)
    vals = []
    for n in (1000, 4000, 16000):
        m = iid_moments(U, ID, n - 1)
        vals.append(theory.gamma_bound(m, n, a(n), c(n), 1.0, 1.0) * math.sqrt(n))
    assert all(y < x for x, y in zip(vals, vals[1:]))
    g = theory.gamma_bound(iid_moments(U, ID, 999), 1000, a(1000), c(1000), 1.0, 1.0)
    assert g == pytest.approx(0.0893, abs=1e-4)


def test_profit_bounds():
    assert theory.profit_ratio_bound(iid_moments(U, ID, 10)) == pytest.approx(1.0, abs=1e-6)
    w = ValuationDistribution.weibull(0.7, 1.0)
    psi_m = iid_moments(w, Transform.virtual(), 10)
    assert theory.profit_ratio_bound(psi_m) == pytest.approx(1.0, abs=1e-6)
    mu = math.gamma(1 + 1 / 0.7)
    var = math.gamma(1 + 2 / 0.7) - mu ** 2
    assert theory.dhr_profit_bound(mu, var) == pytest.approx(0.85661, abs=1e-5)
    assert theory.profit_ratio_bound(iid_moments(w, ID, 10)) == pytest.approx(0.97669, abs=1e-5)


def test_loglog_slope():
    ns = [10, 100, 1000, 10_000]
    assert theory.fit_loglog_slope(ns, [n ** 0.5 for n in ns]) == pytest.approx(0.5)
    assert theory.fit_loglog_slope(ns, [3.0] * 4) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        theory.fit_loglog_slope(ns, [1, -1, 2, 3])


def test_rate_membership_examples():
    grid = [1e3, 1e4, 1e5, 1e6]
    a = theory.RateSchedule.adjustment()
    assert theory.check_rate_membership(a, "omega", math.sqrt, grid)
    assert theory.check_rate_membership(a, "o", lambda n: math.sqrt(n * math.log(n)), grid)
    assert not theory.check_rate_membership(lambda n: n ** 0.6, "O", math.sqrt, grid)
    rc = theory.check_rate_membership(lambda n: 3 * n, "Theta", lambda n: n, grid)
    assert rc.holds and rc.note == "diagnostic only"


def test_schedule_values():
    assert theory.RateSchedule.adjustment()(math.e) == pytest.approx(-math.sqrt(math.e))
    assert theory.RateSchedule.cost(2.0, 0.4)(1000) == pytest.approx(2 * 1000 ** 0.4)
    with pytest.raises(ValueError):
        theory.RateSchedule.adjustment(-1.0)


def test_phi_tail_does_not_underflow():
    assert theory.Phi(-6.0) == pytest.approx(9.865876450377e-10, rel=1e-9)
    assert theory.Phi(-30.0) > 0.0
