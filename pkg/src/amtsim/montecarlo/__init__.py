"""Deterministic, thread-parallel Monte Carlo estimation of mechanism quantities."""
from .engine import (
    BudgetCurve,
    Estimate,
    ExAnteReport,
    IncentiveProbe,
    RngPlan,
    TailReport,
    conditional_budget_curve,
    draw_profile,
    estimate_conditional_budget,
    estimate_exante,
    estimate_ex_post_tails,
    fit_budget_curve,
    interim_transfers,
    interim_utilities,
    probe_incentives,
    ratio_estimate,
    simulate_free,
    simulate_pinned,
    truncated_mean_via_tail,
)

__all__ = [
    "BudgetCurve", "Estimate", "ExAnteReport", "IncentiveProbe", "RngPlan", "TailReport",
    "conditional_budget_curve", "draw_profile", "estimate_conditional_budget",
    "estimate_exante", "estimate_ex_post_tails", "fit_budget_curve", "interim_transfers",
    "interim_utilities", "probe_incentives", "ratio_estimate", "simulate_free",
    "simulate_pinned", "truncated_mean_via_tail",
]
