"""Simulation and bound toolkit for threshold public-good mechanisms."""
from __future__ import annotations

__version__ = "0.1.0"

from .distributions import MomentBundle, Transform, ValuationDistribution, compute_moments
from .mechanisms import DecisionRule, Mechanism
from .montecarlo import RngPlan, estimate_exante

__all__ = [
    "DecisionRule", "Mechanism", "MomentBundle", "RngPlan", "Transform",
    "ValuationDistribution", "__version__", "compute_moments", "estimate_exante",
]
