"""Valuation laws, transforms and the moment bundle."""
from .core import ValuationDistribution, reduced_form
from .moments import (
    AgentMoments,
    EndpointWarning,
    MomentBundle,
    agent_moments,
    compute_moments,
    cov_psi_h,
    has_dhr,
    hazard_rate,
    iid_moments,
    is_myerson_regular,
    virtual_valuation,
)
from .transforms import Transform

__all__ = [
    "AgentMoments", "EndpointWarning", "MomentBundle", "Transform", "ValuationDistribution",
    "agent_moments", "compute_moments", "cov_psi_h", "has_dhr", "hazard_rate", "iid_moments",
    "is_myerson_regular", "reduced_form", "virtual_valuation",
]
