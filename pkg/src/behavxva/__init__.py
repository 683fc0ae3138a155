"""Behaviour-aware XVA.

Prices CVA, FVA, ColVA, MVA and KVA when the bank closes its hedge on client
default and replaces it on hedge default, and compares against the usual
counterparty-in-isolation values.
"""

from .chain import (
    ChainSpec,
    OccupancyDistribution,
    build_rate_matrix,
    effective_hazard_weights,
    occupancy_pdf,
    truncation_level,
)
from .credit import CreditCurve, DomainError, RateSpec, discount_factor, hazard_from_spread, survival
from .engine import (
    AdjustmentValue,
    CCPHedge,
    ConfigurationError,
    Scenario,
    XvaBreakdown,
    ccp_adjustments,
    client_side_adjustments,
    multi_hedge_adjustments,
    price,
    relative_change,
    to_client_total,
)
from .profiles import ExposureProfile
from .quadrature import QuadratureError, integrate

__all__ = [
    "AdjustmentValue",
    "CCPHedge",
    "ChainSpec",
    "ConfigurationError",
    "CreditCurve",
    "DomainError",
    "ExposureProfile",
    "OccupancyDistribution",
    "QuadratureError",
    "RateSpec",
    "Scenario",
    "XvaBreakdown",
    "build_rate_matrix",
    "ccp_adjustments",
    "client_side_adjustments",
    "discount_factor",
    "effective_hazard_weights",
    "hazard_from_spread",
    "integrate",
    "multi_hedge_adjustments",
    "occupancy_pdf",
    "price",
    "relative_change",
    "survival",
    "to_client_total",
    "truncation_level",
]
