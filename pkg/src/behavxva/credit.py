"""Flat credit curves and rate inputs.

Spreads are converted to hazard rates assuming zero bond-CDS basis::

    hazard = spread / (1 - recovery)

so that ``(1 - R) * hazard`` recovers the spread used as a loss multiplier.
All quantities are per-annum decimals; basis points only appear at the
config layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

BPS = 1e-4


class DomainError(ValueError):
    """Raised when an input lies outside the domain of a credit primitive."""


def hazard_from_spread(spread: float, recovery: float) -> float:
    if not 0.0 <= recovery < 1.0:
        raise DomainError(f"recovery must lie in [0, 1), got {recovery!r}")
    if not spread >= 0.0:
        raise DomainError(f"spread must be non-negative, got {spread!r}")
    return spread / (1.0 - recovery)


def _check_time(t: float) -> None:
    if not t >= 0.0:
        raise DomainError(f"time must be non-negative, got {t!r}")


def discount_factor(rate: float, hazard: float, t: float) -> float:
    """exp(-(rate + hazard) * t): riskless-style discounting with a survival kill rate."""
    _check_time(t)
    return math.exp(-(rate + hazard) * t)


@dataclass(frozen=True)
class CreditCurve:
    """Flat CDS curve. ``hazard`` is derived from spread and recovery."""

    spread: float
    recovery: float = 0.4
    hazard: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "hazard", hazard_from_spread(self.spread, self.recovery))

    @classmethod
    def from_bps(cls, spread_bps: float, recovery: float = 0.4) -> CreditCurve:
        return cls(spread_bps * BPS, recovery)

    @property
    def lgd(self) -> float:
        return 1.0 - self.recovery

    def survival(self, t: float) -> float:
        return survival(self, t)


def survival(curve: CreditCurve, t: float) -> float:
    """Survival probability to ``t`` under the curve's flat hazard."""
    _check_time(t)
    return math.exp(-curve.hazard * t)


@dataclass(frozen=True)
class RateSpec:
    """Deterministic rates and spreads entering the adjustment integrands.

    Parameters
    ----------
    riskless_rate : float
        r, the riskless short rate.
    bank_spread : float
        s_B, bank funding spread over riskless; r_B = r + s_B.
    collateral_spread : float
        s_X, spread paid on variation margin.
    im_spread_posted : float
        s_{I;B,.}, spread earned on IM posted by the bank. Zero means IM is
        remunerated at riskless.
    im_rate_received : float
        r_{I;.,B}, rate paid on IM received by the bank.
    capital_cost : float
        gamma_K, cost of capital.
    capital_funding_fraction : float
        phi, share of capital usable for funding.
    """

    riskless_rate: float = 0.02
    bank_spread: float = 0.01
    collateral_spread: float = 0.0
    im_spread_posted: float = 0.0
    im_rate_received: float = 0.0
    capital_cost: float = 0.10
    capital_funding_fraction: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "riskless_rate",
            "bank_spread",
            "collateral_spread",
            "im_spread_posted",
            "im_rate_received",
            "capital_cost",
        ):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0.0 <= self.capital_funding_fraction <= 1.0:
            raise DomainError("capital_funding_fraction must lie in [0, 1]")

    @property
    def bank_rate(self) -> float:
        return self.riskless_rate + self.bank_spread
