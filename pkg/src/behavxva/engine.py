"""Behavioural and naive valuation adjustments.

Two behaviours link the client and hedge sides:

* the hedge is closed when the client defaults, so every hedge-side
  adjustment is discounted at ``r_B + lambda_C`` (client hazard, never the
  hedge hazard);
* a defaulted hedge counterparty is replaced while the client survives, so
  hedge-side CVA accumulates over a chain of anonymous counterparties
  weighted by their occupancy probabilities.

Costs carry a negative sign. Rates, hazards and profiles are deterministic,
so each expectation reduces to a one-dimensional time integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from . import chain as _chain
from .chain import ChainSpec
from .credit import CreditCurve, RateSpec
from .profiles import ExposureProfile
from .quadrature import integrate

ADJUSTMENTS = ("cva", "fva", "colva", "mva", "kva")
ROLES = ("exposure", "vm_gap", "collateral", "im_posted", "im_received", "capital")
# profile each adjustment cannot do without
PRIMARY_ROLE = {
    "cva": "exposure",
    "fva": "vm_gap",
    "colva": "collateral",
    "mva": "im_posted",
    "kva": "capital",
}
UNDEFINED_FLOOR = 1e-15


class ConfigurationError(ValueError):
    """Scenario lacks something an adjustment needs, or is inconsistent."""


@dataclass(frozen=True)
class CCPHedge:
    """Default-free central counterparty hedge."""


Hedge = Union[CCPHedge, ChainSpec]


@dataclass(frozen=True)
class Scenario:
    client: CreditCurve
    hedge: Hedge
    rates: RateSpec
    maturity: float
    profiles: Mapping[str, ExposureProfile] = field(default_factory=dict)
    client_profiles: Mapping[str, ExposureProfile] = field(default_factory=dict)
    lgd_client: float | None = None
    adjustments: tuple[str, ...] = ADJUSTMENTS
    quadrature_tol: float = 1e-8

    def __post_init__(self) -> None:
        if not self.maturity > 0.0:
            raise ConfigurationError("maturity must be positive")
        for side, profs in (("profiles", self.profiles), ("client_profiles", self.client_profiles)):
            for role, prof in profs.items():
                if role not in ROLES:
                    raise ConfigurationError(f"{side}: unknown role {role!r}")
                if prof.maturity < self.maturity:
                    raise ConfigurationError(
                        f"{side}.{role}: profile maturity {prof.maturity} < scenario maturity {self.maturity}")
        unknown = set(self.adjustments) - set(ADJUSTMENTS)
        if unknown:
            raise ConfigurationError(f"unknown adjustments {sorted(unknown)}")
        if self.lgd_client is not None and not 0.0 <= self.lgd_client <= 1.0:
            raise ConfigurationError("lgd_client must lie in [0, 1]")
        if not self.quadrature_tol > 0.0:
            raise ConfigurationError("quadrature_tol must be positive")
        if isinstance(self.hedge, ChainSpec):
            object.__setattr__(self, "hedge", self.hedge.resolved(self.maturity))

    @property
    def client_lgd(self) -> float:
        return self.client.lgd if self.lgd_client is None else self.lgd_client

    @property
    def behavioural_discount_rate(self) -> float:
        """Kill rate of every behavioural hedge-side integrand: r_B + lambda_C."""
        return self.rates.bank_rate + self.client.hazard

    @property
    def is_ccp(self) -> bool:
        return isinstance(self.hedge, CCPHedge)


def relative_change(behavioural: float, naive: float) -> float | None:
    """``behavioural / naive - 1``; ``None`` when the naive value is (numerically) zero."""
    if abs(naive) < UNDEFINED_FLOOR:
        return None
    return behavioural / naive - 1.0


@dataclass(frozen=True)
class AdjustmentValue:
    behavioural: float
    naive: float

    @property
    def relative_change(self) -> float | None:
        return relative_change(self.behavioural, self.naive)

    def __add__(self, other: AdjustmentValue) -> AdjustmentValue:
        return AdjustmentValue(self.behavioural + other.behavioural, self.naive + other.naive)


@dataclass(frozen=True)
class XvaBreakdown:
    side: str
    values: Mapping[str, AdjustmentValue]
    scenario: Scenario | None = None

    def __getitem__(self, name: str) -> AdjustmentValue:
        return self.values[name]

    def __iter__(self):
        return iter(self.values)

    def relative_changes(self) -> dict[str, float | None]:
        return {k: v.relative_change for k, v in self.values.items()}

    def to_dict(self) -> dict:
        return {
            k: {"behavioural": v.behavioural, "naive": v.naive, "relative_change": v.relative_change}
            for k, v in self.values.items()
        }


def _profile(profiles: Mapping[str, ExposureProfile], role: str, required: bool,
             where: str) -> ExposureProfile | None:
    prof = profiles.get(role)
    if prof is None and required:
        raise ConfigurationError(f"{where}: adjustment needs a {role!r} profile")
    return prof


def _integral(sc: Scenario, weight: Callable[[np.ndarray], np.ndarray] | None, kill_rate: float,
              profile: Callable[[np.ndarray], np.ndarray], breakpoints=()) -> float:
    """int_0^T weight(t) exp(-kill_rate t) profile(t) dt."""
    def f(t):
        out = np.exp(-kill_rate * t) * profile(t)
        if weight is not None:
            out = out * weight(t)
        return out
    return integrate(f, 0.0, sc.maturity, tol=sc.quadrature_tol, breakpoints=breakpoints)


def _combine(*terms: tuple[float, ExposureProfile | None]):
    """Linear combination of profiles as one vectorised callable."""
    live = [(c, p) for c, p in terms if p is not None and c != 0.0]

    def g(t):
        out = np.zeros_like(t)
        for c, p in live:
            out = out + c * p(t)
        return out
    bps = sorted({b for _, p in live for b in p.breakpoints})
    return g, bps


def _pair(sc: Scenario, coeff: float, profile_fn, bps, weight=None) -> AdjustmentValue:
    """Behavioural (client hazard in the discount) and naive (``r_B`` only) values."""
    if coeff == 0.0:
        return AdjustmentValue(0.0, 0.0)
    beh = -coeff * _integral(sc, weight, sc.behavioural_discount_rate, profile_fn, bps)
    nai = -coeff * _integral(sc, None, sc.rates.bank_rate, profile_fn, bps)
    return AdjustmentValue(beh + 0.0, nai + 0.0)


def ccp_adjustments(sc: Scenario) -> XvaBreakdown:
    """Hedge-side adjustments when hedging through a riskless CCP.

    CVA is identically zero. The others are discounted at ``r_B + lambda_C``
    (behavioural) versus ``r_B`` (naive, client default ignored).
    """
    if not sc.is_ccp:
        raise ConfigurationError("ccp_adjustments needs a CCP hedge")
    rates = sc.rates
    where = "hedge profiles"
    out: dict[str, AdjustmentValue] = {}
    for adj in sc.adjustments:
        if adj == "cva":
            out[adj] = AdjustmentValue(0.0, 0.0)
            continue
        prof = _profile(sc.profiles, PRIMARY_ROLE[adj], True, where)
        coeff = {
            "fva": rates.bank_spread,
            "colva": rates.collateral_spread,
            "mva": rates.bank_spread - rates.im_spread_posted,
            "kva": rates.capital_cost - rates.capital_funding_fraction * rates.bank_rate,
        }[adj]
        out[adj] = _pair(sc, coeff, prof, prof.breakpoints)
    return XvaBreakdown("hedge", out, sc)


def multi_hedge_adjustments(sc: Scenario) -> XvaBreakdown:
    """Hedge-side adjustments with replacement over the anonymous chain.

    Behavioural CVA weights the exposure by ``sum_i p_i(t) s_i`` from the
    chain occupancy; the naive baseline is a single first counterparty with
    its own survival in the discount. The other adjustments are weighted by
    the probability that a covered counterparty is live (one when
    untruncated) and compared against the ``r_B``-discounted value.

    FVA funds ``vm_gap - im_posted``; ColVA covers ``s_X * collateral`` plus
    ``r_{I;.,B} * im_received``; MVA uses the same ``s_B - s_{I;B,.}``
    multiplier as the CCP case.
    """
    spec = sc.hedge
    if not isinstance(spec, ChainSpec):
        raise ConfigurationError("multi_hedge_adjustments needs a chain hedge")
    if spec.n is None or spec.n < 1:
        raise ConfigurationError("chain truncation resolved to no active state")
    rates = sc.rates
    where = "hedge profiles"
    profs = sc.profiles

    def cva_weight(t):
        return _chain.effective_hazard_weights(spec, t)[1]

    def live_weight(t):
        return _chain.active_mass(spec, t)

    out: dict[str, AdjustmentValue] = {}
    for adj in sc.adjustments:
        if adj == "cva":
            prof = _profile(profs, "exposure", True, where)
            s1 = spec.base_spread
            beh = -_integral(sc, cva_weight, sc.behavioural_discount_rate, prof, prof.breakpoints)
            nai = -s1 * _integral(sc, None, rates.bank_rate + spec.base_hazard, prof, prof.breakpoints)
            out[adj] = AdjustmentValue(beh, nai)
            continue
        _profile(profs, PRIMARY_ROLE[adj], True, where)
        if adj == "fva":
            fn, bps = _combine((1.0, profs.get("vm_gap")), (-1.0, profs.get("im_posted")))
            coeff = rates.bank_spread
        elif adj == "colva":
            fn, bps = _combine((rates.collateral_spread, profs.get("collateral")),
                               (rates.im_rate_received, profs.get("im_received")))
            coeff = 1.0
        elif adj == "mva":
            fn, bps = _combine((1.0, profs["im_posted"]))
            coeff = rates.bank_spread - rates.im_spread_posted
        else:
            fn, bps = _combine((1.0, profs["capital"]))
            coeff = rates.capital_cost - rates.capital_funding_fraction * rates.bank_rate
        out[adj] = _pair(sc, coeff, fn, bps, weight=live_weight)
    return XvaBreakdown("hedge", out, sc)


def hedge_side_adjustments(sc: Scenario) -> XvaBreakdown:
    return ccp_adjustments(sc) if sc.is_ccp else multi_hedge_adjustments(sc)


def client_side_adjustments(sc: Scenario) -> XvaBreakdown:
    """Standard client-side increments, all discounted at ``r_B + lambda_C``.

    Behaviour does not touch the client side, so naive equals behavioural.
    The KVA line discounts at ``r_B`` plus client hazard.
    """
    rates = sc.rates
    profs = sc.client_profiles
    where = "client profiles"
    lam_c = sc.client.hazard
    out: dict[str, AdjustmentValue] = {}
    for adj in sc.adjustments:
        _profile(profs, PRIMARY_ROLE[adj], True, where)
        if adj == "cva":
            fn, bps = _combine((1.0, profs["exposure"]))
            coeff = sc.client_lgd * lam_c
        elif adj == "fva":
            fn, bps = _combine((1.0, profs["vm_gap"]))
            coeff = rates.bank_spread
        elif adj == "colva":
            fn, bps = _combine((rates.collateral_spread, profs["collateral"]),
                               (rates.im_rate_received, profs.get("im_received")))
            coeff = 1.0
        elif adj == "mva":
            fn, bps = _combine((1.0, profs["im_posted"]))
            coeff = rates.bank_spread - rates.im_spread_posted
        else:
            fn, bps = _combine((1.0, profs["capital"]))
            coeff = rates.capital_cost - rates.capital_funding_fraction * rates.bank_rate
        # + 0.0 folds the -0.0 of a zero profile
        v = -coeff * _integral(sc, None, sc.behavioural_discount_rate, fn, bps) + 0.0 if coeff else 0.0
        out[adj] = AdjustmentValue(v, v)
    return XvaBreakdown("client", out, sc)


def to_client_total(hedge_side: XvaBreakdown, client_side: XvaBreakdown) -> XvaBreakdown:
    """Component-wise sum: the client is charged both sides."""
    if hedge_side.scenario is not None and client_side.scenario is not None \
            and hedge_side.scenario != client_side.scenario:
        raise ConfigurationError("breakdowns come from different scenarios")
    names = list(dict.fromkeys([*hedge_side.values, *client_side.values]))
    zero = AdjustmentValue(0.0, 0.0)
    values = {k: hedge_side.values.get(k, zero) + client_side.values.get(k, zero) for k in names}
    return XvaBreakdown("total", values, hedge_side.scenario or client_side.scenario)


def price(sc: Scenario) -> dict[str, XvaBreakdown]:
    """Hedge side, and when client profiles are given, client side and total."""
    hedge = hedge_side_adjustments(sc)
    out = {"hedge": hedge}
    if sc.client_profiles:
        client = client_side_adjustments(sc)
        out["client"] = client
        out["total"] = to_client_total(hedge, client)
    return out


def zero_breakdown(side: str = "hedge", names=ADJUSTMENTS) -> XvaBreakdown:
    return XvaBreakdown(side, {k: AdjustmentValue(0.0, 0.0) for k in names})


def is_close_breakdown(a: XvaBreakdown, b: XvaBreakdown, rel: float = 1e-12) -> bool:
    return all(
        math.isclose(a[k].behavioural, b[k].behavioural, rel_tol=rel, abs_tol=1e-300)
        and math.isclose(a[k].naive, b[k].naive, rel_tol=rel, abs_tol=1e-300)
        for k in a.values
    )
