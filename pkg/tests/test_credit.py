import math

import pytest
from hypothesis import given, strategies as st

from behavxva.credit import CreditCurve, DomainError, RateSpec, discount_factor, hazard_from_spread, survival


@pytest.mark.parametrize("spread,recovery,expected", [
    (0.05, 0.0, 0.05),
    (0.0, 0.4, 0.0),
    (0.01, 0.4, 0.016666666666666666),
])
def test_hazard_from_spread(spread, recovery, expected):
    assert hazard_from_spread(spread, recovery) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("spread,recovery", [(0.01, 1.0), (0.01, 1.5), (-0.01, 0.4), (0.01, -0.1)])
def test_hazard_from_spread_domain(spread, recovery):
    with pytest.raises(DomainError):
        hazard_from_spread(spread, recovery)


def test_survival_examples():
    assert survival(CreditCurve(0.05, 0.0), 30) == pytest.approx(0.22313016014842982, rel=1e-12)
    assert survival(CreditCurve(0.03, 0.4), 0.0) == 1.0
    assert survival(CreditCurve(0.0, 0.4), 10.0) == 1.0
    with pytest.raises(DomainError):
        survival(CreditCurve(0.01), -1.0)


def test_discount_factor_examples():
    assert discount_factor(0.03, 0.0417, 30) == pytest.approx(math.exp(-0.0717 * 30), rel=1e-12)
    assert discount_factor(0.03, 0.0417, 30) == pytest.approx(0.1164842, rel=2e-3)
    assert discount_factor(0.0, 0.0, 12.0) == 1.0
    assert discount_factor(0.01, 0.0, 1.0) == pytest.approx(0.9900498337491681, rel=1e-12)
    with pytest.raises(DomainError):
        discount_factor(0.01, 0.0, -0.5)


def test_curve_from_bps_and_lgd():
    c = CreditCurve.from_bps(250, 0.4)
    assert c.spread == pytest.approx(0.025)
    assert c.hazard == pytest.approx(0.025 / 0.6)
    assert c.lgd == pytest.approx(0.6)
    # zero basis: (1 - R) * hazard recovers the spread
    assert c.lgd * c.hazard == pytest.approx(c.spread, rel=1e-15)


def test_ratespec_bank_rate_and_checks():
    r = RateSpec(riskless_rate=0.02, bank_spread=0.01)
    assert r.bank_rate == pytest.approx(0.03)
    with pytest.raises(DomainError):
        RateSpec(capital_funding_fraction=1.5)
    with pytest.raises(DomainError):
        RateSpec(bank_spread=math.inf)


spreads = st.floats(0.0, 0.2)
recoveries = st.floats(0.0, 0.95)


@given(spreads, spreads, recoveries)
def test_hazard_linear_in_spread(a, b, r):
    assert hazard_from_spread(a + b, r) == pytest.approx(
        hazard_from_spread(a, r) + hazard_from_spread(b, r), rel=1e-12, abs=1e-15)


@given(st.floats(1e-4, 0.2), recoveries, recoveries)
def test_hazard_increasing_in_recovery(s, r1, r2):
    if r1 < r2:
        assert hazard_from_spread(s, r1) < hazard_from_spread(s, r2)


@given(st.floats(0.0, 0.3), st.floats(0.0, 40.0), st.floats(0.0, 40.0))
def test_survival_semigroup(h, t1, dt):
    c = CreditCurve(h, 0.0)
    assert survival(c, t1) * survival(c, dt) == pytest.approx(survival(c, t1 + dt), rel=1e-12, abs=1e-300)


@given(st.floats(-0.02, 0.1), st.floats(0.0, 0.3), st.floats(0.0, 40.0))
def test_discount_factorises(r, h, t):
    assert discount_factor(r, h, t) == pytest.approx(
        discount_factor(r, 0.0, t) * survival(CreditCurve(h, 0.0), t), rel=1e-12)
