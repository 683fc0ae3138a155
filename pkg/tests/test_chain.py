import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.stats import poisson

from behavxva.chain import (
    ChainSpec,
    active_mass,
    build_rate_matrix,
    captured_mass,
    effective_hazard_weights,
    occupancy,
    occupancy_pdf,
    propagate,
    truncation_level,
)
from behavxva.credit import DomainError
from behavxva.mc_oracle import SimConfig, simulate_chain


def poisson_pmf(mu, k):
    return math.exp(-mu) * mu ** k / math.factorial(k)


def ode_occupancy(hazards, t):
    """Independent oracle: integrate p' = pQ from {1, 0, ...}, built without the package."""
    n = len(hazards)

    def rhs(_, p):
        dp = np.zeros_like(p)
        dp[:n] -= hazards * p[:n]
        dp[1:] += hazards * p[:n]
        return dp
    p0 = np.zeros(n + 1)
    p0[0] = 1.0
    sol = solve_ivp(rhs, (0.0, t), p0, method="DOP853", rtol=1e-13, atol=1e-15)
    return sol.y[:, -1]


def test_rate_matrix_single_state():
    Q = build_rate_matrix(ChainSpec(0.05, 1.0, n=1))
    np.testing.assert_array_equal(Q, [[-0.05, 0.05], [0.0, 0.0]])


def test_rate_matrix_equal_rates():
    Q = build_rate_matrix(ChainSpec(0.05, 1.0, n=3))
    expected = np.array([
        [-0.05, 0.05, 0, 0],
        [0, -0.05, 0.05, 0],
        [0, 0, -0.05, 0.05],
        [0, 0, 0, 0],
    ])
    np.testing.assert_array_equal(Q, expected)


def test_rate_matrix_contagion():
    Q = build_rate_matrix(ChainSpec(0.05, 1.2, n=3))
    np.testing.assert_allclose(np.diag(Q)[:3], [-0.05, -0.06, -0.072], rtol=1e-14)
    np.testing.assert_allclose(np.diag(Q, 1), [0.05, 0.06, 0.072], rtol=1e-14)
    assert np.all(Q[-1] == 0.0)
    np.testing.assert_array_equal(Q.sum(axis=1), 0.0)


def test_chainspec_validation():
    with pytest.raises(DomainError):
        ChainSpec(0.05, n=0)
    with pytest.raises(DomainError):
        ChainSpec(0.05, epsilon=1.0)
    with pytest.raises(DomainError):
        ChainSpec(0.05, 0.9)
    with pytest.raises(DomainError):
        ChainSpec(0.05, n=3, epsilon=0.1)
    with pytest.raises(DomainError):
        build_rate_matrix(ChainSpec(0.05))


@pytest.mark.parametrize("hazard,eps,n,captured", [
    (0.05, 0.07, 3, 0.9343575456215498),
    (0.025, 0.01, 3, 0.9927078334947886),
])
def test_truncation_capture(hazard, eps, n, captured):
    assert truncation_level(hazard, 1.0, 30.0, eps) == n
    assert captured_mass(hazard, 1.0, 30.0, n) == pytest.approx(captured, abs=1e-9)


def test_truncation_zero_hazard():
    assert truncation_level(0.0, 1.0, 30.0, 0.5) == 1
    assert captured_mass(0.0, 1.0, 30.0, 1) == 1.0


def test_truncation_domain():
    with pytest.raises(DomainError):
        truncation_level(0.05, 1.0, 30.0, 0.0)
    with pytest.raises(DomainError):
        truncation_level(0.05, 1.0, 30.0, 1.0)


def test_truncation_grows_with_contagion():
    assert truncation_level(0.025, 1.2, 30.0, 1e-6) > truncation_level(0.025, 1.0, 30.0, 1e-6)


@pytest.mark.parametrize("lam,m,T", [(0.05, 1.0, 30.0), (0.025 / 0.6, 1.2, 30.0), (0.3, 1.0, 10.0)])
@pytest.mark.parametrize("eps", [0.07, 1e-3, 1e-6])
def test_truncation_is_smallest(lam, m, T, eps):
    n = truncation_level(lam, m, T, eps)
    assert 1 - captured_mass(lam, m, T, n) <= eps
    if n > 1:
        assert 1 - captured_mass(lam, m, T, n - 1) > eps


def test_explosive_chain_floor():
    # hazards 0.2 * 1.5**i: expected explosion time 0.6y, so ten years nearly always explode
    with pytest.raises(DomainError, match="stays at"):
        truncation_level(0.2, 1.5, 10.0, 1e-3)


def test_occupancy_at_zero():
    d = occupancy_pdf(build_rate_matrix(ChainSpec(0.07, 1.2, n=4)), 0.0)
    np.testing.assert_array_equal(d.probs, [1, 0, 0, 0, 0])
    assert d.absorbed == 0.0


def test_occupancy_rejects_nonfinite():
    Q = build_rate_matrix(ChainSpec(0.05, n=2))
    with pytest.raises(DomainError):
        occupancy_pdf(Q, math.inf)
    with pytest.raises(DomainError):
        occupancy_pdf(Q, -1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10])
@pytest.mark.parametrize("lam,t", [(0.05, 30.0), (0.025, 30.0), (0.5, 10.0), (0.1, 7.3)])
def test_equal_rates_match_poisson(n, lam, t):
    d = occupancy_pdf(build_rate_matrix(ChainSpec(lam, 1.0, n=n)), t)
    mu = lam * t
    for k in range(n):
        assert abs(d.probs[k] - poisson_pmf(mu, k)) <= 1e-10
    assert abs(d.absorbed - (1 - sum(poisson_pmf(mu, k) for k in range(n)))) <= 1e-10


@pytest.mark.parametrize("lam,m,n,t", [
    (0.025 / 0.6, 1.2, 3, 30.0),
    (0.05, 1.2, 8, 30.0),
    (0.01, 1.5, 6, 12.0),
    (0.2, 1.1, 10, 5.0),
])
def test_contagion_matches_ode(lam, m, n, t):
    spec = ChainSpec(lam, m, n=n)
    d = occupancy_pdf(build_rate_matrix(spec), t)
    np.testing.assert_allclose(d.probs, ode_occupancy(spec.hazards(), t), atol=1e-8, rtol=0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.3), st.floats(1.0, 1.5), st.integers(1, 10), st.floats(0.0, 40.0),
       st.floats(0.0, 40.0))
def test_stochastic_and_semigroup(lam, m, n, t1, t2):
    Q = build_rate_matrix(ChainSpec(lam, m, n=n))
    np.testing.assert_array_equal(Q.sum(axis=1), 0.0)
    d1 = occupancy_pdf(Q, t1)
    assert np.all(d1.probs >= 0.0)
    assert abs(d1.probs.sum() - 1.0) <= 1e-10
    direct = occupancy_pdf(Q, t1 + t2)
    np.testing.assert_allclose(propagate(d1, Q, t2).probs, direct.probs, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 0.2), st.floats(1.0, 1.5), st.integers(1, 8))
def test_absorbed_mass_monotone(lam, m, n):
    ts = np.linspace(0.0, 40.0, 81)
    absorbed = occupancy(build_rate_matrix(ChainSpec(lam, m, n=n)), ts)[:, -1]
    assert np.all(np.diff(absorbed) >= -1e-14)
    if m < 1.45:
        bumped = occupancy(build_rate_matrix(ChainSpec(lam, m + 0.05, n=n)), ts[1:])[:, -1]
        assert np.all(bumped >= absorbed[1:] - 1e-15)
        if n > 1:
            assert np.all(bumped > absorbed[1:])


def test_effective_weights_equal_spreads():
    spec = ChainSpec(0.05, 1.0, n=3, recovery=0.4)
    s1 = spec.base_spread
    for t in (0.0, 5.0, 30.0):
        w, total = effective_hazard_weights(spec, t)
        assert w.shape == (3,)
        absorbed = occupancy_pdf(build_rate_matrix(spec), t).absorbed
        assert total == pytest.approx(s1 * (1 - absorbed), rel=1e-12)
    assert effective_hazard_weights(spec, 0.0)[1] == pytest.approx(s1, rel=1e-15)


def test_effective_weights_vectorised():
    spec = ChainSpec(0.05, 1.2, n=4)
    ts = np.array([0.0, 1.0, 10.0])
    w, total = effective_hazard_weights(spec, ts)
    assert w.shape == (3, 4)
    for i, t in enumerate(ts):
        assert total[i] == pytest.approx(effective_hazard_weights(spec, float(t))[1], rel=1e-14)
    np.testing.assert_allclose(active_mass(spec, ts),
                               1 - occupancy(build_rate_matrix(spec), ts)[:, -1], atol=1e-15)


def test_effective_weights_against_monte_carlo():
    spec = ChainSpec(0.025, 1.2, n=3, recovery=0.4)
    _, total = effective_hazard_weights(spec, 30.0)
    sim = simulate_chain(spec, 30.0, SimConfig(paths=100_000, seed=7, step=0.5))
    f, se = sim.freq[-1, :3], sim.standard_error[-1, :3]
    s = spec.spreads()
    mc = float(f @ s)
    # states are multinomial; bound the SE of the weighted sum conservatively by the sum of SEs
    mc_se = float(se @ s)
    assert abs(total - mc) <= 3 * mc_se


@pytest.mark.parametrize("m", [1.0 + 2.2e-16, 1.0 + 1e-12, 1.0 + 1e-9])
def test_nearly_equal_rates_match_poisson(m):
    # a multiplier a hair above one must not break the matrix exponential
    lam, n = 0.1875, 4
    ts = np.linspace(0.0, 40.0, 81)
    P = occupancy(build_rate_matrix(ChainSpec(lam, m, n=n)), ts)
    pmf = poisson.pmf(np.arange(n)[None, :], lam * ts[:, None])
    assert np.max(np.abs(P[:, :n] - pmf)) <= 1e-8 * (1 + (m - 1) * 1e9)
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-13)
    d = propagate(occupancy_pdf(build_rate_matrix(ChainSpec(lam, m, n=n)), 10.0),
                  build_rate_matrix(ChainSpec(lam, m, n=n)), 30.0)
    assert np.allclose(d.probs, P[-1], atol=1e-12)
