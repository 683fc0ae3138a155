import numpy as np
import pytest
from scipy.stats import poisson

from behavxva.chain import ChainSpec, build_rate_matrix, occupancy_pdf
from behavxva.credit import CreditCurve, RateSpec
from behavxva.engine import CCPHedge, Scenario, hedge_side_adjustments
from behavxva.mc_oracle import SimConfig, sample_paths, simulate_chain, simulate_xva
from behavxva.profiles import ExposureProfile

from conftest import ccp_scenario, chain_scenario

CFG = SimConfig(paths=100_000, seed=7)


def test_zero_hazard_chain_stays_in_first_state():
    sim = simulate_chain(ChainSpec(0.0, n=3), 10.0, SimConfig(paths=1000, step=1.0))
    assert np.all(sim.freq[:, 0] == 1.0)
    assert np.all(sim.freq[:, 1:] == 0.0)


def test_chain_frequencies_match_poisson():
    lam, T, n = 0.3, 5.0, 6
    sim = simulate_chain(ChainSpec(lam, n=n), T, SimConfig(paths=100_000, seed=11, step=0.5))
    for j in (2, 6, 10):
        t = sim.times[j]
        pmf = poisson.pmf(np.arange(n), lam * t)
        expected = np.append(pmf, 1.0 - pmf.sum())
        se = np.maximum(sim.standard_error[j], 1e-4)
        assert np.all(np.abs(sim.freq[j] - expected) <= 4 * se)


def test_contagion_chain_frequencies_match_occupancy():
    spec = ChainSpec(0.1, 1.2, n=8)
    Q = build_rate_matrix(spec)
    sim = simulate_chain(spec, 20.0, SimConfig(paths=100_000, seed=3, step=5.0))
    for j, t in enumerate(sim.times):
        p = occupancy_pdf(Q, t).probs
        se = np.maximum(sim.standard_error[j], 1e-4)
        assert np.all(np.abs(sim.freq[j] - p) <= 4 * se)


def test_degenerate_case_is_exact():
    rates = RateSpec(0.02, 0.01)
    sc = Scenario(CreditCurve(0.0), ChainSpec(0.0, n=1), rates, 10.0,
                  {"exposure": ExposureProfile("flat", 1.0, 10.0)}, adjustments=("cva",))
    sc_mva = Scenario(CreditCurve(0.0), CCPHedge(), rates, 10.0,
                      {"im_posted": ExposureProfile("decreasing", 1.0, 10.0)}, adjustments=("mva",))
    for s in (sc, sc_mva):
        mc = simulate_xva(s, SimConfig(paths=2000))
        eng = hedge_side_adjustments(s)
        for adj, est in mc.items():
            assert est.standard_error == 0.0
            assert est.mean == pytest.approx(eng[adj].behavioural, rel=1e-6, abs=1e-15)


@pytest.mark.parametrize("sc", [
    ccp_scenario(250, "flat"),
    ccp_scenario(500, "increasing"),
    chain_scenario(50, 250, 1.2, "increasing"),
    chain_scenario(500, 50, 1.0, "decreasing", maturity=5.0),
], ids=["mva-250-flat", "mva-500-inc", "cva-jump", "cva-short"])
def test_engine_within_three_standard_errors(sc):
    mc = simulate_xva(sc, CFG)
    eng = hedge_side_adjustments(sc)
    for adj, est in mc.items():
        assert est.within(eng[adj].behavioural, 3.0), (adj, eng[adj].behavioural, est)


def test_same_seed_reproducible_and_thread_independent():
    sc = chain_scenario(100, 250, 1.2)
    a = simulate_xva(sc, SimConfig(paths=60_000, seed=5))
    b = simulate_xva(sc, SimConfig(paths=60_000, seed=5, workers=3))
    c = simulate_xva(sc, SimConfig(paths=60_000, seed=6))
    assert a == b
    assert a["cva"].mean != c["cva"].mean


def test_standard_error_scales_with_paths():
    sc = chain_scenario(100, 250)
    se1 = simulate_xva(sc, SimConfig(paths=25_000, seed=1))["cva"].standard_error
    se4 = simulate_xva(sc, SimConfig(paths=100_000, seed=1))["cva"].standard_error
    assert se1 / se4 == pytest.approx(2.0, rel=0.2)


def test_client_default_ends_accrual():
    # profile is zero before t0, so a path defaulting before t0 accrues nothing
    t0 = 4.0
    prof = ExposureProfile.piecewise([(0.0, 0.0), (t0, 0.0), (t0 + 1e-9, 1.0), (10.0, 1.0)], 1.0, 10.0)
    sc = Scenario(CreditCurve(0.2, 0.0), CCPHedge(), RateSpec(0.02, 0.01), 10.0,
                  {"im_posted": prof}, adjustments=("mva",))
    s = sample_paths(sc, 20_000, seed=2)
    early = s.client_default < t0 - 0.01
    assert early.any() and (~early).any()
    assert np.all(s.values["mva"][early] == 0.0)
    assert np.all(s.values["mva"][~early & (s.client_default > t0 + 0.1)] < 0.0)


def test_hedge_defaults_ordered():
    s = sample_paths(chain_scenario(100, 500, 1.2, n=5), 1000, seed=4)
    assert s.hedge_defaults.shape == (1000, 5)
    assert np.all(np.diff(s.hedge_defaults, axis=1) >= 0.0)


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(paths=0)
    with pytest.raises(ValueError):
        SimConfig(step=0.0)
