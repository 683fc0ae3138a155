"""Monte Carlo validation of the chain occupancy and the adjustment integrals.

Default times are simulated explicitly: the client defaults once and ends
the trade; hedge counterparties default in sequence, each replaced at once
by the next with hazard bumped by the contagion multiplier. Integrands are
accumulated pathwise from cumulative trapezoid tables on a fixed grid, so no
path picks up anything after its client default.

Paths run in fixed-size batches, each with its own child stream of
``numpy.random.SeedSequence(seed)``; results do not depend on the number of
worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .chain import ChainSpec
from .engine import Scenario

BATCH = 25_000


@dataclass(frozen=True)
class SimConfig:
    paths: int = 100_000
    seed: int = 20161115
    step: float = 0.01
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if not self.step > 0.0:
            raise ValueError("step must be positive")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    standard_error: float

    def within(self, value: float, n_se: float = 3.0) -> bool:
        return abs(value - self.mean) <= n_se * self.standard_error + 1e-12 * abs(value)


@dataclass(frozen=True)
class ChainSimulation:
    times: np.ndarray
    freq: np.ndarray  # (len(times), n+1), last column absorbed
    standard_error: np.ndarray


def _batches(cfg: SimConfig) -> list[tuple[int, np.random.Generator]]:
    sizes = [BATCH] * (cfg.paths // BATCH)
    if cfg.paths % BATCH:
        sizes.append(cfg.paths % BATCH)
    children = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    return [(n, np.random.default_rng(c)) for n, c in zip(sizes, children)]


def _workers(cfg: SimConfig) -> int:
    if cfg.workers is not None:
        return max(1, cfg.workers)
    env = os.environ.get("XVA_THREADS")
    return max(1, int(env)) if env else 1


def _map(fn, items, cfg: SimConfig):
    workers = _workers(cfg)
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _exp_times(rng: np.random.Generator, size, rates) -> np.ndarray:
    """Inverse-transform exponential draws; zero rate gives +inf."""
    u = rng.random(size)
    rates = np.asarray(rates, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(rates > 0.0, -np.log1p(-u) / np.where(rates > 0.0, rates, 1.0), np.inf)


def hedge_default_times(rng: np.random.Generator, paths: int, spec: ChainSpec) -> np.ndarray:
    """Cumulative default times ``tau_1 < tau_2 < ...`` of the covered counterparties."""
    gaps = _exp_times(rng, (paths, spec.n), spec.hazards()[None, :])
    return np.cumsum(gaps, axis=1)


def simulate_chain(spec: ChainSpec, maturity: float, cfg: SimConfig) -> ChainSimulation:
    """Empirical state frequencies on a uniform grid over ``[0, maturity]``."""
    spec = spec.resolved(maturity)
    n = spec.n
    times = _grid(maturity, cfg.step)

    def run(batch):
        size, rng = batch
        tau = hedge_default_times(rng, size, spec)
        # counts[k, j] = #paths with at least k+1 defaults by times[j]
        counts = np.empty((n, times.size), dtype=np.int64)
        for k in range(n):
            counts[k] = np.searchsorted(np.sort(tau[:, k]), times, side="right")
        return counts

    counts = sum(_map(run, _batches(cfg), cfg))
    at_least = np.vstack([np.full(times.size, cfg.paths), counts]).astype(float) / cfg.paths
    freq = np.empty((times.size, n + 1))
    freq[:, :n] = (at_least[:-1] - at_least[1:]).T
    freq[:, n] = at_least[n]
    se = np.sqrt(freq * (1.0 - freq) / cfg.paths)
    return ChainSimulation(times, freq, se)


def _grid(maturity: float, step: float) -> np.ndarray:
    m = max(1, int(math.ceil(maturity / step - 1e-9)))
    return np.linspace(0.0, maturity, m + 1)


def _profile_terms(sc: Scenario) -> dict[str, list[tuple[float, object]]]:
    """Hedge-side integrand as ``[(multiplier, profile), ...]`` per adjustment."""
    r = sc.rates
    p = sc.profiles
    funding = r.bank_spread
    margin = r.bank_spread - r.im_spread_posted
    capital = r.capital_cost - r.capital_funding_fraction * r.bank_rate
    if sc.is_ccp:
        table = {
            "fva": [(funding, p.get("vm_gap"))],
            "colva": [(r.collateral_spread, p.get("collateral"))],
            "mva": [(margin, p.get("im_posted"))],
            "kva": [(capital, p.get("capital"))],
        }
    else:
        table = {
            "cva": [(1.0, p.get("exposure"))],
            "fva": [(funding, p.get("vm_gap")), (-funding, p.get("im_posted"))],
            "colva": [(r.collateral_spread, p.get("collateral")),
                      (r.im_rate_received, p.get("im_received"))],
            "mva": [(margin, p.get("im_posted"))],
            "kva": [(capital, p.get("capital"))],
        }
    return {k: [(c, prof) for c, prof in v if prof is not None] for k, v in table.items()}


@dataclass(frozen=True)
class PathSample:
    """Per-path discounted adjustment values for one batch."""

    values: dict[str, np.ndarray]
    client_default: np.ndarray
    hedge_defaults: np.ndarray | None


def _cumulative_tables(sc: Scenario, step: float):
    grid = _grid(sc.maturity, step)
    disc = np.exp(-sc.rates.bank_rate * grid)
    tables = {}
    for adj, terms in _profile_terms(sc).items():
        f = np.zeros_like(grid)
        for c, prof in terms:
            f = f + c * prof(grid)
        tables[adj] = cumulative_trapezoid(disc * f, grid, initial=0.0)
    return grid, tables


def _sample(sc: Scenario, grid, tables, size: int, rng: np.random.Generator) -> PathSample:
    T = sc.maturity
    lam_c = sc.client.hazard
    tau_c = _exp_times(rng, size, lam_c)
    end = np.minimum(tau_c, T)

    def G(adj, t):
        return np.interp(t, grid, tables[adj])

    values: dict[str, np.ndarray] = {}
    tau = None
    if sc.is_ccp:
        for adj in sc.adjustments:
            values[adj] = np.zeros(size) if adj == "cva" else -G(adj, end)
    else:
        spec = sc.hedge
        tau = hedge_default_times(rng, size, spec)
        bounds = np.minimum(np.concatenate([np.zeros((size, 1)), tau], axis=1), end[:, None])
        for adj in sc.adjustments:
            if adj == "cva":
                seg = G(adj, bounds[:, 1:]) - G(adj, bounds[:, :-1])
                values[adj] = -(seg @ spec.spreads())
            else:
                values[adj] = -G(adj, bounds[:, -1])
    return PathSample(values, tau_c, tau)


def sample_paths(sc: Scenario, paths: int, seed: int, step: float = 0.01) -> PathSample:
    """Raw per-path values, mainly for inspecting the simulation mechanics."""
    grid, tables = _cumulative_tables(sc, step)
    return _sample(sc, grid, tables, paths, np.random.default_rng(seed))


def simulate_xva(sc: Scenario, cfg: SimConfig) -> dict[str, SimEstimate]:
    """Monte Carlo estimate of every requested behavioural hedge-side adjustment."""
    grid, tables = _cumulative_tables(sc, cfg.step)
    for adj in sc.adjustments:
        if adj not in tables and not (adj == "cva" and sc.is_ccp):
            raise ValueError(f"no integrand for {adj!r}")

    def run(batch):
        size, rng = batch
        s = _sample(sc, grid, tables, size, rng)
        return {k: (v.size, float(v.mean()), float(((v - v.mean()) ** 2).sum()))
                for k, v in s.values.items()}

    parts = _map(run, _batches(cfg), cfg)
    out = {}
    for adj in sc.adjustments:
        # pairwise (Chan et al.) merge of batch means and sums of squared deviations
        n, mean, m2 = 0, 0.0, 0.0
        for nb, mb, m2b in (p[adj] for p in parts):
            tot = n + nb
            delta = mb - mean
            mean += delta * nb / tot
            m2 += m2b + delta * delta * n * nb / tot
            n = tot
        var = m2 / (n - 1) if n > 1 else 0.0
        out[adj] = SimEstimate(mean, math.sqrt(var / n))
    return out
