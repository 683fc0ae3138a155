"""The sequence of hedge counterparties as a pure-birth Markov chain.

State ``i`` (1-based) means the i-th hedge counterparty is the live hedge.
Each default moves the chain to the next state at rate ``lambda_i``; the
last state is absorbing and stands for "beyond truncation", contributing
nothing to adjustment integrands. Later counterparties are unknown at
inception, only their riskiness is modelled: with contagion multiplier
``m`` the i-th counterparty has hazard ``lambda_1 * m**(i-1)`` and spread
``s_1 * m**(i-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .credit import CreditCurve, DomainError

MAX_STATES = 256
DEFAULT_EPSILON = 0.07


@dataclass(frozen=True)
class ChainSpec:
    """Anonymous hedge counterparty sequence.

    Exactly one of ``n`` (number of active states, i.e. hedge defaults
    covered) and ``epsilon`` (target missed-default probability over the
    trade life) drives truncation; when both are ``None`` the default
    epsilon applies. ``recovery`` converts hazards back to spreads.
    """

    base_hazard: float
    contagion_multiplier: float = 1.0
    n: int | None = None
    epsilon: float | None = None
    recovery: float = 0.4

    def __post_init__(self) -> None:
        if not self.base_hazard >= 0.0:
            raise DomainError("base hazard must be non-negative")
        if not self.contagion_multiplier >= 1.0:
            raise DomainError("contagion multiplier must be >= 1")
        if self.n is not None and self.n < 1:
            raise DomainError(f"truncation n must be >= 1, got {self.n}")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.n is not None and self.epsilon is not None:
            raise DomainError("give either n or epsilon, not both")
        if not 0.0 <= self.recovery < 1.0:
            raise DomainError("recovery must lie in [0, 1)")

    @classmethod
    def from_curve(cls, curve: CreditCurve, contagion_multiplier: float = 1.0,
                   n: int | None = None, epsilon: float | None = None) -> ChainSpec:
        return cls(curve.hazard, contagion_multiplier, n, epsilon, curve.recovery)

    @property
    def base_spread(self) -> float:
        return self.base_hazard * (1.0 - self.recovery)

    def hazards(self, n: int | None = None) -> np.ndarray:
        n = self._n(n)
        return self.base_hazard * self.contagion_multiplier ** np.arange(n)

    def spreads(self, n: int | None = None) -> np.ndarray:
        return self.hazards(n) * (1.0 - self.recovery)

    def resolved(self, maturity: float) -> ChainSpec:
        """Copy with ``n`` fixed; epsilon truncation is evaluated at ``maturity``."""
        if self.n is not None:
            return self
        eps = DEFAULT_EPSILON if self.epsilon is None else self.epsilon
        n = truncation_level(self.base_hazard, self.contagion_multiplier, maturity, eps)
        return replace(self, n=n, epsilon=None)

    def _n(self, n: int | None) -> int:
        n = self.n if n is None else n
        if n is None:
            raise DomainError("chain truncation not resolved; call resolved(T) first")
        return n


@dataclass(frozen=True)
class OccupancyDistribution:
    """State probabilities at time ``t``; ``probs[-1]`` is the absorbed mass."""

    t: float
    probs: np.ndarray

    @property
    def active(self) -> np.ndarray:
        return self.probs[:-1]

    @property
    def absorbed(self) -> float:
        return float(self.probs[-1])


def rate_matrix(hazards) -> np.ndarray:
    hazards = np.asarray(hazards, dtype=float)
    n = hazards.size
    if n < 1:
        raise DomainError("rate matrix needs at least one active state")
    Q = np.zeros((n + 1, n + 1))
    idx = np.arange(n)
    Q[idx, idx] = -hazards
    Q[idx, idx + 1] = hazards
    return Q


def build_rate_matrix(spec: ChainSpec) -> np.ndarray:
    """(n+1)x(n+1) generator: bidiagonal active block plus an absorbing row."""
    return rate_matrix(spec.hazards())


_NEAR_TIE = 1e-4


def _near_tied(Q: np.ndarray) -> bool:
    d = np.diag(Q)
    gap = np.abs(np.diff(d))
    scale = np.maximum(np.abs(d[:-1]), np.abs(d[1:]))
    return bool(np.any((gap > 0.0) & (gap < _NEAR_TIE * scale)))


def _expm_batch(Q: np.ndarray, times: np.ndarray) -> np.ndarray:
    """exp(Q t) for each t; shape ``(len(times), k, k)``."""
    k = Q.shape[0]
    if not _near_tied(Q):
        return expm(times[:, None, None] * Q[None, :, :])
    # scipy's triangular squaring step divides exp differences by the
    # diagonal gap and loses all accuracy when two rates nearly tie. A
    # dummy row makes the matrix non-triangular so the generic Pade path
    # runs; the leading block of the result is still exp(Q t).
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = Q
    M[k, 0] = 1.0
    return expm(times[:, None, None] * M[None, :, :])[:, :k, :k]


def _occupancy_rows(Q: np.ndarray, times: np.ndarray) -> np.ndarray:
    # first row of exp(Q t), batched over t
    P = _expm_batch(Q, times)[:, 0, :]
    P[(P < 0.0) & (P >= -1e-12)] = 0.0
    return P


def occupancy(Q: np.ndarray, times) -> np.ndarray:
    """Occupancy probabilities for each time in ``times``; shape ``(len(times), n+1)``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if not np.all(np.isfinite(times)):
        raise DomainError("occupancy times must be finite")
    if np.any(times < 0.0):
        raise DomainError("occupancy times must be non-negative")
    return _occupancy_rows(np.asarray(Q, dtype=float), times)


def occupancy_pdf(Q: np.ndarray, t: float) -> OccupancyDistribution:
    """Start in state 1 and propagate: ``{1, 0, ..., 0} @ expm(Q t)``."""
    if not math.isfinite(t):
        raise DomainError("occupancy time must be finite")
    return OccupancyDistribution(float(t), occupancy(Q, [t])[0])


def propagate(dist: OccupancyDistribution, Q: np.ndarray, dt: float) -> OccupancyDistribution:
    step = _expm_batch(np.asarray(Q, dtype=float), np.array([float(dt)]))[0]
    return OccupancyDistribution(dist.t + dt, dist.probs @ step)


def defaults_exceed_probability(base_hazard: float, multiplier: float, maturity: float,
                                n: int) -> float:
    """P(more than ``n`` hedge defaults in ``[0, maturity]``).

    Absorbed mass at maturity of the chain with ``n + 1`` active states.
    """
    Q = rate_matrix(base_hazard * multiplier ** np.arange(n + 1))
    return float(occupancy(Q, [maturity])[0, -1])


def captured_mass(base_hazard: float, multiplier: float, maturity: float, n: int) -> float:
    """P(at most ``n`` hedge defaults in ``[0, maturity]``)."""
    return 1.0 - defaults_exceed_probability(base_hazard, multiplier, maturity, n)


def truncation_level(base_hazard: float, multiplier: float, maturity: float,
                     epsilon: float) -> int:
    """Smallest ``n >= 1`` with P(more than n defaults by maturity) <= epsilon.

    With a contagion multiplier above one the hazards grow geometrically and
    the chain can run through infinitely many counterparties in finite time,
    so the missed probability has a positive floor; an epsilon below that
    floor raises ``DomainError``.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not maturity > 0.0:
        raise DomainError("maturity must be positive")
    if base_hazard == 0.0:
        return 1

    def ok(n: int) -> bool:
        return defaults_exceed_probability(base_hazard, multiplier, maturity, n) <= epsilon

    hi = 1
    while not ok(hi):
        if hi >= MAX_STATES:
            floor = defaults_exceed_probability(base_hazard, multiplier, maturity, MAX_STATES)
            raise DomainError(
                f"missed-default probability stays at {floor:.3g} > epsilon={epsilon} "
                f"up to n={MAX_STATES}")
        hi = min(2 * hi, MAX_STATES)
    lo = hi // 2  # ok(lo) is False or lo == 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def effective_hazard_weights(spec: ChainSpec, t):
    """Occupancy-weighted spreads.

    Returns ``(p_i(t) * s_i over active states, sum_i p_i(t) * s_i)``. For an
    array ``t`` the vector has shape ``(len(t), n)`` and the scalar becomes a
    vector over ``t``.
    """
    Q = build_rate_matrix(spec)
    s = spec.spreads()
    scalar_in = np.ndim(t) == 0
    P = occupancy(Q, t)[:, :-1]
    w = P * s
    total = w.sum(axis=1)
    if scalar_in:
        return w[0], float(total[0])
    return w, total


def active_mass(spec: ChainSpec, t):
    """Probability that some covered hedge counterparty is live at ``t``."""
    P = occupancy(build_rate_matrix(spec), t)
    out = P[:, :-1].sum(axis=1)
    return float(out[0]) if np.ndim(t) == 0 else out
