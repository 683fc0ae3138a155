"""Deterministic time profiles standing in for exposure, margin and capital.

A profile is an exogenous function of time on ``[0, T]`` and zero after
maturity. Only relative changes are reported downstream, so the scale is
usually irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

SHAPES = ("decreasing", "flat", "increasing", "piecewise")


@dataclass(frozen=True)
class ExposureProfile:
    """Deterministic profile.

    ``shape`` is one of ``decreasing`` (triangle falling to zero at maturity),
    ``flat``, ``increasing`` (triangle rising from zero) or ``piecewise``
    (linear interpolation through ``points``, values in absolute currency units
    multiplied by ``scale``).
    """

    shape: str
    scale: float = 1.0
    maturity: float = 1.0
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.shape not in SHAPES:
            raise ValueError(f"unknown profile shape {self.shape!r}; expected one of {SHAPES}")
        if not self.maturity > 0.0:
            raise ValueError("profile maturity must be positive")
        if self.scale < 0.0:
            raise ValueError("profile scale must be non-negative")
        if self.shape == "piecewise":
            pts = tuple((float(t), float(v)) for t, v in self.points)
            if len(pts) < 2:
                raise ValueError("piecewise profile needs at least two points")
            ts = [t for t, _ in pts]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("piecewise profile times must be strictly increasing")
            if ts[0] < 0.0:
                raise ValueError("piecewise profile times must be non-negative")
            if any(v < 0.0 for _, v in pts):
                raise ValueError("piecewise profile values must be non-negative")
            object.__setattr__(self, "points", pts)
        elif self.points:
            raise ValueError(f"points are only meaningful for piecewise profiles, not {self.shape!r}")

    @classmethod
    def piecewise(cls, points: Sequence[Sequence[float]], scale: float = 1.0,
                  maturity: float | None = None) -> ExposureProfile:
        pts = tuple((float(t), float(v)) for t, v in points)
        if maturity is None:
            maturity = pts[-1][0]
        return cls("piecewise", scale, maturity, pts)

    def __call__(self, t):
        return value(self, t)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Interior kinks, handed to the quadrature as split points."""
        if self.shape != "piecewise":
            return ()
        return tuple(t for t, _ in self.points if 0.0 < t < self.maturity)

    def with_scale(self, scale: float) -> ExposureProfile:
        return ExposureProfile(self.shape, scale, self.maturity, self.points)


def value(profile: ExposureProfile, t):
    """Evaluate ``profile`` at time(s) ``t``; scalar in, scalar out."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0):
        raise ValueError("profile evaluated at negative time")
    T = profile.maturity
    if profile.shape == "flat":
        out = np.full_like(tt, profile.scale)
    elif profile.shape == "decreasing":
        out = profile.scale * (1.0 - tt / T)
    elif profile.shape == "increasing":
        out = profile.scale * (tt / T)
    else:
        ts = np.array([p[0] for p in profile.points])
        vs = np.array([p[1] for p in profile.points])
        out = profile.scale * np.interp(tt, ts, vs, left=vs[0], right=vs[-1])
    out = np.where(tt > T, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def zero_profile(maturity: float = 1.0) -> ExposureProfile:
    return ExposureProfile("flat", 0.0, maturity)
