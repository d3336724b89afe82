"""Hazard probability of the next exceedance within dt days after elapsed time t.

Empirical curves count intervals, w(t) = #(t < tau <= t+dt) / #(tau > t);
model curves integrate the fitted stretched exponential through the upper
incomplete gamma function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InsufficientDataError
from .sefit import StretchedExpParams, _as_intervals

DEFAULT_MIN_AT_RISK = 10


@dataclass(frozen=True)
class HazardPoint:
    t: float
    w: float
    n_at_risk: int | None = None       # empirical curves only
    low_confidence: bool = False       # n_at_risk below the floor
    extrapolated: bool = False         # model evaluated below tau_min
    underflow: bool = False            # survival mass underflowed; w reported 0


@dataclass(frozen=True)
class HazardCurve:
    q: float | None
    dt: float
    source: str  # "empirical" or "model"
    points: tuple[HazardPoint, ...]
    undefined_t: tuple[float, ...] = ()  # grid times with nobody left at risk


def default_t_grid(data) -> np.ndarray:
    """Integers 0..ceil(5 * mean interval)."""
    arr = _as_intervals(data)
    if arr.size == 0:
        raise InsufficientDataError("no intervals for hazard grid")
    return np.arange(0, int(math.ceil(5.0 * float(arr.mean()))) + 1)


def hazard_empirical(data, dt, t_grid=None,
                     min_at_risk=DEFAULT_MIN_AT_RISK) -> HazardCurve:
    """Empirical hazard curve over t_grid (defaults to 0..5*mean).

    Grid points with no interval left at risk are omitted and recorded in
    ``undefined_t``; points resting on fewer than ``min_at_risk`` intervals
    are flagged low-confidence.
    """
    arr = _as_intervals(data)
    if arr.size == 0:
        raise InsufficientDataError("empty interval series")
    if dt < 1:
        raise ValueError("dt must be >= 1 day")
    if t_grid is None:
        t_grid = default_t_grid(arr)
    points = []
    undefined = []
    for t in np.asarray(t_grid, dtype=float):
        at_risk = int((arr > t).sum())
        if at_risk == 0:
            undefined.append(float(t))
            continue
        hits = int(((arr > t) & (arr <= t + dt)).sum())
        points.append(HazardPoint(t=float(t), w=hits / at_risk, n_at_risk=at_risk,
                                  low_confidence=at_risk < min_at_risk))
    q = getattr(data, "q", None)
    return HazardCurve(q=q, dt=float(dt), source="empirical",
                       points=tuple(points), undefined_t=tuple(undefined))


def hazard_model(fit: StretchedExpParams, dt, t_grid) -> HazardCurve:
    """Model hazard w(t) = 1 - Q(1/g, (a(t+dt))^g) / Q(1/g, (a t)^g).

    The fitted density is integrated over the untruncated support; points with
    t < tau_min are marked extrapolated (the fit is only validated above the
    cutoff). If the survival mass at t underflows to zero the point reports
    w = 0 with the underflow flag set.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    s = 1.0 / fit.gamma
    points = []
    for t in np.asarray(t_grid, dtype=float):
        t = float(t)
        if t < 0:
            raise ValueError("t must be >= 0")
        den = float(special.gammaincc(s, (fit.a * t) ** fit.gamma)) if t > 0 else 1.0
        extrapolated = t < fit.tau_min
        if den == 0.0:
            points.append(HazardPoint(t=float(t), w=0.0, extrapolated=extrapolated,
                                      underflow=True))
            continue
        num = float(special.gammaincc(s, (fit.a * (t + dt)) ** fit.gamma))
        points.append(HazardPoint(t=float(t), w=1.0 - num / den,
                                  extrapolated=extrapolated))
    return HazardCurve(q=None, dt=float(dt), source="model", points=tuple(points))
