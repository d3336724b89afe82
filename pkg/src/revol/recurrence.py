"""Recurrence intervals between volatility exceedances of a threshold."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError
from .ingest import VolatilitySeries


@dataclass(frozen=True)
class ThresholdSpec:
    """Threshold q, in units of volatility standard deviations."""

    q: float

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError(f"threshold q must be > 0, got {self.q}")


@dataclass(frozen=True)
class RecurrenceSeries:
    """Ordered waiting times between successive exceedances of one threshold.

    ``exceedance_times`` are 0-based indices into the volatility series;
    ``intervals`` are their successive differences, in trading days.
    """

    q: float
    intervals: np.ndarray
    exceedance_times: np.ndarray
    mean_interval: float | None
    label: str = ""
    source: str = "original"
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "intervals", np.asarray(self.intervals))
        object.__setattr__(self, "exceedance_times", np.asarray(self.exceedance_times))

    @property
    def empty(self) -> bool:
        return self.intervals.size == 0

    def __len__(self):
        return self.intervals.size


def _as_q(q) -> float:
    return ThresholdSpec(q.q if isinstance(q, ThresholdSpec) else float(q)).q


def extract(v: VolatilitySeries, q) -> RecurrenceSeries:
    """Waiting times between successive values strictly above q.

    Fewer than 2 exceedances yield an empty (flagged) series that downstream
    fitting refuses.
    """
    qv = _as_q(q)
    times = np.flatnonzero(v.values > qv)
    intervals = np.diff(times)
    mean = float(intervals.mean()) if intervals.size else None
    return RecurrenceSeries(q=qv, intervals=intervals, exceedance_times=times,
                            mean_interval=mean, label=v.label, source=v.source,
                            seed=v.seed)


def scaled(r: RecurrenceSeries) -> np.ndarray:
    """Intervals divided by their mean; output mean is 1 by construction."""
    if r.empty:
        raise InsufficientDataError(
            f"{r.label or 'series'} q={r.q}: no intervals (fewer than 2 exceedances)")
    return r.intervals / r.mean_interval


def threshold_sweep(v: VolatilitySeries, qs) -> dict[float, RecurrenceSeries]:
    """Extract one RecurrenceSeries per threshold; qs must be strictly increasing."""
    qvals = [_as_q(q) for q in qs]
    if any(b <= a for a, b in zip(qvals, qvals[1:])):
        raise ValueError(f"thresholds must be strictly increasing, got {qvals}")
    return {qv: extract(v, qv) for qv in qvals}


def write_intervals_csv(r: RecurrenceSeries, path) -> None:
    """One-column CSV of the interval series, for external plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["interval"])
        for tau in r.intervals:
            w.writerow([int(tau)])
