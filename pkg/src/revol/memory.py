"""Short- and long-memory diagnostics of recurrence-interval series.

Short-term memory: conditional distributions and conditional means of an
interval given the rank class of the interval that preceded it. Long-term
memory: detrended fluctuation analysis (polynomial detrending) and detrending
moving average analysis (window position theta in [0, 1]; 0 backward,
0.5 centered, 1 forward), both summarized by the log-log slope of F(s).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError
from .sefit import _as_intervals

log = logging.getLogger(__name__)

BOX_MIN = 20  # smallest DFA/DMA box; grids live in [BOX_MIN, N/4]


@dataclass(frozen=True)
class Partition:
    """Rank-based classes of the preceding interval.

    ``assignment[j]`` is the 0-based subset index of interval j+1, determined
    by the rank of interval j among all predecessors. Subsets are disjoint,
    cover every interval with a predecessor, and their sizes differ by at
    most 1.
    """

    k: int
    assignment: np.ndarray
    sizes: tuple[int, ...]


@dataclass(frozen=True)
class ConditionalMeanPoint:
    tau0_scaled: float   # subset mean of the preceding interval, / taubar
    mean_scaled: float   # mean of the following intervals, / taubar
    q: float


@dataclass(frozen=True)
class FluctuationFunction:
    method: str   # "dfa" or "dma"
    param: float  # polynomial order (dfa) or window position theta (dma)
    points: tuple[tuple[int, float], ...]  # (box size s, F(s))


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    stderr: float
    fit_range: tuple[float, float]
    n_points: int


def partition_by_preceding(data, k: int) -> Partition:
    """Split intervals-with-a-predecessor into k rank classes of the predecessor.

    Predecessor values are ranked with ties broken by time order (stable sort),
    so the result is deterministic; class sizes are balanced within 1.
    """
    arr = _as_intervals(data)
    if k < 2:
        raise ValueError("k must be >= 2")
    m = arr.size - 1  # intervals that have a predecessor
    if m < k:
        raise InsufficientDataError(
            f"need at least {k} intervals with predecessors, got {max(m, 0)}")
    tau0 = arr[:-1]
    order = np.argsort(tau0, kind="stable")
    ranks = np.empty(m, dtype=int)
    ranks[order] = np.arange(m)
    assignment = (ranks * k) // m
    sizes = tuple(int((assignment == i).sum()) for i in range(k))
    return Partition(k=k, assignment=assignment, sizes=sizes)


def conditional_subset(data, partition: Partition, i: int) -> np.ndarray:
    """Intervals whose preceding interval falls in rank class i."""
    arr = _as_intervals(data)
    if not 0 <= i < partition.k:
        raise ValueError(f"subset index {i} outside 0..{partition.k - 1}")
    return arr[1:][partition.assignment == i]


@dataclass(frozen=True)
class BinnedDensity:
    edges: np.ndarray
    density: np.ndarray

    def total_mass(self) -> float:
        return float((self.density * np.diff(self.edges)).sum())


def conditional_pdf(data, partition: Partition, i: int,
                    bins_per_decade: int = 8) -> BinnedDensity:
    """Normalized histogram of the conditional sample on logarithmic bins."""
    sample = conditional_subset(data, partition, i)
    if sample.size == 0:
        raise InsufficientDataError(f"conditional subset {i} is empty")
    lo, hi = float(sample.min()), float(sample.max())
    if lo == hi:
        edges = np.array([lo / 1.05, lo * 1.05])
    else:
        n_bins = max(1, int(math.ceil(math.log10(hi / lo) * bins_per_decade)))
        edges = np.geomspace(lo, hi, n_bins + 1)
    counts, edges = np.histogram(sample, bins=edges)
    density = counts / (sample.size * np.diff(edges))
    return BinnedDensity(edges=edges, density=density)


def _loglog_fit(x, y) -> ScalingFit:
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    n = lx.size
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    sxx = float(((lx - lx.mean()) ** 2).sum())
    if n > 2 and sxx > 0:
        stderr = math.sqrt(float((resid ** 2).sum()) / (n - 2) / sxx)
    else:
        stderr = 0.0
    return ScalingFit(exponent=float(slope), stderr=stderr,
                      fit_range=(float(np.min(x)), float(np.max(x))), n_points=n)


def conditional_means(sweep, k: int = 8) -> tuple[list[ConditionalMeanPoint], ScalingFit]:
    """Scaled conditional means pooled over thresholds, with the log-log slope.

    For each threshold, intervals are split into k predecessor rank classes;
    each class contributes the point (mean tau0 / taubar, mean following
    interval / taubar). The exponent is fit by least squares over the pooled
    points of all thresholds.
    """
    points: list[ConditionalMeanPoint] = []
    for q in sorted(sweep):
        r = sweep[q]
        arr = _as_intervals(r)
        part = partition_by_preceding(arr, k)
        taubar = float(arr[1:].mean()) if getattr(r, "mean_interval", None) is None \
            else float(r.mean_interval)
        for i in range(k):
            mask = part.assignment == i
            points.append(ConditionalMeanPoint(
                tau0_scaled=float(arr[:-1][mask].mean()) / taubar,
                mean_scaled=float(arr[1:][mask].mean()) / taubar,
                q=float(q)))
    fit = _loglog_fit([p.tau0_scaled for p in points],
                      [p.mean_scaled for p in points])
    return points, fit


def profile(x) -> np.ndarray:
    """Cumulative sum of the mean-centered series; telescopes to ~0 at the end."""
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        raise ValueError("empty series")
    return np.cumsum(arr - arr.mean())


def box_size_grid(n: int, n_points: int = 20) -> np.ndarray:
    """Logarithmically spaced integer box sizes in [20, n//4], deduplicated."""
    if n < 4 * BOX_MIN:
        raise InsufficientDataError(
            f"series length {n} < {4 * BOX_MIN}; box range [20, N/4] is empty")
    hi = n // 4
    grid = np.unique(np.round(np.geomspace(BOX_MIN, hi, n_points)).astype(int))
    return grid[(grid >= BOX_MIN) & (grid <= hi)]


def _validated_grid(y: np.ndarray, s_grid) -> np.ndarray:
    grid = np.asarray(s_grid, dtype=int)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("s_grid must be nonempty and strictly increasing")
    if y.size < 4 * int(grid[0]):
        raise InsufficientDataError(
            f"profile length {y.size} < 4 * min box {int(grid[0])}")
    keep = grid <= y.size // 4
    if not np.all(keep):
        log.warning("dropping %d box sizes above N/4=%d",
                    int((~keep).sum()), y.size // 4)
    grid = grid[keep]
    if grid.size == 0:
        raise InsufficientDataError("no box size fits within N/4")
    return grid


def dfa_fluctuation(y, s_grid, order: int = 1) -> FluctuationFunction:
    """Fluctuation function with polynomial detrending of the profile.

    For each box size s the profile is covered by floor(N/s) boxes from the
    start and floor(N/s) from the end (none of the series is discarded when N
    is not a multiple of s); each box is detrended by a degree-``order``
    polynomial and F(s) is the RMS residual over all 2*floor(N/s) boxes.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    yy = np.asarray(y, dtype=float)
    grid = _validated_grid(yy, s_grid)
    n = yy.size
    points = []
    for s in grid:
        s = int(s)
        nb = n // s
        design = np.vander(np.arange(s, dtype=float), order + 1)
        boxes = np.vstack([yy[:nb * s].reshape(nb, s),
                           yy[n - nb * s:].reshape(nb, s)])
        coef, *_ = np.linalg.lstsq(design, boxes.T, rcond=None)
        resid = boxes.T - design @ coef
        points.append((s, float(np.sqrt(np.mean(resid ** 2)))))
    return FluctuationFunction(method="dfa", param=float(order),
                               points=tuple(points))


def dma_window(s: int, theta: float) -> tuple[int, int]:
    """(k_back, k_forward) window extents: floor((s-1)*theta), ceil((s-1)*(1-theta))."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if s < 2:
        raise ValueError("window size s must be >= 2")
    k_back = int(math.floor((s - 1) * theta))
    k_forward = int(math.ceil((s - 1) * (1.0 - theta)))
    return k_back, k_forward


def dma_fluctuation(y, s_grid, theta: float) -> FluctuationFunction:
    """Fluctuation function with moving-average detrending positioned by theta.

    The trend at index i averages y over [i - k_forward, i + k_back]; residuals
    are taken only at indices where the full window lies inside the series.
    """
    yy = np.asarray(y, dtype=float)
    grid = _validated_grid(yy, s_grid)
    n = yy.size
    csum = np.concatenate(([0.0], np.cumsum(yy)))
    points = []
    for s in grid:
        s = int(s)
        k_back, k_forward = dma_window(s, theta)
        if s > n:
            raise InsufficientDataError(f"window {s} larger than series {n}")
        trend = (csum[s:] - csum[:-s]) / s  # window starting at j covers j..j+s-1
        resid = yy[k_forward:n - k_back] - trend
        points.append((s, float(np.sqrt(np.mean(resid ** 2)))))
    return FluctuationFunction(method="dma", param=float(theta),
                               points=tuple(points))


def fit_scaling(fluct: FluctuationFunction, s_range=None) -> ScalingFit:
    """Least-squares slope of ln F(s) on ln s; F = 0 points are excluded."""
    pts = list(fluct.points)
    if s_range is not None:
        lo, hi = s_range
        pts = [(s, f) for s, f in pts if lo <= s <= hi]
    dropped = [s for s, f in pts if f <= 0]
    if dropped:
        log.warning("fit_scaling: excluding %d zero-fluctuation points at s=%s",
                    len(dropped), dropped)
        pts = [(s, f) for s, f in pts if f > 0]
    if len(pts) < 5:
        raise InsufficientDataError(
            f"need >= 5 positive F(s) points to fit a slope, got {len(pts)}")
    return _loglog_fit([s for s, _ in pts], [f for _, f in pts])
