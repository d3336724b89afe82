"""Price CSV loading, normalized volatility, and shuffled surrogates."""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path

import numpy as np

from .errors import CsvFormatError, DegenerateSeriesError

log = logging.getLogger(__name__)

_DATE_FORMATS = {"iso": "%Y-%m-%d", "us": "%m/%d/%Y"}


@dataclass(frozen=True)
class PriceSeries:
    """Dated daily price series: dates strictly increasing, prices > 0."""

    dates: tuple[date, ...]
    prices: np.ndarray
    label: str = ""

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))
        if prices.ndim != 1 or len(self.dates) != prices.size:
            raise ValueError("dates and prices must be 1-d and of equal length")
        if prices.size < 2:
            raise ValueError("price series needs at least 2 rows")
        if not np.all(np.isfinite(prices)) or not np.all(prices > 0):
            raise ValueError("prices must be finite and strictly positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")

    def __len__(self):
        return self.prices.size


@dataclass(frozen=True)
class VolatilitySeries:
    """Nonnegative volatility values.

    ``compute_volatility`` output additionally has unit (population) standard
    deviation; the constructor does not enforce that so partial or synthetic
    series can be represented.
    """

    values: np.ndarray
    label: str = ""
    source: str = "original"  # "original" or "shuffled"
    seed: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a nonempty 1-d array")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("volatility values must be finite and nonnegative")
        if self.source not in ("original", "shuffled"):
            raise ValueError(f"unknown source tag {self.source!r}")

    def __len__(self):
        return self.values.size


def load_price_csv(path, date_col="date", price_col="price", label=None,
                   us_dates=False, on_invalid="error"):
    """Load a dated price series from a headered, comma-separated UTF-8 file.

    Parameters
    ----------
    path : file path
    date_col, price_col : header names of the date and price columns
    label : instrument name; defaults to the file stem
    us_dates : accept "M/D/YYYY" instead of ISO "YYYY-MM-DD"
    on_invalid : "error" aborts with a row-indexed report when any row has an
        unparsable date or a missing/non-positive price; "drop" discards such
        rows and logs the report instead.

    Returns a PriceSeries sorted by date.
    """
    if on_invalid not in ("error", "drop"):
        raise ValueError("on_invalid must be 'error' or 'drop'")
    path = Path(path)
    fmt = _DATE_FORMATS["us" if us_dates else "iso"]
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise CsvFormatError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CsvFormatError(f"{path}: empty file, expected a header row")
        missing = [c for c in (date_col, price_col) if c not in reader.fieldnames]
        if missing:
            raise CsvFormatError(
                f"{path}: header lacks column(s) {missing}; found {reader.fieldnames}")
        rows = []
        bad = []
        for lineno, rec in enumerate(reader, start=2):  # line 1 is the header
            raw_date = (rec.get(date_col) or "").strip()
            raw_price = (rec.get(price_col) or "").strip()
            try:
                day = datetime.strptime(raw_date, fmt).date()
            except ValueError:
                bad.append((lineno, f"unparsable date {raw_date!r}"))
                continue
            try:
                price = float(raw_price)
            except ValueError:
                bad.append((lineno, f"missing or non-numeric price {raw_price!r}"))
                continue
            if not np.isfinite(price) or price <= 0:
                bad.append((lineno, f"non-positive price {raw_price!r}"))
                continue
            rows.append((day, price))
    if bad:
        shown = bad[:20]
        report = "; ".join(f"line {ln}: {msg}" for ln, msg in shown)
        if len(bad) > len(shown):
            report += f"; ... and {len(bad) - len(shown)} more"
        if on_invalid == "error":
            raise CsvFormatError(f"{path}: {len(bad)} invalid row(s): {report}",
                                 rows=[ln for ln, _ in bad])
        log.warning("%s: dropped %d invalid row(s): %s", path, len(bad), report)
    if len(rows) < 2:
        raise CsvFormatError(f"{path}: needs at least 2 valid rows, got {len(rows)}")
    rows.sort(key=lambda r: r[0])
    dupes = [d for d, cnt in Counter(r[0] for r in rows).items() if cnt > 1]
    if dupes:
        raise CsvFormatError(f"{path}: duplicate dates {sorted(dupes)[:5]}")
    return PriceSeries(dates=tuple(r[0] for r in rows),
                       prices=np.array([r[1] for r in rows]),
                       label=label if label is not None else path.stem)


def compute_volatility(p: PriceSeries) -> VolatilitySeries:
    """Absolute log-returns scaled to unit population standard deviation.

    v(t) = |ln Y(t) - ln Y(t-1)| / std(R) with the uncorrected (divide-by-N)
    std of the absolute-return series R. The mean is not subtracted, so values
    stay nonnegative and the output std is exactly 1.
    """
    if len(p) < 3:
        raise ValueError("need at least 3 prices (2 returns)")
    r = np.abs(np.diff(np.log(p.prices)))
    sd = float(np.std(r))  # ddof=0: plain-average moments
    if sd == 0.0 or not np.isfinite(sd):
        raise DegenerateSeriesError(
            f"{p.label or 'series'}: zero return variance (constant price ratios)")
    return VolatilitySeries(values=r / sd, label=p.label)


def shuffle(v: VolatilitySeries, seed: int) -> VolatilitySeries:
    """Uniform random permutation of the values; deterministic per seed."""
    rng = np.random.default_rng(seed)
    return VolatilitySeries(values=rng.permutation(v.values), label=v.label,
                            source="shuffled", seed=seed)
