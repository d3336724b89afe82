"""Deterministic generators shared by the test suite.

fourier_filtered_noise builds long-memory Gaussian series by spectral
shaping of white noise (target DFA exponent = hurst); clustered_volatility
and clustered_prices wrap it into a volatility-clustered instrument whose
recurrence intervals carry both short- and long-term memory.
"""

from datetime import date, timedelta

import numpy as np

from revol import PriceSeries, VolatilitySeries


def fourier_filtered_noise(n, hurst, seed):
    """Unit-variance Gaussian series with power-law spectrum S(f) ~ f^-(2H-1)."""
    rng = np.random.default_rng(seed)
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freq = np.fft.rfftfreq(n)
    freq[0] = np.inf  # drop the DC component
    spectrum *= freq ** (-(2.0 * hurst - 1.0) / 2.0)
    spectrum[0] = 0.0
    x = np.fft.irfft(spectrum, n)
    return (x - x.mean()) / x.std()


def clustered_volatility(n=16384, hurst=0.9, lam=1.0, seed=0, label="synthetic"):
    """Volatility with long-memory log-scale: v = exp(lam*g) * |eps|, unit std."""
    g = fourier_filtered_noise(n, hurst, seed)
    eps = np.random.default_rng((seed, 1)).standard_normal(n)
    raw = np.exp(lam * g) * np.abs(eps)
    return VolatilitySeries(values=raw / raw.std(), label=label)


def clustered_prices(n=16384, hurst=0.9, lam=1.0, seed=0, label="synthetic"):
    """Price series whose absolute log-returns reproduce clustered_volatility."""
    g = fourier_filtered_noise(n, hurst, seed)
    rng = np.random.default_rng((seed, 1))
    eps = rng.standard_normal(n)
    returns = 0.01 * np.exp(lam * g) * eps
    logp = np.concatenate(([0.0], np.cumsum(returns)))
    start = date(1990, 1, 1)
    dates = tuple(start + timedelta(days=i) for i in range(n + 1))
    return PriceSeries(dates=dates, prices=np.exp(logp), label=label)


def write_price_csv(path, prices: PriceSeries):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date,price\n")
        for d, p in zip(prices.dates, prices.prices):
            fh.write(f"{d.isoformat()},{float(p)!r}\n")
