import os

import pytest

from helpers import clustered_volatility

from revol import recurrence

CRUDE_ENV = "REVOL_CRUDE_OIL_CSV"

PAPER_THRESHOLDS = (1.0, 1.2, 1.4, 1.6, 1.8, 2.0)


@pytest.fixture(scope="session")
def crude_oil_csv():
    """Path to a refetched EIA crude-oil contract-1 daily CSV, when provided.

    Table-value reproduction tests only run against the real historical file;
    point REVOL_CRUDE_OIL_CSV at it to enable them.
    """
    path = os.environ.get(CRUDE_ENV)
    if not path or not os.path.exists(path):
        pytest.skip(f"set {CRUDE_ENV} to an EIA crude-oil contract-1 daily CSV "
                    "(date,price; 1983-04-04..2012-10-02) to run this reproduction")
    return path


@pytest.fixture(scope="session")
def synth_vol():
    """Volatility-clustered instrument with genuine short- and long-term memory."""
    return clustered_volatility(n=16384, hurst=0.9, lam=1.0, seed=20)


@pytest.fixture(scope="session")
def synth_sweep(synth_vol):
    return recurrence.threshold_sweep(synth_vol, PAPER_THRESHOLDS)
