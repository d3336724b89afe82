"""Recurrence-interval statistics of extreme volatility.

Interval extraction above thresholds, truncated stretched-exponential fitting
with bootstrap goodness-of-fit, hazard-probability estimation, and short- and
long-memory diagnostics (conditional statistics, DFA, DMA), with a batch CLI.
"""

__version__ = "0.1.0"

from .errors import (CsvFormatError, DegenerateSeriesError, FitError,
                     InsufficientDataError, ParameterRangeError, RevolError)
from .ingest import (PriceSeries, VolatilitySeries, compute_volatility,
                     load_price_csv, shuffle)
from .recurrence import (RecurrenceSeries, ThresholdSpec, extract, scaled,
                         threshold_sweep, write_intervals_csv)
from .sefit import (FitResult, StretchedExpParams, constrained_params,
                    fit_mle, fit_truncated, inverse_truncated_cdf, pdf,
                    sample_from_fit, truncated_cdf)
from .gof import (GofResult, KsTwoSampleResult, ScalingPair, bootstrap_both,
                  bootstrap_pvalue, cvm_statistic, ks_one_sample,
                  ks_two_sample, scaling_matrix)
from .hazard import (HazardCurve, HazardPoint, default_t_grid,
                     hazard_empirical, hazard_model)
from .memory import (BinnedDensity, ConditionalMeanPoint, FluctuationFunction,
                     Partition, ScalingFit, box_size_grid, conditional_means,
                     conditional_pdf, conditional_subset, dfa_fluctuation,
                     dma_fluctuation, dma_window, fit_scaling,
                     partition_by_preceding, profile)
from .pipeline import AnalysisConfig, InputSpec, Report, emit, load_input, run

__all__ = [
    "AnalysisConfig", "BinnedDensity", "ConditionalMeanPoint", "CsvFormatError",
    "DegenerateSeriesError", "FitError", "FitResult", "FluctuationFunction",
    "GofResult", "HazardCurve", "HazardPoint", "InputSpec",
    "InsufficientDataError", "KsTwoSampleResult", "ParameterRangeError",
    "Partition", "PriceSeries", "RecurrenceSeries", "Report", "RevolError",
    "ScalingFit", "ScalingPair", "StretchedExpParams", "ThresholdSpec",
    "VolatilitySeries", "bootstrap_both", "bootstrap_pvalue", "box_size_grid",
    "compute_volatility", "conditional_means", "conditional_pdf",
    "conditional_subset", "constrained_params", "cvm_statistic",
    "default_t_grid", "dfa_fluctuation", "dma_fluctuation", "dma_window",
    "emit", "extract", "fit_mle", "fit_scaling", "fit_truncated",
    "hazard_empirical", "hazard_model", "inverse_truncated_cdf",
    "ks_one_sample", "ks_two_sample", "load_input", "load_price_csv",
    "partition_by_preceding", "pdf", "profile", "run", "sample_from_fit",
    "scaled", "scaling_matrix", "shuffle", "threshold_sweep", "truncated_cdf",
    "write_intervals_csv",
]
