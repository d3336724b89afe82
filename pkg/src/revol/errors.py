"""Exception types shared across the package."""


class RevolError(Exception):
    """Base class for all revol errors."""


class CsvFormatError(RevolError):
    """Input CSV is unreadable or contains invalid rows.

    ``rows`` holds the 1-based line numbers of offending rows, when known.
    """

    def __init__(self, message, rows=None):
        super().__init__(message)
        self.rows = tuple(rows) if rows else ()


class DegenerateSeriesError(RevolError):
    """Series has no usable variation (e.g. constant price ratios)."""


class InsufficientDataError(RevolError):
    """Too few observations for the requested operation."""


class ParameterRangeError(RevolError):
    """Parameter outside the numerically representable range."""


class FitError(RevolError):
    """Optimizer failed to produce a usable fit; message carries diagnostics."""
