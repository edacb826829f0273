"""Exception hierarchy for the portfolio laboratory.

Every error raised by library code derives from PortfolioLabError so the
simulation harness can distinguish recoverable allocation failures (which
trigger the weight-carry fallback) from programming errors.
"""


class PortfolioLabError(Exception):
    """Base class for all library errors."""


class ConfigurationError(PortfolioLabError):
    """A config object or config file violates an invariant; message names the field."""


class InsufficientDataError(PortfolioLabError):
    """Not enough observations for the requested computation."""


class DegenerateAssetError(PortfolioLabError):
    """An asset (or series) has no usable variation, e.g. zero variance."""


class SingularMatrixError(PortfolioLabError):
    """A matrix required to be invertible is singular or too ill-conditioned."""


class InfeasibleReturnError(PortfolioLabError):
    """The requested target return lies outside the achievable frontier range."""


class UndefinedMetricError(PortfolioLabError):
    """A metric is undefined for the given input (empty graph, zero baseline, ...)."""


class UnknownNameError(PortfolioLabError):
    """An identifier (scheme, metric, method, override key) is not recognized."""


class PriceTableError(PortfolioLabError):
    """Base class for historical price ingestion errors."""


class PriceParseError(PriceTableError):
    """Malformed or missing cell in a price CSV; message names row and column."""


class DateOrderError(PriceTableError):
    """Dates in a price CSV are not strictly increasing."""


class PriceDomainError(PriceTableError):
    """A price value is not strictly positive."""
