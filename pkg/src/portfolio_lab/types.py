"""Shared domain types and constants used across the pipeline."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InsufficientDataError

# Correlation metric identifiers. "pearson" is labelled "cov" in reports,
# matching the conventional naming of covariance-based scheme variants.
PEARSON = "pearson"
DCCA = "dcca"
DPCCA = "dpcca"
METRIC_KINDS = (PEARSON, DCCA, DPCCA)

SCHEME_KINDS = ("ivp", "hrp", "cla", "netmod")

# Variances at or below this floor (return^2 units) count as degenerate.
VARIANCE_FLOOR = 1e-12


def default_asset_labels(n):
    width = max(2, len(str(n - 1)))
    return tuple(f"A{i:0{width}d}" for i in range(n))


@dataclass(frozen=True)
class ReturnMatrix:
    """T x N matrix of simple per-period returns, the universal interchange type.

    ``parent_of`` records the provenance of dependent (noise-copied) columns:
    it maps a dependent column index to the independent column it was derived
    from. Generators fill it in; it is carried through untouched otherwise.
    """

    values: np.ndarray
    asset_labels: tuple
    parent_of: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ConfigurationError("ReturnMatrix values must be 2-dimensional")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ConfigurationError("ReturnMatrix must have at least one row and column")
        object.__setattr__(self, "asset_labels", tuple(self.asset_labels))
        if len(self.asset_labels) != values.shape[1]:
            raise ConfigurationError(
                f"asset_labels has {len(self.asset_labels)} entries "
                f"for {values.shape[1]} columns"
            )

    @property
    def num_periods(self):
        return self.values.shape[0]

    @property
    def num_assets(self):
        return self.values.shape[1]

    def validate_for_analysis(self):
        """Check the invariants required before feeding this matrix to the
        allocation/evaluation pipeline: T >= 2, N >= 2, every return > -1."""
        if self.num_periods < 2:
            raise InsufficientDataError("need at least 2 return observations")
        if self.num_assets < 2:
            raise InsufficientDataError("need at least 2 assets")
        if not np.all(self.values > -1.0):
            t, i = np.argwhere(self.values <= -1.0)[0]
            raise ConfigurationError(
                f"return of -100% or worse at period {t}, asset {self.asset_labels[i]}"
            )

    def with_values(self, values):
        return ReturnMatrix(values, self.asset_labels, dict(self.parent_of))
