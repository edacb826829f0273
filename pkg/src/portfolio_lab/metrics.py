"""Portfolio evaluation metrics.

All functions are pure and operate on plain numpy arrays. Loss-type metrics
(VaR, CVaR) follow the sign convention that a positive value is a loss.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateAssetError,
    InsufficientDataError,
    UndefinedMetricError,
)


def portfolio_variance(weights, cov):
    """PV = w' Sigma w."""
    w = np.asarray(weights, dtype=float)
    sigma = np.asarray(cov, dtype=float)
    if sigma.shape != (w.size, w.size):
        raise ConfigurationError(
            f"covariance shape {sigma.shape} does not match {w.size} weights"
        )
    return float(w @ sigma @ w)


def risk_contribution(weights, cov):
    """Per-asset risk contribution RC_j = w_j (Sigma w)_j / sqrt(w' Sigma w).

    The contributions satisfy the Euler decomposition: sum_j RC_j equals the
    portfolio volatility sqrt(w' Sigma w).
    """
    w = np.asarray(weights, dtype=float)
    sigma = np.asarray(cov, dtype=float)
    pv = portfolio_variance(w, sigma)
    if pv <= 0.0:
        raise DegenerateAssetError("zero portfolio variance; risk contribution undefined")
    return w * (sigma @ w) / math.sqrt(pv)


def diversification_ratio(weights, cov):
    """DR = (w' sigma) / sqrt(w' Sigma w) with sigma = sqrt(diag(Sigma))."""
    w = np.asarray(weights, dtype=float)
    sigma = np.asarray(cov, dtype=float)
    pv = portfolio_variance(w, sigma)
    if pv <= 0.0:
        raise DegenerateAssetError("zero portfolio variance; diversification ratio undefined")
    vols = np.sqrt(np.clip(np.diag(sigma), 0.0, None))
    return float(w @ vols) / math.sqrt(pv)


def nhhi(weights):
    """Normalized Herfindahl-Hirschman index of weight concentration.

    NHHI = (HHI - 1/N) / (1 - 1/N), 0 for equal weights, 1 for a single asset.
    """
    w = np.asarray(weights, dtype=float)
    n = w.size
    if n < 2:
        raise UndefinedMetricError("NHHI is undefined for a single asset")
    hhi = float(w @ w)
    return (hhi - 1.0 / n) / (1.0 - 1.0 / n)


def sharpe_ratio(returns, risk_free=0.0):
    """SR = (mean(returns) - risk_free) / std(returns), sample std (T-1)."""
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        raise InsufficientDataError("need at least 2 returns for a Sharpe ratio")
    std = float(np.std(r, ddof=1))
    if std <= 0.0 or np.ptp(r) == 0.0:
        raise DegenerateAssetError("constant return series; Sharpe ratio undefined")
    return (float(np.mean(r)) - risk_free) / std


def var_historical(returns, alpha=0.05):
    """Historical VaR: the lower empirical alpha-quantile, negated.

    The quantile is taken without interpolation at sorted index
    floor(alpha * (T - 1)); the result is positive when it represents a loss.
    """
    r = np.asarray(returns, dtype=float)
    if r.size < 1:
        raise InsufficientDataError("empty return series")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must be in (0, 1), got {alpha}")
    ordered = np.sort(r)
    idx = int(math.floor(alpha * (r.size - 1)))
    return -float(ordered[idx])


def cvar_historical(returns, alpha=0.05):
    """Historical CVaR: mean of the returns at or beyond the VaR cutoff, negated."""
    r = np.asarray(returns, dtype=float)
    var = var_historical(r, alpha)
    tail = r[r <= -var]
    return -float(np.mean(tail))


def compound_log_return(returns):
    """CLR = sum of log(1 + r_t). Requires every return > -1."""
    r = np.asarray(returns, dtype=float)
    if np.any(r <= -1.0):
        raise UndefinedMetricError("compound log return undefined for returns <= -100%")
    return float(np.sum(np.log1p(r)))


def improvement(mean_x, mean_baseline):
    """Relative improvement of a mean return over a baseline: (x - b) / |b|."""
    if mean_baseline == 0.0:
        raise UndefinedMetricError("improvement undefined for a zero baseline return")
    return (mean_x - mean_baseline) / abs(mean_baseline)


# Column order of the per-method results table (method column excluded).
TABLE_FIELDS = (
    "daily_return_mean",
    "daily_return_std",
    "improvement",
    "clr",
    "nhhi",
    "pv",
    "dr",
    "sr",
    "var",
    "cvar",
)


@dataclass
class MetricRecord:
    """One full row of evaluation metrics for a portfolio over a horizon.

    ``improvement`` is only meaningful relative to a baseline method and is
    filled in at table-assembly time; fields that could not be computed
    (degenerate inputs) are NaN.
    """

    daily_return_mean: float
    daily_return_std: float
    clr: float
    nhhi: float
    pv: float
    dr: float
    sr: float
    var: float
    cvar: float
    rc: list = field(default_factory=list)
    improvement: float = float("nan")

    def to_dict(self):
        return {
            "daily_return_mean": self.daily_return_mean,
            "daily_return_std": self.daily_return_std,
            "improvement": self.improvement,
            "clr": self.clr,
            "nhhi": self.nhhi,
            "pv": self.pv,
            "dr": self.dr,
            "sr": self.sr,
            "var": self.var,
            "cvar": self.cvar,
            "rc": list(self.rc),
        }

    def table_row(self):
        return [getattr(self, name) for name in TABLE_FIELDS]
