"""Covariance, Pearson, DCCA and DPCCA correlation estimators.

DCCA works on integrated (cumulative, mean-removed) profiles of the two
series. The profiles are divided into overlapping boxes of n+1 points; a
least-squares line is removed per box and per series; the coefficient is the
ratio of the averaged residual covariance to the geometric mean of the
averaged residual variances. DPCCA normalizes the inverse of the DCCA matrix
to obtain partial correlations.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    ConfigurationError,
    DegenerateAssetError,
    InsufficientDataError,
    SingularMatrixError,
)
from .types import DCCA, DPCCA, METRIC_KINDS, PEARSON, VARIANCE_FLOOR, ReturnMatrix

# Condition-number ceiling above which a DCCA matrix is treated as singular.
MAX_CONDITION_NUMBER = 1e12
# Ridge jitter added to the DCCA diagonal when regularized inversion is enabled.
DPCCA_RIDGE = 1e-10


@dataclass(frozen=True)
class CovarianceMatrix:
    """Sample covariance of a return window (return^2 units)."""

    values: np.ndarray
    window_start: int = 0
    window_end: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ConfigurationError("covariance matrix must be square")
        if not np.allclose(v, v.T, rtol=0.0, atol=1e-12):
            raise ConfigurationError("covariance matrix must be symmetric")
        diag = np.diag(v)
        if np.any(diag < -1e-12):
            raise ConfigurationError("covariance diagonal must be non-negative")
        eigs = np.linalg.eigvalsh(v)
        if eigs[0] < -1e-10 * max(eigs[-1], 1e-300):
            raise ConfigurationError("covariance matrix is not positive semidefinite")

    @property
    def num_assets(self):
        return self.values.shape[0]

    def volatilities(self):
        return np.sqrt(np.clip(np.diag(self.values), 0.0, None))


@dataclass(frozen=True)
class CorrelationMatrix:
    """N x N correlation-type matrix tagged with the metric that produced it."""

    values: np.ndarray
    metric_kind: str
    box_length: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.metric_kind not in METRIC_KINDS:
            raise ConfigurationError(f"unknown metric kind {self.metric_kind!r}")
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ConfigurationError("correlation matrix must be square")
        if not np.allclose(v, v.T, rtol=0.0, atol=1e-12):
            raise ConfigurationError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(v), 1.0, rtol=0.0, atol=1e-9):
            raise ConfigurationError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(v) > 1.0 + 1e-9):
            raise ConfigurationError("correlation entries must lie in [-1, 1]")

    @property
    def num_assets(self):
        return self.values.shape[0]


def covariance(window, window_start=0, window_end=None):
    """Sample covariance (denominator T-1) of a return window."""
    values = window.values if isinstance(window, ReturnMatrix) else np.asarray(window, float)
    t = values.shape[0]
    if t < 2:
        raise InsufficientDataError("covariance needs at least 2 observations")
    cov = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
    cov = (cov + cov.T) / 2.0
    if window_end is None:
        window_end = t
    return CovarianceMatrix(cov, window_start, window_end)


def pearson_corr(cov):
    """Pearson correlation sigma^-1 Sigma sigma^-1 from a covariance matrix."""
    variances = np.diag(cov.values)
    bad = np.flatnonzero(variances <= VARIANCE_FLOOR)
    if bad.size:
        raise DegenerateAssetError(
            f"asset {bad[0]} has variance <= {VARIANCE_FLOOR:g}; correlation undefined"
        )
    vols = np.sqrt(variances)
    corr = cov.values / np.outer(vols, vols)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(corr, PEARSON)


def _detrended_gram(values, n, labels=None):
    """Averaged residual (co)variance matrix F2 of all series in a T x N window.

    F2[i, j] is the detrended covariance between series i and j: the residual
    cross-products are averaged over the n+1 points of each box and over the
    T-n overlapping boxes, which collapses to one flat average.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    t = values.shape[0]
    if n < 2:
        raise ConfigurationError(f"box length must be >= 2, got {n}")
    if t <= n + 1:
        raise InsufficientDataError(
            f"DCCA with box length {n} needs more than {n + 1} observations, got {t}"
        )
    profiles = np.cumsum(values - values.mean(axis=0, keepdims=True), axis=0)
    boxes = sliding_window_view(profiles, n + 1, axis=0)  # (T-n, N, n+1)
    design = np.stack([np.ones(n + 1), np.arange(n + 1.0)], axis=1)
    coefs = boxes @ np.linalg.pinv(design).T  # least-squares line per box/series
    resid = boxes - coefs @ design.T
    flat = np.moveaxis(resid, 1, 0).reshape(values.shape[1], -1)
    gram = (flat @ flat.T) / flat.shape[1]
    gram = (gram + gram.T) / 2.0
    bad = np.flatnonzero(np.diag(gram) <= 0.0)
    if bad.size:
        name = labels[bad[0]] if labels is not None else f"series {bad[0]}"
        raise DegenerateAssetError(f"{name} has a perfectly linear integrated profile")
    return gram


def dcca_pair(x, y, n):
    """DCCA coefficient of two equal-length series at box length n, in [-1, 1]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigurationError("dcca_pair needs two 1-D series of equal length")
    gram = _detrended_gram(np.stack([x, y], axis=1), n)
    coef = gram[0, 1] / np.sqrt(gram[0, 0] * gram[1, 1])
    return float(np.clip(coef, -1.0, 1.0))


def dcca_matrix(window, n):
    """Matrix of pairwise DCCA coefficients over a return window."""
    labels = window.asset_labels if isinstance(window, ReturnMatrix) else None
    values = window.values if isinstance(window, ReturnMatrix) else np.asarray(window, float)
    gram = _detrended_gram(values, n, labels)
    scale = np.sqrt(np.diag(gram))
    corr = np.clip(gram / np.outer(scale, scale), -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(corr, DCCA, n)


def dpcca_matrix(window, n, ridge=False):
    """DPCCA partial-correlation matrix: normalize the inverse DCCA matrix.

    With C = rho_DCCA^-1, the coefficient is -C_xy / sqrt(C_xx C_yy); the
    diagonal is set to 1 explicitly. Raises SingularMatrixError for
    ill-conditioned DCCA matrices unless ``ridge`` enables a tiny jitter.
    """
    base = dcca_matrix(window, n)
    rho = base.values.copy()
    if ridge:
        rho = rho + DPCCA_RIDGE * np.eye(rho.shape[0])
    cond = np.linalg.cond(rho)
    if not np.isfinite(cond) or cond > MAX_CONDITION_NUMBER:
        raise SingularMatrixError(
            f"DCCA matrix is singular or ill-conditioned (cond={cond:.3g})"
        )
    inv = np.linalg.inv(rho)
    diag = np.diag(inv)
    if np.any(diag <= 0.0):
        raise SingularMatrixError("inverse DCCA matrix has a non-positive diagonal")
    partial = -inv / np.sqrt(np.outer(diag, diag))
    partial = np.clip((partial + partial.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(partial, 1.0)
    return CorrelationMatrix(partial, DPCCA, n)
