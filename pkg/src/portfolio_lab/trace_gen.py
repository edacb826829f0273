"""Synthetic return-trace generators.

Five stochastic models produce T x N return matrices deterministically from a
seed: independent Gaussians, geometric Brownian motion paths, GARCH(1,1),
cross-coupled ARFIMA pairs, and ARFIMA with interval mixing plus shocks.
Every model except ARFIMA builds N = num_independent + num_dependent columns;
a dependent column copies a uniformly chosen independent one and adds white
noise. ARFIMA builds 2 * num_pairs coupled columns plus dependents.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InsufficientDataError
from .types import ReturnMatrix, default_asset_labels

U64_MASK = 0xFFFFFFFFFFFFFFFF

# Warm-up steps discarded so GARCH samples start near stationarity.
GARCH_BURN_IN = 200

# Sub-stream tags for deriving independent seeds from one generator seed.
_MIXING_TAG = 1
_SHOCKS_TAG = 2

GENERATOR_KINDS = ("gaussian", "gbm", "garch", "arfima", "arfima_shocks")


def run_seed(master_seed, run_index):
    """Per-run seed: master_seed XOR run_index, reduced to 64 bits."""
    return (int(master_seed) ^ int(run_index)) & U64_MASK


def derive_seed(seed, tag):
    """Derive an independent 64-bit sub-stream seed from (seed, tag)."""
    ss = np.random.SeedSequence((int(seed) & U64_MASK, int(tag)))
    return int(ss.generate_state(1, np.uint64)[0])


def _require(cond, field, message):
    if not cond:
        raise ConfigurationError(f"{field}: {message}")


@dataclass(frozen=True)
class GaussianConfig:
    num_independent: int
    num_dependent: int
    base_mean: float = 0.0
    base_std: float = 0.01
    noise_std_ratio: float = 0.25

    def __post_init__(self):
        _require(self.num_independent >= 1, "num_independent", "must be >= 1")
        _require(self.num_dependent >= 0, "num_dependent", "must be >= 0")
        _require(self.base_std > 0.0, "base_std", "must be > 0")
        _require(self.noise_std_ratio > 0.0, "noise_std_ratio", "must be > 0")

    @property
    def num_assets(self):
        return self.num_independent + self.num_dependent


@dataclass(frozen=True)
class GbmConfig:
    num_independent: int
    num_dependent: int
    drift: float = 0.0
    volatility: float = 0.2
    initial_value: float = 0.01
    dt: float = 1.0
    noise_std_ratio: float = 0.25

    def __post_init__(self):
        _require(self.num_independent >= 1, "num_independent", "must be >= 1")
        _require(self.num_dependent >= 0, "num_dependent", "must be >= 0")
        _require(self.volatility >= 0.0, "volatility", "must be >= 0")
        _require(self.dt > 0.0, "dt", "must be > 0")
        _require(self.initial_value != 0.0, "initial_value", "must be nonzero")
        _require(self.noise_std_ratio > 0.0, "noise_std_ratio", "must be > 0")

    @property
    def num_assets(self):
        return self.num_independent + self.num_dependent


@dataclass(frozen=True)
class GarchConfig:
    num_independent: int
    num_dependent: int
    alpha0: float = 0.4
    alpha1: float = 0.4
    beta1: float = 0.3
    noise_std_ratio: float = 0.25

    def __post_init__(self):
        _require(self.num_independent >= 1, "num_independent", "must be >= 1")
        _require(self.num_dependent >= 0, "num_dependent", "must be >= 0")
        _require(self.alpha0 > 0.0, "alpha0", "must be > 0")
        _require(self.alpha1 >= 0.0, "alpha1", "must be >= 0")
        _require(self.beta1 >= 0.0, "beta1", "must be >= 0")
        _require(
            self.alpha1 + self.beta1 < 1.0,
            "alpha1+beta1",
            "must be < 1 (unstable model)",
        )
        _require(self.noise_std_ratio > 0.0, "noise_std_ratio", "must be > 0")

    @property
    def num_assets(self):
        return self.num_independent + self.num_dependent


@dataclass(frozen=True)
class ArfimaConfig:
    num_pairs: int
    num_dependent: int
    coupling_weight: float = 0.8
    rho1: float = 0.4
    rho2: float = 0.3
    kernel_truncation: int = 100
    noise_std_ratio: float = 0.25

    def __post_init__(self):
        _require(self.num_pairs >= 1, "num_pairs", "must be >= 1")
        _require(self.num_dependent >= 0, "num_dependent", "must be >= 0")
        _require(
            0.5 <= self.coupling_weight <= 1.0, "coupling_weight", "must be in [0.5, 1]"
        )
        for name, rho in (("rho1", self.rho1), ("rho2", self.rho2)):
            _require(abs(rho) <= 0.5, name, "must be in [-0.5, 0.5]")
            _require(rho != 0.0, name, "must be nonzero (gamma(-rho) is singular at 0)")
        _require(self.kernel_truncation >= 1, "kernel_truncation", "must be >= 1")
        _require(self.noise_std_ratio > 0.0, "noise_std_ratio", "must be > 0")

    @property
    def num_assets(self):
        return 2 * self.num_pairs + self.num_dependent


@dataclass(frozen=True)
class ShockConfig:
    max_shocks: int = 5
    mixing_beta: float = 0.5
    max_duration_fraction: float = 0.1
    num_mixed_pairs: int = 4

    def __post_init__(self):
        _require(self.max_shocks >= 1, "max_shocks", "must be >= 1")
        _require(0.0 < self.mixing_beta <= 1.0, "mixing_beta", "must be in (0, 1]")
        _require(
            0.0 < self.max_duration_fraction <= 1.0,
            "max_duration_fraction",
            "must be in (0, 1]",
        )
        _require(self.num_mixed_pairs >= 0, "num_mixed_pairs", "must be >= 0")


def _check_length(length):
    if length < 2:
        raise InsufficientDataError(f"trace length must be >= 2, got {length}")


def _with_dependents(independent, num_dependent, noise_scales, rng):
    """Append dependent columns: a uniformly chosen parent plus white noise.

    ``noise_scales[i]`` is the noise std used for dependents of independent
    column i. Returns (values, parent_of).
    """
    x = independent.shape[1]
    if num_dependent == 0:
        return independent, {}
    parents = rng.integers(0, x, size=num_dependent)
    noise = rng.standard_normal((independent.shape[0], num_dependent))
    dependent = independent[:, parents] + noise * np.asarray(noise_scales)[parents]
    parent_of = {x + j: int(parents[j]) for j in range(num_dependent)}
    return np.concatenate([independent, dependent], axis=1), parent_of


def gen_gaussian(cfg, length, seed):
    """Independent normal returns plus noisy copies."""
    _check_length(length)
    rng = np.random.default_rng(run_seed(seed, 0))
    independent = rng.normal(cfg.base_mean, cfg.base_std, size=(length, cfg.num_independent))
    scales = np.full(cfg.num_independent, cfg.noise_std_ratio * cfg.base_std)
    values, parent_of = _with_dependents(independent, cfg.num_dependent, scales, rng)
    return ReturnMatrix(values, default_asset_labels(values.shape[1]), parent_of)


def gen_gbm(cfg, length, seed):
    """Exact-solution geometric Brownian motion paths sampled at steps of dt.

    r_t = r0 * exp((mu - sigma^2 / 2) t + sigma W_t) with Wiener increments
    N(0, dt). The path values themselves form the return columns.
    """
    _check_length(length)
    rng = np.random.default_rng(run_seed(seed, 0))
    t = cfg.dt * np.arange(1, length + 1)
    increments = rng.normal(0.0, math.sqrt(cfg.dt), size=(length, cfg.num_independent))
    wiener = np.cumsum(increments, axis=0)
    drift_term = (cfg.drift - 0.5 * cfg.volatility**2) * t
    independent = cfg.initial_value * np.exp(drift_term[:, None] + cfg.volatility * wiener)
    scales = cfg.noise_std_ratio * np.std(independent, axis=0)
    values, parent_of = _with_dependents(independent, cfg.num_dependent, scales, rng)
    return ReturnMatrix(values, default_asset_labels(values.shape[1]), parent_of)


def gen_garch(cfg, length, seed):
    """GARCH(1,1) returns r_t = sigma_t z_t with
    sigma_t^2 = alpha0 + alpha1 eps_{t-1}^2 + beta1 sigma_{t-1}^2.

    The recursion starts at the unconditional variance
    alpha0 / (1 - alpha1 - beta1) and a burn-in prefix is discarded.
    """
    _check_length(length)
    rng = np.random.default_rng(run_seed(seed, 0))
    x = cfg.num_independent
    total = length + GARCH_BURN_IN
    z = rng.standard_normal((total, x))
    eps = np.empty((total, x))
    var = np.full(x, cfg.alpha0 / (1.0 - cfg.alpha1 - cfg.beta1))
    for step in range(total):
        eps[step] = np.sqrt(var) * z[step]
        var = cfg.alpha0 + cfg.alpha1 * eps[step] ** 2 + cfg.beta1 * var
    independent = eps[GARCH_BURN_IN:]
    scales = cfg.noise_std_ratio * np.std(independent, axis=0)
    values, parent_of = _with_dependents(independent, cfg.num_dependent, scales, rng)
    return ReturnMatrix(values, default_asset_labels(values.shape[1]), parent_of)


def arfima_kernel(rho, kmax):
    """Statistical weights a_n(rho) = gamma(n - rho) / (gamma(-rho) gamma(1 + n))
    for n = 1..kmax, computed through log-gamma for numerical stability."""
    if rho == 0.0:
        raise ConfigurationError("rho: must be nonzero (gamma(-rho) is singular at 0)")
    log_abs_gamma_mrho = math.lgamma(-rho)  # lgamma returns log|gamma|
    sign = -1.0 if rho > 0.0 else 1.0  # gamma(-rho) < 0 for rho in (0, 1)
    weights = np.empty(kmax)
    for idx in range(kmax):
        n = idx + 1
        weights[idx] = sign * math.exp(
            math.lgamma(n - rho) - log_abs_gamma_mrho - math.lgamma(n + 1)
        )
    return weights


def gen_arfima(cfg, length, seed):
    """Cross-coupled ARFIMA pairs with power-law weights.

    Each pair (r1, r2) follows
      r1[t] = W * s1 + (1 - W) * s2 + e1[t]
      r2[t] = (1 - W) * s1 + W * s2 + e2[t]
    with s1 = sum_n a_n(rho1) r1[t-n], s2 = sum_n a_n(rho2) r2[t-n], the sums
    truncated at min(t, kernel_truncation) lags, and unit-variance Gaussian
    innovations e1, e2.
    """
    _check_length(length)
    if cfg.kernel_truncation > length:
        raise ConfigurationError(
            f"kernel_truncation: must be <= trace length ({length}), "
            f"got {cfg.kernel_truncation}"
        )
    rng = np.random.default_rng(run_seed(seed, 0))
    kmax = cfg.kernel_truncation
    a1 = arfima_kernel(cfg.rho1, kmax)
    a2 = arfima_kernel(cfg.rho2, kmax)
    w = cfg.coupling_weight

    eps = rng.standard_normal((length, 2 * cfg.num_pairs))
    independent = np.zeros((length, 2 * cfg.num_pairs))
    for p in range(cfg.num_pairs):
        r1 = independent[:, 2 * p]
        r2 = independent[:, 2 * p + 1]
        e1 = eps[:, 2 * p]
        e2 = eps[:, 2 * p + 1]
        for t in range(length):
            m = min(t, kmax)
            if m:
                h1 = r1[t - m : t][::-1]
                h2 = r2[t - m : t][::-1]
                s1 = a1[:m] @ h1
                s2 = a2[:m] @ h2
            else:
                s1 = s2 = 0.0
            r1[t] = w * s1 + (1.0 - w) * s2 + e1[t]
            r2[t] = (1.0 - w) * s1 + w * s2 + e2[t]
    if not np.all(np.isfinite(independent)):
        raise ConfigurationError(
            "rho1/rho2: ARFIMA recursion diverged for this parameter choice"
        )
    scales = cfg.noise_std_ratio * np.std(independent, axis=0)
    values, parent_of = _with_dependents(independent, cfg.num_dependent, scales, rng)
    return ReturnMatrix(values, default_asset_labels(values.shape[1]), parent_of)


def apply_correlation_mixing(returns, pairs, beta):
    """Blend paired assets inside time intervals:
    r_a <- beta r_a + (1 - beta) r_b and symmetrically, simultaneously.

    ``pairs`` is a list of (asset_a, asset_b, (start, end)) with half-open
    index intervals. Intervals touching the same asset must not overlap.
    """
    if not 0.0 < beta <= 1.0:
        raise ConfigurationError("beta: must be in (0, 1]")
    t_len, n = returns.values.shape
    seen = {}
    for a, b, (start, end) in pairs:
        if a == b:
            raise ConfigurationError(f"pair ({a}, {b}): assets must be distinct")
        for asset in (a, b):
            if not 0 <= asset < n:
                raise ConfigurationError(f"asset index {asset} out of range")
            for s0, e0 in seen.get(asset, []):
                if start < e0 and s0 < end:
                    raise ConfigurationError(
                        f"asset {asset}: overlapping mixing intervals "
                        f"[{s0}, {e0}) and [{start}, {end})"
                    )
            seen.setdefault(asset, []).append((start, end))
        if not (0 <= start < end <= t_len):
            raise ConfigurationError(f"interval [{start}, {end}) outside [0, {t_len})")
    out = returns.values.copy()
    for a, b, (start, end) in pairs:
        ra = out[start:end, a].copy()
        rb = out[start:end, b].copy()
        out[start:end, a] = beta * ra + (1.0 - beta) * rb
        out[start:end, b] = beta * rb + (1.0 - beta) * ra
    return returns.with_values(out)


def apply_shocks(returns, cfg, seed):
    """Add random shock segments to randomly chosen assets.

    The shock count is uniform in [1, max_shocks]; each shock picks a distinct
    asset, a start time, a duration in [1, floor(T * max_duration_fraction)]
    and an amplitude alpha in [0, 1), then adds
    alpha * uniform(-r_max, r_max) to each point of the segment, where r_max
    is the asset's pre-shock maximum return.
    """
    t_len, n = returns.values.shape
    if t_len < 10:
        raise InsufficientDataError(f"shocks need a trace of length >= 10, got {t_len}")
    rng = np.random.default_rng(seed & U64_MASK if isinstance(seed, int) else seed)
    num_shocks = int(rng.integers(1, cfg.max_shocks, endpoint=True))
    num_shocks = min(num_shocks, n)
    assets = rng.choice(n, size=num_shocks, replace=False)
    max_duration = max(1, int(math.floor(t_len * cfg.max_duration_fraction)))
    original = returns.values
    out = original.copy()
    for asset in assets:
        start = int(rng.integers(0, t_len))
        duration = int(rng.integers(1, max_duration, endpoint=True))
        amplitude = float(rng.uniform(0.0, 1.0))
        r_max = float(np.max(original[:, asset]))
        stop = min(start + duration, t_len - 1)  # segment is inclusive of i+d
        bumps = amplitude * rng.uniform(-r_max, r_max, size=stop - start + 1)
        out[start : stop + 1, asset] += bumps
    return returns.with_values(out)


def draw_mixing_pairs(num_assets, length, shock_cfg, seed):
    """Draw disjoint asset pairs and one random interval per pair.

    Interval lengths are uniform in [T/20, T/5]; disjoint pairs guarantee the
    no-overlap precondition of apply_correlation_mixing.
    """
    rng = np.random.default_rng(seed & U64_MASK)
    k = min(shock_cfg.num_mixed_pairs, num_assets // 2)
    if k == 0:
        return []
    chosen = rng.choice(num_assets, size=2 * k, replace=False)
    lo = max(1, length // 20)
    hi = max(lo, length // 5)
    pairs = []
    for j in range(k):
        span = int(rng.integers(lo, hi, endpoint=True))
        start = int(rng.integers(0, length - span, endpoint=True))
        pairs.append((int(chosen[2 * j]), int(chosen[2 * j + 1]), (start, start + span)))
    return pairs


def gen_arfima_with_shocks(cfg, shock_cfg, length, seed):
    """ARFIMA pairs, then interval correlation mixing, then random shocks."""
    trace = gen_arfima(cfg, length, seed)
    pairs = draw_mixing_pairs(trace.num_assets, length, shock_cfg, derive_seed(seed, _MIXING_TAG))
    if pairs:
        trace = apply_correlation_mixing(trace, pairs, shock_cfg.mixing_beta)
    return apply_shocks(trace, shock_cfg, derive_seed(seed, _SHOCKS_TAG))
