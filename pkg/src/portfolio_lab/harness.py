"""Monte-Carlo engine: rolling-rebalance runs over generated or ingested traces.

A run generates (or receives) a T x N return matrix, recomputes weights at
every rebalance time from past observations only, earns them out-of-sample on
the following window, and aggregates the evaluation metrics. A corpus repeats
this over independently seeded runs and aggregates across runs. Workers only
parallelize whole runs, and the reduction is keyed by run index, so results
are identical for any worker count.
"""

import concurrent.futures
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .allocation import (
    ClaConfig,
    Weights,
    build_threshold_graph,
    cla_weights,
    hrp_weights,
    ivp_weights,
    louvain_communities,
    weights_from_partition,
)
from .correlation import covariance, dcca_matrix, dpcca_matrix, pearson_corr
from .errors import ConfigurationError, InsufficientDataError, PortfolioLabError
from .metrics import (
    MetricRecord,
    compound_log_return,
    cvar_historical,
    diversification_ratio,
    nhhi,
    portfolio_variance,
    risk_contribution,
    sharpe_ratio,
    var_historical,
)
from .trace_gen import (
    GENERATOR_KINDS,
    derive_seed,
    gen_arfima,
    gen_arfima_with_shocks,
    gen_gaussian,
    gen_garch,
    gen_gbm,
    run_seed,
)
from .types import DCCA, DPCCA, METRIC_KINDS, PEARSON, SCHEME_KINDS

LOOKBACK_POLICIES = ("delta_t", "full_history")

# Offset added to the window index when deriving per-window Louvain seeds,
# keeping them clear of the generator's internal sub-stream tags.
_LOUVAIN_TAG_BASE = 1000


class RebalanceWindow(NamedTuple):
    alloc_time: int
    start: int
    end: int


def divide_intervals(length, delta_t):
    """Rebalance times k * delta_t and their evaluation windows.

    Windows cover [delta_t, length) without overlap; the final partial window
    is included. Requires length >= 2 * delta_t.
    """
    if delta_t < 2:
        raise ConfigurationError(f"delta_t must be >= 2, got {delta_t}")
    if length < 2 * delta_t:
        raise InsufficientDataError(
            f"trace length {length} is shorter than 2 * delta_t = {2 * delta_t}"
        )
    windows = []
    k_max = (length - 1) // delta_t
    for k in range(1, k_max + 1):
        t = k * delta_t
        windows.append(RebalanceWindow(t, t, min(t + delta_t, length)))
    return windows


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulation corpus."""

    num_iters: int
    sim_length: int
    delta_t: int
    num_assets: int
    scheme: str
    metric: str
    generator_kind: str = "gaussian"
    generator_config: object = None
    shock_config: object = None
    box_length: int = 60
    netmod_alpha: float = 0.3
    cla: ClaConfig = None
    master_seed: int = 0
    var_alpha: float = 0.05
    risk_free_rate: float = 0.0
    pearson_lookback: str = "delta_t"
    detrended_lookback: str = "full_history"
    dpcca_ridge: bool = False

    def __post_init__(self):
        if self.num_iters < 1:
            raise ConfigurationError("num_iters: must be >= 1")
        if self.delta_t < 2:
            raise ConfigurationError("delta_t: must be >= 2")
        if self.sim_length < 2 * self.delta_t:
            raise ConfigurationError("sim_length: must be >= 2 * delta_t")
        if self.num_assets < 2:
            raise ConfigurationError("num_assets: must be >= 2")
        if self.scheme not in SCHEME_KINDS:
            raise ConfigurationError(f"scheme: unknown scheme {self.scheme!r}")
        if self.metric not in METRIC_KINDS:
            raise ConfigurationError(f"metric: unknown metric {self.metric!r}")
        if self.scheme == "cla" and self.metric != PEARSON:
            raise ConfigurationError("scheme: cla only supports the pearson metric")
        if self.generator_kind is not None and self.generator_kind not in GENERATOR_KINDS:
            raise ConfigurationError(f"generator: unknown kind {self.generator_kind!r}")
        if self.box_length < 2:
            raise ConfigurationError("box_length: must be >= 2")
        if not 0.0 < self.var_alpha < 1.0:
            raise ConfigurationError("var_alpha: must be in (0, 1)")
        if self.pearson_lookback not in LOOKBACK_POLICIES:
            raise ConfigurationError(f"pearson_lookback: unknown policy {self.pearson_lookback!r}")
        if self.detrended_lookback not in LOOKBACK_POLICIES:
            raise ConfigurationError(
                f"detrended_lookback: unknown policy {self.detrended_lookback!r}"
            )
        if self.master_seed < 0:
            raise ConfigurationError("master_seed: must be a non-negative 64-bit integer")
        if self.cla is None:
            object.__setattr__(self, "cla", ClaConfig.uniform(self.num_assets))
        if (
            self.generator_config is not None
            and getattr(self.generator_config, "num_assets", self.num_assets) != self.num_assets
        ):
            raise ConfigurationError(
                "num_assets: generator columns "
                f"({self.generator_config.num_assets}) do not match num_assets "
                f"({self.num_assets})"
            )

    def replace(self, **changes):
        from dataclasses import replace as dc_replace

        return dc_replace(self, **changes)


@dataclass
class WindowRecord:
    """Per-rebalance-window results of one run."""

    index: int
    alloc_time: int
    start: int
    end: int
    weights: np.ndarray
    fallback: str = None
    pv: float = float("nan")
    dr: float = float("nan")
    nhhi: float = float("nan")
    rc: np.ndarray = None

    def to_dict(self):
        return {
            "index": self.index,
            "alloc_time": self.alloc_time,
            "start": self.start,
            "end": self.end,
            "weights": [float(x) for x in self.weights],
            "fallback": self.fallback,
            "pv": float(self.pv),
            "dr": float(self.dr),
            "nhhi": float(self.nhhi),
            "rc": [float(x) for x in self.rc],
        }


@dataclass
class RunReport:
    """Everything recorded about one simulated or backtested run."""

    scheme: str
    metric: str
    run_index: int
    run_seed: int
    asset_labels: tuple
    parent_of: dict
    windows: list
    portfolio_returns: np.ndarray
    record: MetricRecord
    mean_weights: np.ndarray
    warnings: list = field(default_factory=list)
    graph_dumps: list = None

    @property
    def fallbacks(self):
        return [(w.index, w.fallback) for w in self.windows if w.fallback]

    def to_dict(self, include_series=True):
        out = {
            "scheme": self.scheme,
            "metric": self.metric,
            "run_index": self.run_index,
            "run_seed": self.run_seed,
            "asset_labels": list(self.asset_labels),
            "parent_of": {str(k): int(v) for k, v in sorted(self.parent_of.items())},
            "windows": [w.to_dict() for w in self.windows],
            "record": self.record.to_dict(),
            "mean_weights": [float(x) for x in self.mean_weights],
            "warnings": list(self.warnings),
            "graph_dumps": self.graph_dumps,
        }
        if include_series:
            out["portfolio_returns"] = [float(x) for x in self.portfolio_returns]
        return out


def _allocate(cfg, values, window, window_index, base_seed):
    """Weights (and optional netmod graph dump) for one rebalance time.

    Uses only observations strictly before the allocation time. Covariance
    and Pearson correlation use the trailing ``delta_t`` observations by
    default; detrended metrics use all available history because the box
    length makes a delta_t-sized window infeasible.
    """
    t = window.alloc_time
    cov_lo = 0 if cfg.pearson_lookback == "full_history" else max(0, t - cfg.delta_t)
    lookback = values[cov_lo:t]
    cov = covariance(lookback, cov_lo, t)

    if cfg.metric == PEARSON:
        corr = lambda: pearson_corr(cov)  # noqa: E731 - built lazily per scheme
    else:
        det_lo = 0 if cfg.detrended_lookback == "full_history" else max(0, t - cfg.delta_t)
        det_rows = values[det_lo:t]
        if cfg.metric == DCCA:
            corr = lambda: dcca_matrix(det_rows, cfg.box_length)  # noqa: E731
        else:
            corr = lambda: dpcca_matrix(det_rows, cfg.box_length, cfg.dpcca_ridge)  # noqa: E731

    dump = None
    if cfg.scheme == "ivp":
        weights = ivp_weights(cov.volatilities(), cfg.metric)
    elif cfg.scheme == "hrp":
        weights = hrp_weights(cov, corr())
    elif cfg.scheme == "cla":
        expected = lookback.mean(axis=0)
        weights = cla_weights(cov, expected, cfg.cla)
    else:  # netmod
        graph = build_threshold_graph(corr(), cfg.netmod_alpha)
        seed = derive_seed(base_seed, _LOUVAIN_TAG_BASE + window_index)
        partition = louvain_communities(graph, seed)
        weights = weights_from_partition(partition, cfg.metric)
        dump = {
            "window": window_index,
            "alloc_time": t,
            "edges": [[i, j, w] for i, j, w in graph.edges()],
            "communities": [list(c) for c in partition.communities],
        }
    return weights, cov, dump


def run_on_returns(returns, cfg, base_seed, run_index=0):
    """Shared allocation/evaluation pipeline used by both simulation runs and
    backtests. ``base_seed`` feeds the per-window community-detection seeds."""
    returns.validate_for_analysis()
    values = returns.values
    n = returns.num_assets
    if n != cfg.num_assets:
        raise ConfigurationError(
            f"num_assets: trace has {n} assets, config expects {cfg.num_assets}"
        )
    windows = divide_intervals(values.shape[0], cfg.delta_t)

    records = []
    warnings = []
    graph_dumps = [] if cfg.scheme == "netmod" else None
    oos_parts = []
    prev_weights = None
    for widx, window in enumerate(windows):
        dump = None
        try:
            weights, _, dump = _allocate(cfg, values, window, widx, base_seed)
            fallback = None
        except PortfolioLabError as exc:
            if prev_weights is None:
                weights = Weights(np.full(n, 1.0 / n), cfg.scheme, cfg.metric)
                fallback = f"equal weights ({exc})"
            else:
                weights = prev_weights
                fallback = f"carried previous weights ({exc})"
        prev_weights = weights
        if graph_dumps is not None:
            graph_dumps.append(dump)

        w = weights.values
        oos = values[window.start : window.end] @ w
        oos_parts.append(oos)
        rec = WindowRecord(widx, window.alloc_time, window.start, window.end, w.copy(), fallback)
        rec.nhhi = nhhi(w)
        try:
            eval_cov = covariance(values[window.start : window.end], window.start, window.end)
            rec.pv = portfolio_variance(w, eval_cov.values)
            rec.dr = diversification_ratio(w, eval_cov.values)
            rec.rc = risk_contribution(w, eval_cov.values)
        except PortfolioLabError as exc:
            rec.rc = np.full(n, np.nan)
            warnings.append(f"window {widx}: risk metrics unavailable ({exc})")
        records.append(rec)

    series = np.concatenate(oos_parts)
    mean = float(np.mean(series))
    std = float(np.std(series, ddof=1))
    try:
        clr = compound_log_return(series)
    except PortfolioLabError as exc:
        clr = float("nan")
        warnings.append(f"compound log return unavailable ({exc})")
    try:
        sr = sharpe_ratio(series, cfg.risk_free_rate)
    except PortfolioLabError as exc:
        sr = float("nan")
        warnings.append(f"sharpe ratio unavailable ({exc})")
    var = var_historical(series, cfg.var_alpha)
    cvar = cvar_historical(series, cfg.var_alpha)

    record = MetricRecord(
        daily_return_mean=mean,
        daily_return_std=std,
        clr=clr,
        nhhi=float(np.nanmean([r.nhhi for r in records])),
        pv=float(np.nanmean([r.pv for r in records])),
        dr=float(np.nanmean([r.dr for r in records])),
        sr=sr,
        var=var,
        cvar=cvar,
        rc=list(np.nanmean(np.stack([r.rc for r in records]), axis=0)),
    )
    mean_weights = np.mean(np.stack([r.weights for r in records]), axis=0)
    return RunReport(
        scheme=cfg.scheme,
        metric=cfg.metric,
        run_index=run_index,
        run_seed=int(base_seed),
        asset_labels=returns.asset_labels,
        parent_of=dict(returns.parent_of),
        windows=records,
        portfolio_returns=series,
        record=record,
        mean_weights=mean_weights,
        warnings=warnings,
        graph_dumps=graph_dumps,
    )


def generate_trace(cfg, seed):
    """Dispatch to the configured generator with a run-level seed."""
    kind = cfg.generator_kind
    if kind is None or cfg.generator_config is None:
        raise ConfigurationError("generator: no generator configured for simulation")
    if kind == "gaussian":
        return gen_gaussian(cfg.generator_config, cfg.sim_length, seed)
    if kind == "gbm":
        return gen_gbm(cfg.generator_config, cfg.sim_length, seed)
    if kind == "garch":
        return gen_garch(cfg.generator_config, cfg.sim_length, seed)
    if kind == "arfima":
        return gen_arfima(cfg.generator_config, cfg.sim_length, seed)
    if kind == "arfima_shocks":
        if cfg.shock_config is None:
            raise ConfigurationError("shocks: arfima_shocks requires a shock section")
        return gen_arfima_with_shocks(
            cfg.generator_config, cfg.shock_config, cfg.sim_length, seed
        )
    raise ConfigurationError(f"generator: unknown kind {kind!r}")


def run_single(cfg, run_index):
    """One Monte-Carlo run: generate the trace with the run-derived seed and
    push it through the shared pipeline."""
    seed = run_seed(cfg.master_seed, run_index)
    trace = generate_trace(cfg, seed)
    return run_on_returns(trace, cfg, base_seed=seed, run_index=run_index)


@dataclass
class DistributionRow:
    rank: int
    asset: str
    mean: float
    std: float
    min: float
    max: float

    def to_dict(self):
        return {
            "rank": self.rank,
            "asset": self.asset,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
        }


@dataclass
class CorpusReport:
    """Aggregated results of num_iters independent runs of one method."""

    scheme: str
    metric: str
    num_iters: int
    master_seed: int
    runs: list
    excluded: list
    aggregate: MetricRecord
    across_run_std: dict
    weight_dist: list
    rc_dist: list

    @property
    def num_completed(self):
        return len(self.runs)

    def to_dict(self, include_series=True):
        return {
            "scheme": self.scheme,
            "metric": self.metric,
            "num_iters": self.num_iters,
            "master_seed": self.master_seed,
            "excluded": [[idx, msg] for idx, msg in self.excluded],
            "aggregate": self.aggregate.to_dict(),
            "across_run_std": dict(self.across_run_std),
            "weight_dist": [row.to_dict() for row in self.weight_dist],
            "rc_dist": [row.to_dict() for row in self.rc_dist],
            "runs": [r.to_dict(include_series=include_series) for r in self.runs],
        }


def _corpus_worker(cfg, run_index):
    try:
        return run_index, run_single(cfg, run_index), None
    except Exception as exc:  # failed runs are excluded, not fatal
        return run_index, None, f"{type(exc).__name__}: {exc}"


def _distribution(per_run_values, labels):
    """Across-run per-asset stats sorted by descending mean."""
    stacked = np.stack(per_run_values)  # runs x assets
    mean = np.nanmean(stacked, axis=0)
    std = np.nanstd(stacked, axis=0)
    lo = np.nanmin(stacked, axis=0)
    hi = np.nanmax(stacked, axis=0)
    order = np.argsort(-mean, kind="stable")
    return [
        DistributionRow(rank, labels[i], float(mean[i]), float(std[i]), float(lo[i]), float(hi[i]))
        for rank, i in enumerate(order)
    ]


def run_corpus(cfg, workers=1, progress=None):
    """Execute num_iters independent runs and aggregate across them.

    The per-run seed is master_seed XOR run_index; failed runs are recorded
    and excluded from the aggregates. The result is independent of the worker
    count and of completion order.
    """
    outcomes = {}
    if workers <= 1:
        for idx in range(cfg.num_iters):
            outcomes[idx] = _corpus_worker(cfg, idx)
            if progress:
                progress(len(outcomes), cfg.num_iters)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_corpus_worker, cfg, idx) for idx in range(cfg.num_iters)]
            for fut in concurrent.futures.as_completed(futures):
                idx, report, error = fut.result()
                outcomes[idx] = (idx, report, error)
                if progress:
                    progress(len(outcomes), cfg.num_iters)

    runs = []
    excluded = []
    for idx in range(cfg.num_iters):
        _, report, error = outcomes[idx]
        if error is not None:
            excluded.append((idx, error))
        else:
            runs.append(report)
    if not runs:
        raise PortfolioLabError(
            f"all {cfg.num_iters} runs failed; first error: {excluded[0][1]}"
        )
    return aggregate_runs(
        cfg.scheme, cfg.metric, cfg.num_iters, cfg.master_seed, runs, excluded
    )


def aggregate_runs(scheme, metric, num_iters, master_seed, runs, excluded=()):
    """Cross-run aggregation shared by run_corpus and single-run backtests."""
    scalars = {}
    for name in ("daily_return_mean", "daily_return_std", "clr", "nhhi", "pv", "dr", "sr", "var", "cvar"):
        scalars[name] = np.array([getattr(r.record, name) for r in runs], dtype=float)
    aggregate = MetricRecord(
        daily_return_mean=float(np.mean(scalars["daily_return_mean"])),
        # the table's +/- column: mean across runs of the within-run daily std
        daily_return_std=float(np.mean(scalars["daily_return_std"])),
        clr=float(np.mean(scalars["clr"])),
        nhhi=float(np.mean(scalars["nhhi"])),
        pv=float(np.mean(scalars["pv"])),
        dr=float(np.mean(scalars["dr"])),
        sr=float(np.mean(scalars["sr"])),
        var=float(np.mean(scalars["var"])),
        cvar=float(np.mean(scalars["cvar"])),
        rc=list(np.mean(np.stack([r.record.rc for r in runs]), axis=0)),
    )
    across_run_std = {name: float(np.std(vals)) for name, vals in scalars.items()}
    labels = runs[0].asset_labels
    weight_dist = _distribution([r.mean_weights for r in runs], labels)
    rc_dist = _distribution([np.asarray(r.record.rc) for r in runs], labels)
    return CorpusReport(
        scheme=scheme,
        metric=metric,
        num_iters=num_iters,
        master_seed=master_seed,
        runs=runs,
        excluded=list(excluded),
        aggregate=aggregate,
        across_run_std=across_run_std,
        weight_dist=weight_dist,
        rc_dist=rc_dist,
    )
