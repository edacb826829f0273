"""Portfolio allocation laboratory: synthetic trace generation, correlation
metrics (Pearson/DCCA/DPCCA), four allocation schemes and a rolling-rebalance
Monte-Carlo harness with a backtest path."""

from .allocation import (
    AssetGraph,
    ClaConfig,
    Partition,
    Weights,
    build_threshold_graph,
    cla_turning_points,
    cla_weights,
    hrp_distance,
    hrp_weights,
    ivp_weights,
    louvain_communities,
    modularity,
    netmod_weights,
    quasi_diagonalize,
    recursive_bisection,
    single_linkage,
    weights_from_partition,
)
from .correlation import (
    CorrelationMatrix,
    CovarianceMatrix,
    covariance,
    dcca_matrix,
    dcca_pair,
    dpcca_matrix,
    pearson_corr,
)
from .data_io import (
    PriceTable,
    load_prices_csv,
    prices_to_returns,
    run_backtest,
    trace_to_prices,
)
from .errors import (
    ConfigurationError,
    DateOrderError,
    DegenerateAssetError,
    InfeasibleReturnError,
    InsufficientDataError,
    PortfolioLabError,
    PriceDomainError,
    PriceParseError,
    PriceTableError,
    SingularMatrixError,
    UndefinedMetricError,
    UnknownNameError,
)
from .harness import (
    CorpusReport,
    RunReport,
    ScenarioConfig,
    divide_intervals,
    run_corpus,
    run_on_returns,
    run_single,
)
from .metrics import (
    MetricRecord,
    compound_log_return,
    cvar_historical,
    diversification_ratio,
    improvement,
    nhhi,
    portfolio_variance,
    risk_contribution,
    sharpe_ratio,
    var_historical,
)
from .trace_gen import (
    ArfimaConfig,
    GaussianConfig,
    GarchConfig,
    GbmConfig,
    ShockConfig,
    apply_correlation_mixing,
    apply_shocks,
    arfima_kernel,
    gen_arfima,
    gen_arfima_with_shocks,
    gen_garch,
    gen_gaussian,
    gen_gbm,
    run_seed,
)
from .types import DCCA, DPCCA, PEARSON, ReturnMatrix

__version__ = "0.1.0"
