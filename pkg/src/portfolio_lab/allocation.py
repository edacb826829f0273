"""Allocation schemes: IVP, HRP, CLA and the network-modularity allocator.

Every scheme returns a long-only Weights vector summing to 1. HRP and NetMod
are built from small exposed stages (distance, linkage, seriation, bisection;
threshold graph, Louvain, equal split) so the pipeline and diagnostics can
reuse them.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateAssetError,
    InfeasibleReturnError,
    SingularMatrixError,
    UndefinedMetricError,
)
from .types import METRIC_KINDS, PEARSON, SCHEME_KINDS, VARIANCE_FLOOR


@dataclass(frozen=True)
class Weights:
    """Length-N allocation vector produced by a scheme/metric combination."""

    values: np.ndarray
    scheme_kind: str
    metric_kind: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.scheme_kind not in SCHEME_KINDS:
            raise ConfigurationError(f"unknown scheme kind {self.scheme_kind!r}")
        if self.metric_kind not in METRIC_KINDS:
            raise ConfigurationError(f"unknown metric kind {self.metric_kind!r}")
        if v.ndim != 1:
            raise ConfigurationError("weights must be a 1-D vector")
        if abs(float(v.sum()) - 1.0) > 1e-9:
            raise ConfigurationError(f"weights must sum to 1, got {v.sum()!r}")
        if np.any(v < -1e-9) or np.any(v > 1.0 + 1e-9):
            raise ConfigurationError("weights must lie in [0, 1]")


def ivp_weights(volatilities, metric_kind=PEARSON):
    """Inverse-volatility weights w_i = (1/sigma_i) / sum_k (1/sigma_k)."""
    sigma = np.asarray(volatilities, dtype=float)
    bad = np.flatnonzero(sigma * sigma <= VARIANCE_FLOOR)
    if bad.size:
        raise DegenerateAssetError(f"asset {bad[0]} has (near-)zero volatility")
    inv = 1.0 / sigma
    return Weights(inv / inv.sum(), "ivp", metric_kind)


# ---------------------------------------------------------------------------
# Hierarchical risk parity
# ---------------------------------------------------------------------------


def hrp_distance(corr):
    """Correlation distance d_ij = sqrt((1 - rho_ij) / 2), in [0, 1]."""
    rho = corr.values if hasattr(corr, "values") else np.asarray(corr, float)
    d = np.sqrt(np.clip((1.0 - rho) / 2.0, 0.0, None))
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d


def single_linkage(dist):
    """Agglomerative single-linkage clustering of a distance matrix.

    Returns n-1 merge records (left_id, right_id, distance, size) with leaf
    ids 0..n-1 and cluster ids n, n+1, ... in merge order. Ties are broken by
    the lexicographically smallest pair of minimum original leaf indices, and
    the left child is the one containing the smaller leaf index.
    """
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n or n < 2:
        raise ConfigurationError("distance matrix must be square with n >= 2")
    total = 2 * n - 1
    work = np.full((total, total), np.inf)
    work[:n, :n] = (d + d.T) / 2.0
    np.fill_diagonal(work, np.inf)
    min_leaf = np.arange(total)
    sizes = np.ones(total, dtype=int)
    merges = []
    for step in range(n - 1):
        best = np.min(work)
        cand = np.argwhere(work == best)
        pair = min(
            ((a, b) for a, b in cand if a < b),
            key=lambda ab: (min_leaf[ab[0]], min_leaf[ab[1]])
            if min_leaf[ab[0]] < min_leaf[ab[1]]
            else (min_leaf[ab[1]], min_leaf[ab[0]]),
        )
        a, b = int(pair[0]), int(pair[1])
        left, right = (a, b) if min_leaf[a] < min_leaf[b] else (b, a)
        new = n + step
        merges.append((left, right, float(best), int(sizes[a] + sizes[b])))
        # single-linkage update: distance to the merged cluster is the minimum
        merged_row = np.minimum(work[a], work[b])
        work[new, :] = merged_row
        work[:, new] = merged_row
        work[new, new] = np.inf
        for gone in (a, b):
            work[gone, :] = np.inf
            work[:, gone] = np.inf
        min_leaf[new] = min(min_leaf[a], min_leaf[b])
        sizes[new] = sizes[a] + sizes[b]
    return merges


def quasi_diagonalize(tree):
    """Leaf ordering from a linkage tree: expand each merge left child first."""
    n = len(tree) + 1
    order = []
    stack = [n + len(tree) - 1]
    while stack:
        node = stack.pop()
        if node < n:
            order.append(int(node))
        else:
            left, right, _, _ = tree[node - n]
            stack.append(right)  # popped after left
            stack.append(left)
    return order


def _cluster_variance(cov, idx):
    sub = cov[np.ix_(idx, idx)]
    diag = np.diag(sub)
    if np.any(diag <= VARIANCE_FLOOR):
        raise DegenerateAssetError(f"asset {idx[int(np.argmin(diag))]} has zero variance")
    w = 1.0 / diag
    w = w / w.sum()
    return float(w @ sub @ w)


def recursive_bisection(cov, order):
    """Split weights down the seriated list, scaling halves by inverse cluster
    variance; within a cluster the variance uses inverse-variance weights.

    Odd clusters split as ceil(k/2) | floor(k/2).
    """
    values = cov.values if hasattr(cov, "values") else np.asarray(cov, float)
    n = values.shape[0]
    if sorted(order) != list(range(n)):
        raise ConfigurationError("order must be a permutation of 0..N-1")
    weights = np.ones(n)
    stack = [list(order)]
    while stack:
        items = stack.pop()
        if len(items) < 2:
            continue
        half = (len(items) + 1) // 2
        left, right = items[:half], items[half:]
        var_left = _cluster_variance(values, left)
        var_right = _cluster_variance(values, right)
        total = var_left + var_right
        if total <= 0.0:
            raise DegenerateAssetError("zero total cluster variance in bisection")
        scale_left = 1.0 - var_left / total
        weights[left] *= scale_left
        weights[right] *= 1.0 - scale_left
        stack.append(right)
        stack.append(left)
    return weights


def hrp_weights(cov, corr):
    """Hierarchical risk parity: distance -> single linkage -> seriation ->
    recursive bisection."""
    dist = hrp_distance(corr)
    tree = single_linkage(dist)
    order = quasi_diagonalize(tree)
    weights = recursive_bisection(cov, order)
    return Weights(weights, "hrp", corr.metric_kind)


# ---------------------------------------------------------------------------
# Critical line algorithm
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClaConfig:
    """Box constraints and optional target return for the critical-line solver."""

    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    target_return: float = None

    def __post_init__(self):
        lo = np.asarray(self.lower_bounds, dtype=float)
        hi = np.asarray(self.upper_bounds, dtype=float)
        object.__setattr__(self, "lower_bounds", lo)
        object.__setattr__(self, "upper_bounds", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigurationError("bounds must be 1-D vectors of equal length")
        if np.any(lo < 0.0) or np.any(hi > 1.0) or np.any(lo > hi):
            raise ConfigurationError("bounds must satisfy 0 <= lower <= upper <= 1")
        if lo.sum() > 1.0 + 1e-12 or hi.sum() < 1.0 - 1e-12:
            raise ConfigurationError("bounds must admit a full-investment portfolio")

    @classmethod
    def uniform(cls, n, lower=0.0, upper=1.0, target_return=None):
        return cls(np.full(n, lower), np.full(n, upper), target_return)


def _cla_lambda(cov, mean, w, free, pos, bound):
    """Risk-tolerance value at which free-asset ``pos`` reaches ``bound``.

    ``bound`` is either a (lower, upper) pair (the side is decided by the
    sign of the sensitivity) or the pinned value of an asset being freed.
    """
    f = np.asarray(free)
    mask = np.ones(mean.size, dtype=bool)
    mask[f] = False
    bnd = np.flatnonzero(mask)
    cov_f = cov[np.ix_(f, f)]
    try:
        inv = np.linalg.inv(cov_f)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("singular covariance submatrix in CLA") from exc
    ones = np.ones(f.size)
    c1 = float(ones @ inv @ ones)
    c2 = inv @ mean[f]
    c3 = float(ones @ inv @ mean[f])
    c4 = inv @ ones
    ci = -c1 * c2[pos] + c3 * c4[pos]
    if ci == 0.0:
        return None, None
    if isinstance(bound, tuple):
        value = bound[1] if ci > 0 else bound[0]
    else:
        value = bound
    if bnd.size == 0:
        lam = (c4[pos] - c1 * value) / ci
    else:
        w_b = w[bnd]
        l1 = float(w_b.sum())
        l3 = inv @ cov[np.ix_(f, bnd)] @ w_b
        l2 = float(ones @ l3)
        lam = ((1.0 - l1 + l2) * c4[pos] - c1 * (value + l3[pos])) / ci
    if not np.isfinite(lam):
        return None, None
    return float(lam), value


def _cla_solve_free(cov, mean, w, free, lam):
    """Weights of the free assets at risk tolerance ``lam`` (KKT solve)."""
    f = np.asarray(free)
    mask = np.ones(mean.size, dtype=bool)
    mask[f] = False
    bnd = np.flatnonzero(mask)
    cov_f = cov[np.ix_(f, f)]
    try:
        inv = np.linalg.inv(cov_f)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("singular covariance submatrix in CLA") from exc
    ones = np.ones(f.size)
    g1 = float(ones @ inv @ mean[f])
    g2 = float(ones @ inv @ ones)
    if bnd.size == 0:
        gamma = -lam * g1 / g2 + 1.0 / g2
        pinned = 0.0
    else:
        w_b = w[bnd]
        w1 = inv @ cov[np.ix_(f, bnd)] @ w_b
        gamma = -lam * g1 / g2 + (1.0 - float(w_b.sum()) + float(ones @ w1)) / g2
        pinned = w1
    return -pinned + gamma * (inv @ ones) + lam * (inv @ mean[f])


def cla_turning_points(cov, expected_returns, lower_bounds, upper_bounds):
    """Trace the efficient frontier's turning points under box constraints.

    Starts from the maximum-return corner portfolio and walks the critical
    line with decreasing risk tolerance, freeing or pinning one asset per
    step, ending at the minimum-variance portfolio (lambda = 0). Returns a
    list of (lam, weights); the first entry is the corner with lam = inf.
    """
    sigma = np.asarray(cov, dtype=float)
    mean = np.asarray(expected_returns, dtype=float).copy()
    lo = np.asarray(lower_bounds, dtype=float)
    hi = np.asarray(upper_bounds, dtype=float)
    n = mean.size
    # Tied expected returns make turning points coincide and stall the walk;
    # an index-scaled nudge keeps the path well-defined without moving any
    # portfolio by more than ~1e-9.
    scale = max(1.0, float(np.max(np.abs(mean))))
    mean = mean + np.arange(n) * (1e-9 * scale)

    order = np.lexsort((np.arange(n), mean))  # ascending return, ties by index
    w = lo.copy()
    ptr = n
    while w.sum() < 1.0 - 1e-12 and ptr > 0:
        ptr -= 1
        w[order[ptr]] = hi[order[ptr]]
    w[order[ptr]] += 1.0 - w.sum()
    free = [int(order[ptr])]

    points = [(math.inf, w.copy())]
    last_lambda = None
    for _ in range(10 * n + 10):
        lam_in = i_in = val_in = None
        if len(free) > 1:
            for pos, i in enumerate(free):
                lam, val = _cla_lambda(sigma, mean, w, free, pos, (lo[i], hi[i]))
                if lam is not None and (lam_in is None or lam > lam_in):
                    lam_in, i_in, val_in = lam, i, val
        lam_out = i_out = None
        for i in range(n):
            if i in free:
                continue
            trial = free + [i]
            lam, _ = _cla_lambda(sigma, mean, w, trial, len(trial) - 1, float(w[i]))
            if lam is None:
                continue
            if (last_lambda is None or lam < last_lambda) and (
                lam_out is None or lam > lam_out
            ):
                lam_out, i_out = lam, i
        if (lam_in is None or lam_in < 0) and (lam_out is None or lam_out < 0):
            # no event left above lambda = 0: finish at minimum variance
            last_lambda = 0.0
            w_free = _cla_solve_free(sigma, np.zeros(n), w, free, 0.0)
            for pos, i in enumerate(free):
                w[i] = w_free[pos]
            points.append((0.0, w.copy()))
            return points
        if lam_out is None or (lam_in is not None and lam_in > lam_out):
            last_lambda = lam_in
            free.remove(i_in)
            w[i_in] = val_in
        else:
            last_lambda = lam_out
            free.append(i_out)
        w_free = _cla_solve_free(sigma, mean, w, free, last_lambda)
        for pos, i in enumerate(free):
            w[i] = w_free[pos]
        points.append((last_lambda, w.copy()))
    raise SingularMatrixError("critical-line walk failed to terminate")


def cla_weights(cov, expected_returns, cfg):
    """Constrained mean-variance portfolio via the critical line algorithm.

    Without a target return, the minimum-variance turning point is returned;
    with one, the frontier portfolio at that return is obtained by linear
    interpolation between the adjacent turning points.
    """
    sigma = cov.values if hasattr(cov, "values") else np.asarray(cov, float)
    mean = np.asarray(expected_returns, dtype=float)
    n = sigma.shape[0]
    if mean.size != n or cfg.lower_bounds.size != n:
        raise ConfigurationError("covariance, returns and bounds sizes must agree")
    points = cla_turning_points(sigma, mean, cfg.lower_bounds, cfg.upper_bounds)
    # drop points with material bound violations (numerical artifacts)
    kept = [
        (lam, w)
        for lam, w in points
        if np.all(w >= cfg.lower_bounds - 1e-9) and np.all(w <= cfg.upper_bounds + 1e-9)
    ]
    if not kept:
        raise SingularMatrixError("no feasible turning points found")
    if cfg.target_return is None:
        variances = [float(w @ sigma @ w) for _, w in kept]
        w = kept[int(np.argmin(variances))][1]
        return Weights(np.clip(w, 0.0, 1.0) / np.sum(np.clip(w, 0.0, 1.0)), "cla", PEARSON)
    target = float(cfg.target_return)
    rets = [float(mean @ w) for _, w in kept]
    top = max(rets)
    bottom = rets[-1]  # the minimum-variance end of the frontier
    if target > top + 1e-9 or target < bottom - 1e-9:
        raise InfeasibleReturnError(
            f"target return {target} outside achievable range [{bottom}, {top}]"
        )
    for k in range(len(kept) - 1):
        r_hi, r_lo = rets[k], rets[k + 1]
        if min(r_lo, r_hi) - 1e-12 <= target <= max(r_lo, r_hi) + 1e-12:
            span = r_hi - r_lo
            frac = 0.5 if span == 0.0 else (target - r_lo) / span
            frac = min(max(frac, 0.0), 1.0)
            w = frac * kept[k][1] + (1.0 - frac) * kept[k + 1][1]
            return Weights(np.clip(w, 0.0, 1.0) / np.sum(np.clip(w, 0.0, 1.0)), "cla", PEARSON)
    raise InfeasibleReturnError(f"target return {target} not bracketed by turning points")


# ---------------------------------------------------------------------------
# Network-modularity allocation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssetGraph:
    """Threshold graph over assets: A_ij = rho_ij where rho_ij > threshold."""

    adjacency: np.ndarray
    threshold: float

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        object.__setattr__(self, "adjacency", a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigurationError("adjacency must be square")
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
            raise ConfigurationError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0.0):
            raise ConfigurationError("adjacency must have no self-loops")

    @property
    def num_nodes(self):
        return self.adjacency.shape[0]

    def total_weight(self):
        return float(self.adjacency.sum()) / 2.0

    def edges(self):
        """Upper-triangle edge list as (i, j, weight) tuples."""
        idx = np.argwhere(np.triu(self.adjacency, 1) > 0.0)
        return [(int(i), int(j), float(self.adjacency[i, j])) for i, j in idx]


@dataclass(frozen=True)
class Partition:
    """Assignment of assets to communities with contiguous ids from 0."""

    community_of: tuple
    communities: tuple

    @classmethod
    def from_assignment(cls, assignment):
        assignment = list(assignment)
        relabel = {}
        for c in assignment:
            if c not in relabel:
                relabel[c] = len(relabel)
        ids = tuple(relabel[c] for c in assignment)
        groups = [[] for _ in range(len(relabel))]
        for node, c in enumerate(ids):
            groups[c].append(node)
        return cls(ids, tuple(tuple(g) for g in groups))

    @property
    def num_communities(self):
        return len(self.communities)


def build_threshold_graph(corr, alpha):
    """Link assets whose correlation strictly exceeds alpha; weight = rho."""
    rho = corr.values if hasattr(corr, "values") else np.asarray(corr, float)
    rho = (rho + rho.T) / 2.0
    adjacency = np.where(rho > alpha, rho, 0.0)
    np.fill_diagonal(adjacency, 0.0)
    return AssetGraph(adjacency, float(alpha))


def modularity(graph, partition):
    """Q = (1/2m) sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j), ordered pairs."""
    adj = graph.adjacency
    degrees = adj.sum(axis=1)
    two_m = float(degrees.sum())
    if two_m <= 0.0:
        raise UndefinedMetricError("modularity undefined for an empty graph")
    q = 0.0
    for comm in partition.communities:
        idx = list(comm)
        internal = float(adj[np.ix_(idx, idx)].sum())
        total = float(degrees[idx].sum())
        q += internal / two_m - (total / two_m) ** 2
    return q


# Minimum modularity gain for a Louvain move or level to count as progress.
_LOUVAIN_GAIN_TOL = 1e-9


def _louvain_one_level(adj, rng):
    """One local-move phase; returns (community assignment, moved flag).

    Nodes are visited in an order shuffled by ``rng``; a node moves to the
    neighboring community with the largest positive modularity gain (ties
    keep the current community, then prefer the lowest community id).
    """
    n = adj.shape[0]
    degrees = adj.sum(axis=1)
    two_m = float(degrees.sum())
    comm = np.arange(n)
    tot = degrees.copy()
    moved_any = False
    moving = True
    while moving:
        moving = False
        for i in rng.permutation(n):
            i = int(i)
            home = int(comm[i])
            row = adj[i]
            neighbors = np.flatnonzero(row)
            links = {}
            for j in neighbors:
                if j != i:
                    c = int(comm[j])
                    links[c] = links.get(c, 0.0) + float(row[j])
            tot[home] -= degrees[i]
            gain_stay = links.get(home, 0.0) - tot[home] * degrees[i] / two_m
            best_c, best_gain = home, gain_stay
            for c in sorted(links):
                if c == home:
                    continue
                gain = links[c] - tot[c] * degrees[i] / two_m
                if gain > best_gain:
                    best_c, best_gain = c, gain
            if best_c != home and (2.0 / two_m) * (best_gain - gain_stay) > _LOUVAIN_GAIN_TOL:
                comm[i] = best_c
                tot[best_c] += degrees[i]
                moving = True
                moved_any = True
            else:
                comm[i] = home
                tot[home] += degrees[i]
    return comm, moved_any


def louvain_communities(graph, seed=0):
    """Seeded Louvain community detection on a weighted asset graph.

    Local moves and community aggregation alternate until no modularity gain
    remains. Isolated nodes stay singleton communities. Identical seeds give
    identical partitions.
    """
    n = graph.num_nodes
    adj = graph.adjacency
    if float(adj.sum()) <= 0.0:
        return Partition.from_assignment(range(n))
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    mapping = np.arange(n)
    level_adj = adj.copy()
    while True:
        comm, moved = _louvain_one_level(level_adj, rng)
        ids = {}
        for c in comm:
            ids.setdefault(int(c), len(ids))
        comm = np.array([ids[int(c)] for c in comm])
        mapping = comm[mapping]
        size = len(ids)
        if not moved or size == level_adj.shape[0]:
            break
        onehot = np.zeros((level_adj.shape[0], size))
        onehot[np.arange(level_adj.shape[0]), comm] = 1.0
        level_adj = onehot.T @ level_adj @ onehot  # self-loops keep intra weight
    return Partition.from_assignment(mapping)


def weights_from_partition(partition, metric_kind=PEARSON):
    """Equal split across communities, then across members within each."""
    n = len(partition.community_of)
    k = partition.num_communities
    w = np.empty(n)
    for comm in partition.communities:
        share = 1.0 / (k * len(comm))
        for node in comm:
            w[node] = share
    return Weights(w, "netmod", metric_kind)


def netmod_weights(corr, alpha, seed=0):
    """Threshold graph -> Louvain communities -> equal community split."""
    graph = build_threshold_graph(corr, alpha)
    partition = louvain_communities(graph, seed)
    return weights_from_partition(partition, corr.metric_kind)
