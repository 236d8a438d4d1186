"""Thresholded correlation networks, bootstrap construction, and Jaccard
similarity curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import DegenerateSeriesError, correlation_values

__all__ = ["CorrelationNetwork", "bootstrap_network", "plain_network",
           "jaccard", "jaccard_curve"]


@dataclass(frozen=True)
class CorrelationNetwork:
    """Boolean adjacency with the construction settings that produced it."""

    adjacency: np.ndarray
    percentile: float
    window_length: int
    bootstrap_count: int

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(adj != adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj)):
            raise ValueError("adjacency diagonal must be zero")
        object.__setattr__(self, "adjacency", adj)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2


def _network_from_tril(values: np.ndarray, threshold_values: np.ndarray, n: int,
                       percentile: float, window_length: int,
                       bootstrap_count: int) -> CorrelationNetwork:
    threshold = np.percentile(threshold_values, percentile)
    adj = np.zeros((n, n), dtype=bool)
    rows, cols = np.tril_indices(n, k=-1)
    keep = values >= threshold
    adj[rows[keep], cols[keep]] = True
    adj |= adj.T
    return CorrelationNetwork(adj, percentile, window_length, bootstrap_count)


def plain_network(window: np.ndarray, percentile: float) -> CorrelationNetwork:
    """Deterministic network: edges where the window correlation reaches the
    window's own percentile threshold."""
    window = np.asarray(window, dtype=np.float64)
    values = correlation_values(window)
    return _network_from_tril(values, values, window.shape[0], percentile,
                              window.shape[1], 0)


def bootstrap_network(window: np.ndarray, percentile: float,
                      bootstrap_count: int = 100,
                      rng: np.random.Generator | int | None = None) -> CorrelationNetwork:
    """Median-of-bootstraps network construction.

    Time indices are resampled with replacement ``bootstrap_count`` times;
    an edge is present when the median bootstrap correlation reaches the
    percentile threshold of the window's correlation values. Degenerate
    resamples are skipped and retried up to 3x the bootstrap count.
    """
    if bootstrap_count < 1:
        raise ValueError("bootstrap count must be >= 1")
    window = np.asarray(window, dtype=np.float64)
    n, t = window.shape
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    base_values = correlation_values(window)
    samples = []
    attempts = 0
    while len(samples) < bootstrap_count and attempts < 3 * bootstrap_count:
        attempts += 1
        idx = rng.integers(t, size=t)
        try:
            samples.append(correlation_values(window[:, idx]))
        except DegenerateSeriesError:
            continue
    if len(samples) < bootstrap_count:
        raise DegenerateSeriesError("too many degenerate bootstrap resamples")
    median = np.median(np.vstack(samples), axis=0)
    return _network_from_tril(median, base_values, n, percentile, t, bootstrap_count)


def jaccard(a: CorrelationNetwork, b: CorrelationNetwork) -> float:
    """Edge-set intersection over union; two empty graphs count as 1."""
    if a.n_nodes != b.n_nodes:
        raise ValueError("networks must have the same node count")
    ea, eb = a.adjacency, b.adjacency
    union = np.logical_or(ea, eb).sum() // 2
    if union == 0:
        return 1.0
    inter = np.logical_and(ea, eb).sum() // 2
    return float(inter / union)


def _batch_median_network(batch: np.ndarray, percentile: float) -> CorrelationNetwork:
    """Network from a batch of generated windows: the per-pair median of
    per-path correlations plays the role of the window statistic."""
    values = np.vstack([correlation_values(path) for path in batch])
    median = np.median(values, axis=0)
    return _network_from_tril(median, median, batch.shape[1], percentile,
                              batch.shape[2], 0)


def jaccard_curve(returns: np.ndarray, sampler, percentiles,
                  window_length: int = 40, batch: int = 32, stride: int = 1,
                  seed: int = 0) -> dict:
    """Mean Jaccard of (past vs future) and (generated vs future) networks.

    For each evaluation day the past window, the future window, and a
    generated batch conditioned on the past are turned into thresholded
    correlation networks and compared against the future network. Days with
    a degenerate window are skipped and counted.
    """
    returns = np.asarray(returns, dtype=np.float64)
    t_total = returns.shape[0]
    percentiles = list(percentiles)
    if t_total < 2 * window_length:
        raise ValueError("panel too short for past and future windows")
    past_sums = np.zeros(len(percentiles))
    gen_sums = np.zeros(len(percentiles))
    count = 0
    skipped = 0
    for t in range(window_length, t_total - window_length + 1, stride):
        past = returns[t - window_length:t].T
        future = returns[t:t + window_length].T
        generated = sampler.sample(past, t - window_length, batch, seed + t)
        try:
            for k, pct in enumerate(percentiles):
                fut_net = plain_network(future, pct)
                past_sums[k] += jaccard(plain_network(past, pct), fut_net)
                gen_sums[k] += jaccard(_batch_median_network(generated, pct), fut_net)
        except DegenerateSeriesError:
            skipped += 1
            continue
        count += 1
    if count == 0:
        raise ValueError("no usable evaluation days")
    return {
        "percentiles": np.asarray(percentiles, dtype=np.float64),
        "past": past_sums / count,
        "generated": gen_sums / count,
        "days": count,
        "skipped": skipped,
    }
