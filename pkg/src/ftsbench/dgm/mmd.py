"""Multi-bandwidth Gaussian-kernel maximum mean discrepancy.

The kernel is k(x, y) = exp(-||x - y||^2 / bw) and the estimator is the
biased V-statistic summed over multiples of a base bandwidth; the base is
the median of pairwise squared euclidean distances of the pooled samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import autodiff as ad

__all__ = ["MmdSpec", "ZeroBandwidthError", "median_bandwidth", "mmd_squared",
           "mmd_squared_tape"]

DEFAULT_MULTIPLIERS = (0.5, 1.0, 2.0, 4.0, 8.0)


class ZeroBandwidthError(ValueError):
    """All pooled samples identical; the median heuristic degenerates."""


@dataclass(frozen=True)
class MmdSpec:
    base_bandwidth: float
    multipliers: tuple[float, ...] = DEFAULT_MULTIPLIERS

    def __post_init__(self):
        if self.base_bandwidth <= 0:
            raise ValueError("base bandwidth must be positive")
        if not self.multipliers or any(m <= 0 for m in self.multipliers):
            raise ValueError("multipliers must be positive")

    @property
    def bandwidths(self) -> tuple[float, ...]:
        return tuple(self.base_bandwidth * m for m in self.multipliers)


def _as_2d(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("samples must be vectors (n, d)")
    return x


def median_bandwidth(samples: np.ndarray) -> float:
    """Median over all unordered distinct pairs of squared distances."""
    x = _as_2d(samples)
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    vals = d2[np.triu_indices(n, k=1)]
    med = float(np.median(np.maximum(vals, 0.0)))
    if med <= 0.0:
        raise ZeroBandwidthError("zero bandwidth: pooled samples are identical")
    return med


def _pairwise_sq(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xs = np.sum(x * x, axis=1)
    ys = np.sum(y * y, axis=1)
    return np.maximum(xs[:, None] + ys[None, :] - 2.0 * (x @ y.T), 0.0)


def mmd_squared(x: np.ndarray, y: np.ndarray, spec: MmdSpec) -> float:
    """Biased V-statistic MMD^2 summed over the bandwidth set."""
    x, y = _as_2d(x), _as_2d(y)
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise ValueError("sample sets must be nonempty")
    if x.shape[1] != y.shape[1]:
        raise ValueError("sample dimensions differ")
    dxx = _pairwise_sq(x, x)
    dyy = _pairwise_sq(y, y)
    dxy = _pairwise_sq(x, y)
    total = 0.0
    for bw in spec.bandwidths:
        total += (np.mean(np.exp(-dxx / bw)) + np.mean(np.exp(-dyy / bw))
                  - 2.0 * np.mean(np.exp(-dxy / bw)))
    return float(total)


def mmd_squared_tape(tape: ad.Tape, x_const: np.ndarray, y_node: ad.Node,
                     spec: MmdSpec) -> ad.Node:
    """Differentiable MMD^2 with a constant real batch and a variable
    generated batch; matches ``mmd_squared`` on values."""
    x = _as_2d(x_const)
    y2 = ad.reduce_sum(ad.square(y_node), axis=1, keepdims=True)  # (B,1)
    x2 = np.sum(x * x, axis=1, keepdims=True)                     # (M,1)
    xyt = ad.matmul(tape.constant(x), ad.transpose(y_node))       # (M,B)
    dxy = ad.sub(ad.add(tape.constant(x2), ad.transpose(y2)),
                 ad.mul(xyt, 2.0))
    yyt = ad.matmul(y_node, ad.transpose(y_node))                 # (B,B)
    dyy = ad.sub(ad.add(y2, ad.transpose(y2)), ad.mul(yyt, 2.0))
    dxx = _pairwise_sq(x, x)
    total = None
    for bw in spec.bandwidths:
        term_xx = float(np.mean(np.exp(-dxx / bw)))
        term_yy = ad.reduce_mean(ad.exp(ad.mul(dyy, -1.0 / bw)))
        term_xy = ad.reduce_mean(ad.exp(ad.mul(dxy, -1.0 / bw)))
        piece = ad.add(ad.sub(term_yy, ad.mul(term_xy, 2.0)), term_xx)
        total = piece if total is None else ad.add(total, piece)
    return total
