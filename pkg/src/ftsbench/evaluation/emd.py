"""One-dimensional optimal transport with squared-Euclidean ground cost."""

from __future__ import annotations

import numpy as np

__all__ = ["emd1d_squared"]


def emd1d_squared(p: np.ndarray, q: np.ndarray) -> float:
    """Earth mover's distance between two real multisets under squared cost.

    Both multisets carry uniform mass. For equal sizes this is the mean of
    squared differences of the sorted samples; for unequal sizes the sorted
    (comonotone) coupling is computed exactly with integer mass bookkeeping,
    which is the optimal plan for any convex ground cost in one dimension.
    """
    p = np.sort(np.asarray(p, dtype=np.float64).ravel())
    q = np.sort(np.asarray(q, dtype=np.float64).ravel())
    n, m = p.size, q.size
    if n == 0 or m == 0:
        raise ValueError("both multisets must be nonempty")
    if n == m:
        d = p - q
        return float(np.mean(d * d))
    # each p atom carries mass m units, each q atom n units, total n*m per side
    cost = 0.0
    i = j = 0
    remain_p, remain_q = m, n
    total = n * m
    while i < n and j < m:
        move = remain_p if remain_p < remain_q else remain_q
        d = p[i] - q[j]
        cost += move * d * d
        remain_p -= move
        remain_q -= move
        if remain_p == 0:
            i += 1
            remain_p = m
        if remain_q == 0:
            j += 1
            remain_q = n
    return cost / total
