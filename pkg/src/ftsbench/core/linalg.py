"""Dense symmetric-matrix helpers shared by the generators and fitters."""

from __future__ import annotations

import numpy as np

__all__ = ["NotPositiveDefiniteError", "cholesky", "jittered_cholesky",
           "validate_correlation"]


class NotPositiveDefiniteError(ValueError):
    """The matrix has a non-positive eigenvalue; used to reject invalid
    correlation specifications instead of silently regularizing them."""


def _check_square_symmetric(m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(m - m.T)) > tol * max(1.0, np.max(np.abs(m))):
        raise ValueError("matrix is not symmetric")
    return m


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T == m.

    Raises NotPositiveDefiniteError for non-PD input; never regularizes.
    """
    m = _check_square_symmetric(m)
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from exc


def jittered_cholesky(m: np.ndarray, jitter: float = 1e-8,
                      max_attempts: int = 5) -> tuple[np.ndarray, float]:
    """Cholesky with an explicit, named diagonal-jitter fallback.

    Adds ``jitter`` increments to the diagonal up to ``max_attempts`` times.
    Returns (L, total_jitter_applied).
    """
    m = _check_square_symmetric(m)
    total = 0.0
    for attempt in range(max_attempts + 1):
        try:
            return np.linalg.cholesky(m + total * np.eye(m.shape[0])), total
        except np.linalg.LinAlgError:
            total += jitter * (attempt + 1)
    raise NotPositiveDefiniteError(
        f"matrix not positive definite after {max_attempts} jitter attempts")


def validate_correlation(m: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Check unit diagonal, entries in [-1, 1], and positive definiteness."""
    m = _check_square_symmetric(m)
    if np.max(np.abs(np.diag(m) - 1.0)) > tol:
        raise ValueError("correlation matrix must have unit diagonal")
    if np.max(np.abs(m)) > 1.0 + tol:
        raise ValueError("correlation entries must lie in [-1, 1]")
    cholesky(m)
    return m
