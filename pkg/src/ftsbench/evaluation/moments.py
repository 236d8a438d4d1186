"""Moment summaries and correlation values of return windows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MomentSet", "DegenerateSeriesError", "moments", "rolling_moments",
           "correlation_values"]


class DegenerateSeriesError(ValueError):
    """Series has zero variance; skew and kurtosis are undefined."""


@dataclass(frozen=True)
class MomentSet:
    """Population mean, standard deviation, skew, and excess kurtosis."""

    mean: float
    std: float
    skew: float
    kurt: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mean, self.std, self.skew, self.kurt])


def moments(series: np.ndarray) -> MomentSet:
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1 or series.size < 4:
        raise ValueError("need a 1-D series of length >= 4")
    mean = series.mean()
    centered = series - mean
    var = np.mean(centered ** 2)
    if var <= 0.0:
        raise DegenerateSeriesError("zero variance series")
    std = np.sqrt(var)
    skew = np.mean(centered ** 3) / std ** 3
    kurt = np.mean(centered ** 4) / var ** 2 - 3.0
    return MomentSet(float(mean), float(std), float(skew), float(kurt))


def rolling_moments(series: np.ndarray,
                    window: int | None = None) -> tuple[list[MomentSet], int]:
    """Stride-1 sliding-window moments; window defaults to len // 3.

    Returns (moment sets, number of degenerate windows skipped).
    """
    series = np.asarray(series, dtype=np.float64)
    if window is None:
        window = series.size // 3
    if window < 4:
        raise ValueError("rolling window must be >= 4")
    if series.size < window:
        raise ValueError("series shorter than the rolling window")
    out: list[MomentSet] = []
    skipped = 0
    for start in range(series.size - window + 1):
        try:
            out.append(moments(series[start:start + window]))
        except DegenerateSeriesError:
            skipped += 1
    return out, skipped


def correlation_values(window: np.ndarray) -> np.ndarray:
    """Lower-triangle Pearson correlations of an N x T window.

    Row order: (1,0), (2,0), (2,1), ... for N (N - 1) / 2 values.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2:
        raise ValueError("window must be an N x T matrix")
    n, t = window.shape
    if t < 3:
        raise ValueError("need at least 3 observations per instrument")
    stds = window.std(axis=1)
    dead = np.nonzero(stds == 0.0)[0]
    if dead.size:
        raise DegenerateSeriesError(
            f"zero-variance instrument(s) at index {dead.tolist()}")
    corr = np.corrcoef(window)
    return corr[np.tril_indices(n, k=-1)]
