"""Cross-sectional structure layers: correlation blocks, volatility-triggered
correlation regimes, and cyclic Poisson jumps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.linalg import cholesky, validate_correlation

__all__ = ["BlockCorrelationSpec", "RegimeConfig", "JumpConfig",
           "apply_correlation", "regime_labels", "rolling_volatility_measure",
           "sample_jumps"]


@dataclass(frozen=True)
class BlockCorrelationSpec:
    """Block-structured correlation: high within blocks, low across."""

    block_sizes: tuple[int, ...]
    within: tuple[float, ...]
    across: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(int(s) for s in self.block_sizes))
        object.__setattr__(self, "within", tuple(float(w) for w in self.within))
        if len(self.within) != len(self.block_sizes):
            raise ValueError("one within-block correlation per block")
        if any(s < 1 for s in self.block_sizes):
            raise ValueError("block sizes must be >= 1")

    @property
    def n_instruments(self) -> int:
        return sum(self.block_sizes)

    def matrix(self) -> np.ndarray:
        n = self.n_instruments
        m = np.full((n, n), self.across)
        start = 0
        for size, rho in zip(self.block_sizes, self.within):
            m[start:start + size, start:start + size] = rho
            start += size
        np.fill_diagonal(m, 1.0)
        return validate_correlation(m)

    def to_dict(self) -> dict:
        return {"block_sizes": list(self.block_sizes),
                "within": list(self.within), "across": self.across}

    @classmethod
    def from_dict(cls, d: dict) -> "BlockCorrelationSpec":
        return cls(tuple(d["block_sizes"]), tuple(d["within"]), float(d.get("across", 0.0)))


def apply_correlation(spec, shocks: np.ndarray) -> np.ndarray:
    """Color an i.i.d. shock panel so rows have the specified correlation.

    ``spec`` is a BlockCorrelationSpec or a full correlation matrix.
    """
    matrix = spec.matrix() if isinstance(spec, BlockCorrelationSpec) else \
        validate_correlation(np.asarray(spec, dtype=np.float64))
    shocks = np.asarray(shocks, dtype=np.float64)
    if shocks.ndim != 2 or shocks.shape[1] != matrix.shape[0]:
        raise ValueError("shock panel columns must match correlation size")
    lower = cholesky(matrix)
    return shocks @ lower.T


@dataclass(frozen=True)
class RegimeConfig:
    """Volatility-triggered switch between two correlation structures.

    The trigger is the cross-sectional mean of per-instrument rolling
    standard deviations; the threshold is the given percentile of that
    measure over the burn-in period, computed once. Percentile 0 forces
    the high regime after burn-in and 100 disables it.
    """

    window: int
    percentile: float
    low: BlockCorrelationSpec
    high: BlockCorrelationSpec

    def __post_init__(self):
        if self.window < 2:
            raise ValueError("rolling window must be >= 2")
        if not 0.0 <= self.percentile <= 100.0:
            raise ValueError("percentile must lie in [0, 100]")
        self.low.matrix()
        self.high.matrix()

    def to_dict(self) -> dict:
        return {"window": self.window, "percentile": self.percentile,
                "low": self.low.to_dict(), "high": self.high.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "RegimeConfig":
        return cls(int(d["window"]), float(d["percentile"]),
                   BlockCorrelationSpec.from_dict(d["low"]),
                   BlockCorrelationSpec.from_dict(d["high"]))


def rolling_volatility_measure(returns: np.ndarray, window: int) -> np.ndarray:
    """Cross-sectional mean of per-instrument rolling stds.

    Entry t uses the window of returns ending at t-1 (causal); entries with
    t < window are NaN.
    """
    returns = np.asarray(returns, dtype=np.float64)
    t_total, _ = returns.shape
    out = np.full(t_total, np.nan)
    if t_total < window:
        return out
    csum = np.cumsum(returns, axis=0)
    csum2 = np.cumsum(returns ** 2, axis=0)
    for t in range(window, t_total):
        s = csum[t - 1] - (csum[t - window - 1] if t > window else 0.0)
        s2 = csum2[t - 1] - (csum2[t - window - 1] if t > window else 0.0)
        var = np.maximum(s2 / window - (s / window) ** 2, 0.0)
        out[t] = np.mean(np.sqrt(var))
    return out


def regime_threshold(measure: np.ndarray, burn_in: int, percentile: float,
                     window: int) -> float:
    sample = measure[window:burn_in]
    sample = sample[np.isfinite(sample)]
    if sample.size == 0:
        raise ValueError("burn-in too short: no rolling-volatility values to "
                         "compute the regime threshold from")
    if percentile <= 0.0:
        return -np.inf
    if percentile >= 100.0:
        return np.inf
    return float(np.percentile(sample, percentile))


def regime_labels(returns: np.ndarray, config: RegimeConfig, burn_in: int) -> np.ndarray:
    """Recompute the high/low regime labels from a realized return path.

    Labels are a deterministic function of the path and the config: 0 (low)
    during burn-in and whenever the measure does not exceed the threshold,
    1 (high) otherwise.
    """
    if burn_in < config.window + 1:
        raise ValueError("burn-in too short for the rolling window")
    measure = rolling_volatility_measure(returns, config.window)
    threshold = regime_threshold(measure, burn_in, config.percentile, config.window)
    labels = np.zeros(returns.shape[0], dtype=np.int64)
    active = np.arange(returns.shape[0]) >= burn_in
    labels[active & (measure > threshold)] = 1
    return labels


@dataclass(frozen=True)
class JumpConfig:
    """Cyclic Poisson jump layer with a guaranteed large-jump regime.

    Each day is a large-regime day with probability
    clamp(base_prob + amplitude * max(0, sin(2 pi t / period)), 0, 1); jump
    counts per instrument are Poisson at the active regime's intensity and
    sizes are normal in log-return space. Every consecutive block of
    ``enforce_horizon`` days is forced to contain at least one large-regime
    day.
    """

    normal_intensity: float
    large_intensity: float
    normal_size: tuple[float, float] = (0.0, 0.01)
    large_size: tuple[float, float] = (0.0, 0.05)
    cycle_period: int = 63
    cycle_amplitude: float = 0.0
    base_prob: float = 0.0
    enforce_horizon: int = 126

    def __post_init__(self):
        if self.normal_intensity < 0 or self.large_intensity < 0:
            raise ValueError("jump intensities must be non-negative")
        for mean, std in (self.normal_size, self.large_size):
            if std <= 0:
                raise ValueError("jump size stds must be positive")
        if self.cycle_period < 1 or self.enforce_horizon < 1:
            raise ValueError("cycle period and enforcement horizon must be >= 1")
        if not 0.0 <= self.base_prob <= 1.0:
            raise ValueError("base large-regime probability must lie in [0, 1]")
        if self.cycle_amplitude < 0:
            raise ValueError("cycle amplitude must be non-negative")

    def large_day_probability(self, t: np.ndarray | int) -> np.ndarray:
        cyc = np.maximum(0.0, np.sin(2.0 * np.pi * np.asarray(t) / self.cycle_period))
        return np.clip(self.base_prob + self.cycle_amplitude * cyc, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {"normal_intensity": self.normal_intensity,
                "large_intensity": self.large_intensity,
                "normal_size": list(self.normal_size),
                "large_size": list(self.large_size),
                "cycle_period": self.cycle_period,
                "cycle_amplitude": self.cycle_amplitude,
                "base_prob": self.base_prob,
                "enforce_horizon": self.enforce_horizon}

    @classmethod
    def from_dict(cls, d: dict) -> "JumpConfig":
        d = dict(d)
        d["normal_size"] = tuple(d["normal_size"])
        d["large_size"] = tuple(d["large_size"])
        return cls(**d)


def sample_jumps(config: JumpConfig, steps: int, n_instruments: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw the jump layer for a panel.

    Returns (jump log-return additions (T, N), jump counts (T, N),
    large-regime day indicator (T,)). Enforcement applies to the complete
    ``enforce_horizon``-day blocks; a partial tail block is left as drawn.
    """
    days = np.arange(steps)
    p_large = config.large_day_probability(days)
    large_day = rng.random(steps) < p_large
    horizon = config.enforce_horizon
    for start in range(0, steps - horizon + 1, horizon):
        block = slice(start, start + horizon)
        if not np.any(large_day[block]):
            large_day[start + int(rng.integers(horizon))] = True

    intensities = np.where(large_day, config.large_intensity, config.normal_intensity)
    counts = rng.poisson(np.repeat(intensities[:, None], n_instruments, axis=1))
    # Sum of k iid normal jump sizes drawn directly as N(k*mean, k*std^2).
    normals = rng.standard_normal((steps, n_instruments))
    mean = np.where(large_day, config.large_size[0], config.normal_size[0])[:, None]
    std = np.where(large_day, config.large_size[1], config.normal_size[1])[:, None]
    additions = counts * mean + std * np.sqrt(counts) * normals
    additions[counts == 0] = 0.0
    return additions, counts.astype(np.float64), large_day.astype(np.int64)
