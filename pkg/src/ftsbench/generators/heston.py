"""Heston stochastic volatility simulator.

dS = mu * S dt + sqrt(V) * S dW_S and dV = kappa * (theta - V) dt
+ sigma_v * sqrt(V) dW_V with corr(dW_S, dW_V) = rho, discretized by
Euler-Maruyama with full truncation: max(V, 0) enters both the drift and the
diffusion, so the variance fed into returns is never negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["HestonParams", "simulate_heston", "correlated_pairs"]


@dataclass(frozen=True)
class HestonParams:
    mu: float
    kappa: float
    theta: float
    sigma_v: float
    rho: float
    v0: float
    s0: float
    dt: float

    def __post_init__(self):
        for name in ("kappa", "theta", "v0", "s0", "dt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma_v < 0:
            raise ValueError("sigma_v must be non-negative")
        if abs(self.rho) > 1:
            raise ValueError("|rho| must be <= 1")

    def to_dict(self) -> dict:
        return {"mu": float(self.mu), "kappa": float(self.kappa),
                "theta": float(self.theta), "sigma_v": float(self.sigma_v),
                "rho": float(self.rho), "v0": float(self.v0),
                "s0": float(self.s0), "dt": float(self.dt)}

    @classmethod
    def from_dict(cls, d: dict) -> "HestonParams":
        return cls(**{k: float(v) for k, v in d.items()})


def correlated_pairs(rho: float, steps: int, rng: np.random.Generator) -> np.ndarray:
    """Draw (steps, 2) shock pairs (z_price, z_variance) with correlation rho."""
    raw = rng.standard_normal((steps, 2))
    z_s = raw[:, 0]
    z_v = rho * z_s + np.sqrt(max(0.0, 1.0 - rho * rho)) * raw[:, 1]
    return np.column_stack([z_s, z_v])


def simulate_heston(params: HestonParams, steps: int,
                    shocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Simulate log returns and the (truncated) variance path.

    ``shocks`` holds pre-correlated (z_price, z_variance) pairs, shaped
    (steps, 2) for one path or (paths, steps, 2) for a batch; the output
    shape follows. Per step the log return is
    (mu - V+/2) dt + sqrt(V+ dt) * z_price.
    """
    shocks = np.asarray(shocks, dtype=np.float64)
    single = shocks.ndim == 2
    if single:
        shocks = shocks[None, :, :]
    if shocks.shape[1] != steps or shocks.shape[2] != 2:
        raise ValueError(f"shocks must be (..., {steps}, 2), got {shocks.shape}")
    n_paths = shocks.shape[0]
    dt = params.dt
    sqdt = np.sqrt(dt)
    returns = np.empty((n_paths, steps))
    variances = np.empty((n_paths, steps))
    v_tilde = np.full(n_paths, params.v0)
    for t in range(steps):
        v_plus = np.maximum(v_tilde, 0.0)
        vol = np.sqrt(v_plus)
        returns[:, t] = (params.mu - 0.5 * v_plus) * dt + vol * sqdt * shocks[:, t, 0]
        variances[:, t] = v_plus
        v_tilde = (v_tilde + params.kappa * (params.theta - v_plus) * dt
                   + params.sigma_v * vol * sqdt * shocks[:, t, 1])
    if single:
        return returns[0], variances[0]
    return returns, variances
