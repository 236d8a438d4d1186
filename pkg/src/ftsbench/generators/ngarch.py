"""Nonlinear asymmetric GARCH(1,1) return simulator.

Variance recursion: sigma_t^2 = omega + beta * (eps_{t-1} - gamma * sigma_{t-1})^2
+ alpha * sigma_{t-1}^2, with returns r_t = mu + sigma_t * z_t. The beta
coefficient multiplies the innovation term and alpha the lagged variance;
positive gamma exacerbates negative shocks (leverage). The unconditional
variance is omega / (1 - alpha - beta * (1 + gamma^2)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NGarchParams", "simulate_ngarch"]


@dataclass(frozen=True)
class NGarchParams:
    mu: float
    omega: float
    alpha: float
    beta: float
    gamma: float
    sigma0: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.persistence >= 1.0:
            raise ValueError(
                "alpha + beta*(1+gamma^2) must be < 1 for finite unconditional variance")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")

    @property
    def persistence(self) -> float:
        return self.alpha + self.beta * (1.0 + self.gamma ** 2)

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.persistence)

    def to_dict(self) -> dict:
        return {"mu": float(self.mu), "omega": float(self.omega),
                "alpha": float(self.alpha), "beta": float(self.beta),
                "gamma": float(self.gamma), "sigma0": float(self.sigma0)}

    @classmethod
    def from_dict(cls, d: dict) -> "NGarchParams":
        return cls(**{k: float(v) for k, v in d.items()})


def simulate_ngarch(params: NGarchParams, steps: int,
                    shocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Simulate ``steps`` returns driven by the given standard-normal shocks.

    Returns (returns, conditional variances); variances[t] is the sigma_t^2
    in force when r_t was drawn.
    """
    shocks = np.asarray(shocks, dtype=np.float64)
    if shocks.shape != (steps,):
        raise ValueError(f"need exactly {steps} shocks, got shape {shocks.shape}")
    mu, omega = params.mu, params.omega
    alpha, beta, gamma = params.alpha, params.beta, params.gamma
    returns = np.empty(steps)
    variances = np.empty(steps)
    sigma2 = params.sigma0 ** 2
    z = shocks.tolist()
    for t in range(steps):
        sigma = sigma2 ** 0.5
        eps = sigma * z[t]
        returns[t] = mu + eps
        variances[t] = sigma2
        sigma2 = omega + beta * (eps - gamma * sigma) ** 2 + alpha * sigma2
    return returns, variances
