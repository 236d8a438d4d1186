"""Forward simulation of the factor stochastic volatility model.

Returns are r_t = Lambda f_t + U_t(h^U)^(1/2) eps_t with factors
f_t = V_t(h^V)^(1/2) psi_t; each latent log variance h follows an AR(1)
process h_t = mean + phi * (h_{t-1} - mean) + std * eta_t. Only forward
simulation is provided; no estimation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import ReturnPanel

__all__ = ["FsvForwardParams", "simulate_fsv_forward"]


@dataclass(frozen=True)
class FsvForwardParams:
    """Loading matrix plus AR(1) coefficients for the n + m latent log variances.

    Order of the AR arrays: the n idiosyncratic series first, then the m
    factor series. ``upper_triangular`` enforces the identification
    constraint on the loadings.
    """

    loadings: np.ndarray           # (n, m)
    ar_mean: np.ndarray            # (n + m,)
    ar_phi: np.ndarray             # (n + m,)
    ar_std: np.ndarray             # (n + m,)
    upper_triangular: bool = False

    def __post_init__(self):
        loadings = np.asarray(self.loadings, dtype=np.float64)
        object.__setattr__(self, "loadings", loadings)
        n, m = loadings.shape
        if m >= n:
            raise ValueError("need fewer factors than instruments (m < n)")
        for name in ("ar_mean", "ar_phi", "ar_std"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (n + m,):
                raise ValueError(f"{name} must have length n + m = {n + m}")
            object.__setattr__(self, name, arr)
        if np.any(np.abs(self.ar_phi) >= 1.0):
            raise ValueError("AR persistences must lie in (-1, 1)")
        if np.any(self.ar_std < 0):
            raise ValueError("AR innovation stds must be non-negative")
        if self.upper_triangular:
            # identification constraint: zero above the diagonal
            if np.any(np.abs(np.triu(loadings, 1)) > 0):
                raise ValueError("loadings violate the upper-triangular constraint")

    @property
    def n_instruments(self) -> int:
        return self.loadings.shape[0]

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]


def simulate_fsv_forward(params: FsvForwardParams, steps: int,
                         seed: int | np.random.Generator) -> ReturnPanel:
    """Simulate the FSV system forward from the latent means.

    The true per-instrument variance channel is
    sum_j Lambda_ij^2 exp(h^V_j) + exp(h^U_i).
    """
    n, m = params.n_instruments, params.n_factors
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    eta = rng.standard_normal((steps, n + m))
    psi = rng.standard_normal((steps, m))
    eps = rng.standard_normal((steps, n))

    h = params.ar_mean.copy()
    lam = params.loadings
    returns = np.empty((steps, n))
    variance = np.empty((steps, n))
    for t in range(steps):
        h = params.ar_mean + params.ar_phi * (h - params.ar_mean) + params.ar_std * eta[t]
        idio_var = np.exp(h[:n])
        factor_var = np.exp(h[n:])
        f = np.sqrt(factor_var) * psi[t]
        returns[t] = lam @ f + np.sqrt(idio_var) * eps[t]
        variance[t] = (lam ** 2) @ factor_var + idio_var
    return ReturnPanel(returns, [f"I{i:02d}" for i in range(n)], variance=variance)
