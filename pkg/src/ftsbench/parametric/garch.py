"""Univariate GARCH(1,1) maximum likelihood with a constant mean.

Variance recursion: sigma_t^2 = omega + alpha * eps_{t-1}^2 + beta * sigma_{t-1}^2.
Positivity and stationarity (alpha + beta < 1) are enforced through a
log/logit reparameterization, so the quasi-Newton search itself is
unconstrained; the best of several deterministic restarts is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

__all__ = ["Garch11Fit", "DegenerateSeriesError", "fit_garch11",
           "garch11_filter", "gaussian_loglik", "student_t_loglik"]

_PERSISTENCE_CAP = 0.999
MIN_OBSERVATIONS = 30


class DegenerateSeriesError(ValueError):
    """Input series has (numerically) zero variance."""


@dataclass
class Garch11Fit:
    mu: float
    omega: float
    alpha: float
    beta: float
    loglik: float
    last_variance: float
    converged: bool
    nu: float | None = None  # Student-t degrees of freedom when fitted

    @property
    def unconditional_variance(self) -> float:
        return self.omega / max(1e-12, 1.0 - self.alpha - self.beta)

    def to_dict(self) -> dict:
        return {"mu": self.mu, "omega": self.omega, "alpha": self.alpha,
                "beta": self.beta, "loglik": self.loglik,
                "last_variance": self.last_variance,
                "converged": self.converged, "nu": self.nu}

    @classmethod
    def from_dict(cls, d: dict) -> "Garch11Fit":
        return cls(mu=float(d["mu"]), omega=float(d["omega"]),
                   alpha=float(d["alpha"]), beta=float(d["beta"]),
                   loglik=float(d["loglik"]),
                   last_variance=float(d["last_variance"]),
                   converged=bool(d["converged"]),
                   nu=None if d.get("nu") is None else float(d["nu"]))


def garch11_filter(returns: np.ndarray, mu: float, omega: float, alpha: float,
                   beta: float, initial_variance: float | None = None
                   ) -> np.ndarray:
    """Conditional variance path; sigma_0^2 defaults to the sample variance."""
    eps = returns - mu
    v = float(np.var(eps)) if initial_variance is None else initial_variance
    v = max(v, 1e-18)
    omega, alpha, beta = float(omega), float(alpha), float(beta)
    out = []
    append = out.append
    for e2 in (eps * eps).tolist():
        append(v)
        v = omega + alpha * e2 + beta * v
    return np.asarray(out)


def gaussian_loglik(returns: np.ndarray, mu: float, omega: float, alpha: float,
                    beta: float) -> float:
    eps2 = (returns - mu) ** 2
    var = garch11_filter(returns, mu, omega, alpha, beta)
    return float(-0.5 * np.sum(np.log(2.0 * np.pi * var) + eps2 / var))


def student_t_loglik(returns: np.ndarray, mu: float, omega: float, alpha: float,
                     beta: float, nu: float) -> float:
    """Standardized Student-t innovations scaled to unit variance (nu > 2)."""
    eps2 = (returns - mu) ** 2
    var = garch11_filter(returns, mu, omega, alpha, beta)
    z2 = eps2 / var
    c = (gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0)
         - 0.5 * np.log(np.pi * (nu - 2.0)))
    return float(np.sum(c - 0.5 * np.log(var)
                        - (nu + 1.0) / 2.0 * np.log1p(z2 / (nu - 2.0))))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def _unpack(theta: np.ndarray, sample_var: float) -> tuple[float, float, float, float]:
    mu = theta[0]
    omega = sample_var * np.exp(theta[1])
    persistence = _PERSISTENCE_CAP * _sigmoid(theta[2])
    share = _sigmoid(theta[3])
    alpha = persistence * share
    beta = persistence * (1.0 - share)
    return mu, omega, alpha, beta


def _starts(sample_mean: float) -> list[np.ndarray]:
    # (mu, log omega/sample_var, logit persistence, logit alpha share)
    configs = [
        (sample_mean, np.log(0.05), 2.9, -2.4),   # persistent, small alpha
        (sample_mean, np.log(0.2), 1.4, -1.4),
        (sample_mean, np.log(1.0), -2.0, 0.0),    # near white noise
        (sample_mean, np.log(0.1), 2.2, 0.0),
        (sample_mean, np.log(0.5), 0.0, 1.0),
    ]
    return [np.array(c) for c in configs]


def fit_garch11(returns: np.ndarray, innovation: str = "normal",
                n_starts: int = 5) -> Garch11Fit:
    """Best-of-restarts quasi-Newton maximum likelihood fit.

    ``innovation`` is "normal" or "student-t"; the Student-t variant also
    searches the degrees of freedom in (2.1, 100] and falls back to the
    normal law label when the bound is hit.
    """
    returns = np.asarray(returns, dtype=np.float64).ravel()
    if returns.size < MIN_OBSERVATIONS:
        raise ValueError(f"need at least {MIN_OBSERVATIONS} observations")
    sample_var = float(np.var(returns))
    sample_mean = float(np.mean(returns))
    if not np.isfinite(sample_var) or \
            sample_var < 1e-20 * max(1.0, sample_mean ** 2):
        raise DegenerateSeriesError("degenerate variance")
    student = innovation == "student-t"
    if innovation not in ("normal", "student-t"):
        raise ValueError(f"unknown innovation law {innovation!r}")

    def objective(theta):
        mu, omega, alpha, beta = _unpack(theta, sample_var)
        try:
            if student:
                nu = 2.1 + 97.9 * _sigmoid(theta[4])
                ll = student_t_loglik(returns, mu, omega, alpha, beta, nu)
            else:
                ll = gaussian_loglik(returns, mu, omega, alpha, beta)
        except FloatingPointError:
            return 1e12
        if not np.isfinite(ll):
            return 1e12
        return -ll

    best = None
    best_obj = np.inf
    any_converged = False
    for start in _starts(sample_mean)[:n_starts]:
        if student:
            start = np.append(start, 0.0)  # nu around 51
        res = minimize(objective, start, method="L-BFGS-B")
        if res.fun < best_obj:
            best_obj = res.fun
            best = res
        any_converged = any_converged or bool(res.success)

    mu, omega, alpha, beta = _unpack(best.x, sample_var)
    nu = None
    if student:
        nu = 2.1 + 97.9 * _sigmoid(best.x[4])
        if nu > 100.0 - 1e-6:
            nu = None  # effectively normal
    var_path = garch11_filter(returns, mu, omega, alpha, beta)
    eps_last = returns[-1] - mu
    last_var = omega + alpha * eps_last ** 2 + beta * var_path[-1]
    return Garch11Fit(mu=float(mu), omega=float(omega), alpha=float(alpha),
                      beta=float(beta), loglik=float(-best_obj),
                      last_variance=float(last_var),
                      converged=bool(any_converged and np.isfinite(best_obj)),
                      nu=nu)
