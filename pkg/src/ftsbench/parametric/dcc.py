"""Two-stage dynamic conditional correlation estimation and simulation.

Stage 1 fits per-asset GARCH(1,1) by quasi maximum likelihood; stage 2
maximizes the correlation likelihood of
Q_t = (1 - a - b) Qbar + a e_{t-1} e'_{t-1} + b Q_{t-1} over the
standardized residuals e, with R_t = diag(Q_t)^(-1/2) Q_t diag(Q_t)^(-1/2).
The Student-t variant fits the degrees of freedom jointly in stage 2.

The Q recursion is linear in its history, so the whole path is evaluated
with one IIR filter pass and batched linear algebra instead of a Python
loop per step.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import gammaln

from .garch import Garch11Fit, fit_garch11, garch11_filter

__all__ = ["DccFit", "FitSchedule", "fit_dcc", "simulate_from_fit",
           "rolling_refit", "filtered_correlations", "save_fit", "load_fit"]

_PERSISTENCE_CAP = 0.999
SCHEMA_VERSION = 1


@dataclass
class FitSchedule:
    """Full-train or rolling-window refitting."""

    mode: str = "full-train"
    window: int = 40

    def __post_init__(self):
        if self.mode not in ("full-train", "rolling"):
            raise ValueError("mode must be 'full-train' or 'rolling'")
        if self.window < 30:
            raise ValueError("rolling window below 30 observations is not identifiable")


@dataclass
class DccFit:
    garch_fits: list[Garch11Fit]
    dcc_a: float
    dcc_b: float
    qbar: np.ndarray
    innovation: str
    loglik: float
    last_q: np.ndarray
    converged: bool
    nu: float | None = None
    carried_forward: bool = False

    def __post_init__(self):
        self.qbar = np.asarray(self.qbar, dtype=np.float64)
        self.last_q = np.asarray(self.last_q, dtype=np.float64)

    @property
    def n_assets(self) -> int:
        return len(self.garch_fits)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "garch_fits": [g.to_dict() for g in self.garch_fits],
            "dcc_a": self.dcc_a,
            "dcc_b": self.dcc_b,
            "qbar": self.qbar.tolist(),
            "innovation": self.innovation,
            "loglik": self.loglik,
            "last_q": self.last_q.tolist(),
            "converged": self.converged,
            "nu": self.nu,
            "carried_forward": self.carried_forward,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DccFit":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {d.get('schema_version')!r}")
        return cls(
            garch_fits=[Garch11Fit.from_dict(g) for g in d["garch_fits"]],
            dcc_a=float(d["dcc_a"]), dcc_b=float(d["dcc_b"]),
            qbar=np.asarray(d["qbar"]), innovation=d["innovation"],
            loglik=float(d["loglik"]), last_q=np.asarray(d["last_q"]),
            converged=bool(d["converged"]),
            nu=None if d.get("nu") is None else float(d["nu"]),
            carried_forward=bool(d.get("carried_forward", False)),
        )


def save_fit(fit: DccFit, path: str | Path) -> None:
    Path(path).write_text(json.dumps(fit.to_dict(), indent=2, sort_keys=True))


def load_fit(path: str | Path) -> DccFit:
    return DccFit.from_dict(json.loads(Path(path).read_text()))


def _standardized_residuals(returns: np.ndarray,
                            fits: list[Garch11Fit]) -> np.ndarray:
    t, n = returns.shape
    e = np.empty((t, n))
    for i, fit in enumerate(fits):
        var = garch11_filter(returns[:, i], fit.mu, fit.omega, fit.alpha, fit.beta)
        e[:, i] = (returns[:, i] - fit.mu) / np.sqrt(var)
    return e


def _q_path(e: np.ndarray, qbar: np.ndarray, a: float, b: float) -> np.ndarray:
    """Whole Q_t path via one IIR filter pass; Q_1 = Qbar."""
    t, n = e.shape
    outer = e[:, :, None] * e[:, None, :]
    x = np.empty((t, n, n))
    x[0] = qbar
    x[1:] = (1.0 - a - b) * qbar + a * outer[:-1]
    flat = x.reshape(t, n * n)
    q = lfilter([1.0], [1.0, -b], flat, axis=0).reshape(t, n, n)
    return q


def _correlations_from_q(q: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.einsum("tii->ti", q))
    return q / (d[:, :, None] * d[:, None, :])


def _correlation_loglik(e: np.ndarray, r: np.ndarray, nu: float | None) -> float:
    """Gaussian or multivariate Student-t copula-style correlation term."""
    n = e.shape[1]
    sign, logdet = np.linalg.slogdet(r)
    if np.any(sign <= 0):
        return -np.inf
    solved = np.linalg.solve(r, e[:, :, None])[:, :, 0]
    quad = np.einsum("ti,ti->t", e, solved)
    if nu is None:
        ee = np.einsum("ti,ti->t", e, e)
        return float(-0.5 * np.sum(logdet + quad - ee))
    c = (gammaln((nu + n) / 2.0) - gammaln(nu / 2.0)
         - (n / 2.0) * np.log(np.pi * (nu - 2.0)))
    return float(np.sum(c - 0.5 * logdet
                        - (nu + n) / 2.0 * np.log1p(quad / (nu - 2.0))))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    ex = np.exp(x)
    return ex / (1.0 + ex)


def fit_dcc(returns: np.ndarray, innovation: str = "normal",
            schedule: FitSchedule | None = None, n_starts: int = 3) -> DccFit:
    """Two-stage DCC fit on a T x N return panel.

    With a rolling schedule only the trailing ``schedule.window`` rows are
    used, matching the conditioning-window training of the deep models.
    """
    returns = np.asarray(returns, dtype=np.float64)
    if returns.ndim != 2 or returns.shape[1] < 2:
        raise ValueError("multivariate model requires N >= 2")
    if innovation not in ("normal", "student-t"):
        raise ValueError(f"unknown innovation law {innovation!r}")
    schedule = schedule or FitSchedule()
    if schedule.mode == "rolling":
        returns = returns[-schedule.window:]

    fits = [fit_garch11(returns[:, i]) for i in range(returns.shape[1])]
    e = _standardized_residuals(returns, fits)
    qbar = (e.T @ e) / e.shape[0]
    student = innovation == "student-t"

    def objective(theta):
        s = _PERSISTENCE_CAP * _sigmoid(theta[0])
        share = _sigmoid(theta[1])
        a, b = s * share, s * (1.0 - share)
        nu = 2.1 + 97.9 * _sigmoid(theta[2]) if student else None
        with np.errstate(all="ignore"):
            q = _q_path(e, qbar, a, b)
            r = _correlations_from_q(q)
            ll = _correlation_loglik(e, r, nu)
        if not np.isfinite(ll):
            return 1e12
        return -ll

    starts = [np.array([-1.0, -1.5]), np.array([2.5, -2.8]), np.array([-6.0, 0.0])]
    if student:
        starts = [np.append(s, 0.0) for s in starts]
    best, best_obj = None, np.inf
    converged = False
    for start in starts[:n_starts]:
        res = minimize(objective, start, method="L-BFGS-B")
        if res.fun < best_obj:
            best, best_obj = res, res.fun
        converged = converged or bool(res.success)

    s = _PERSISTENCE_CAP * _sigmoid(best.x[0])
    share = _sigmoid(best.x[1])
    a, b = float(s * share), float(s * (1.0 - share))
    nu = None
    if student:
        nu = float(2.1 + 97.9 * _sigmoid(best.x[2]))
        if nu > 100.0 - 1e-6:
            nu = None
    q = _q_path(e, qbar, a, b)
    last_e = e[-1]
    last_q = (1.0 - a - b) * qbar + a * np.outer(last_e, last_e) + b * q[-1]
    stage1 = float(sum(f.loglik for f in fits))
    return DccFit(garch_fits=fits, dcc_a=a, dcc_b=b, qbar=qbar,
                  innovation=innovation if nu is not None or not student else "normal",
                  loglik=stage1 + float(-best_obj), last_q=last_q,
                  converged=converged and all(f.converged for f in fits), nu=nu)


def filtered_correlations(fit: DccFit, returns: np.ndarray) -> np.ndarray:
    """R_t path implied by the fit over a given panel (diagnostics/tests)."""
    returns = np.asarray(returns, dtype=np.float64)
    e = _standardized_residuals(returns, fit.garch_fits)
    q = _q_path(e, fit.qbar, fit.dcc_a, fit.dcc_b)
    return _correlations_from_q(q)


def _filter_condition_state(fit: DccFit, condition: np.ndarray
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Run the fitted recursions through a condition window.

    Returns the one-step-ahead (sigma^2 vector, Q matrix) state.
    """
    n, length = condition.shape
    sigma2 = np.array([f.unconditional_variance for f in fit.garch_fits])
    q = fit.qbar.copy()
    a, b = fit.dcc_a, fit.dcc_b
    mus = np.array([f.mu for f in fit.garch_fits])
    omegas = np.array([f.omega for f in fit.garch_fits])
    alphas = np.array([f.alpha for f in fit.garch_fits])
    betas = np.array([f.beta for f in fit.garch_fits])
    for t in range(length):
        eps = condition[:, t] - mus
        e = eps / np.sqrt(sigma2)
        sigma2 = omegas + alphas * eps ** 2 + betas * sigma2
        q = (1.0 - a - b) * fit.qbar + a * np.outer(e, e) + b * q
    return sigma2, q


def simulate_from_fit(fit: DccFit, condition: np.ndarray, horizon: int = 40,
                      batch: int = 1, seed: int = 0) -> np.ndarray:
    """Conditional simulation: filter the condition window, then roll forward.

    Returns a (batch, N, horizon) array; deterministic per (fit, condition,
    seed).
    """
    condition = np.asarray(condition, dtype=np.float64)
    n = fit.n_assets
    if condition.shape[0] != n:
        raise ValueError("condition rows must match the fitted asset count")
    rng = np.random.default_rng(seed)
    normals = rng.standard_normal((horizon, batch, n))
    if fit.nu is not None:
        # standardized Student-t: unit-variance scaling of rng.standard_t
        normals = rng.standard_t(fit.nu, size=(horizon, batch, n)) \
            * np.sqrt((fit.nu - 2.0) / fit.nu)

    sigma2_0, q0 = _filter_condition_state(fit, condition)
    mus = np.array([f.mu for f in fit.garch_fits])
    omegas = np.array([f.omega for f in fit.garch_fits])
    alphas = np.array([f.alpha for f in fit.garch_fits])
    betas = np.array([f.beta for f in fit.garch_fits])
    a, b = fit.dcc_a, fit.dcc_b

    sigma2 = np.repeat(sigma2_0[None, :], batch, axis=0)
    q = np.repeat(q0[None, :, :], batch, axis=0)
    out = np.empty((batch, n, horizon))
    for t in range(horizon):
        d = np.sqrt(np.einsum("pii->pi", q))
        r = q / (d[:, :, None] * d[:, None, :])
        chol = np.linalg.cholesky(r)
        z = normals[t]
        corr_z = np.einsum("pij,pj->pi", chol, z)
        eps = np.sqrt(sigma2) * corr_z
        out[:, :, t] = mus + eps
        e = eps / np.sqrt(sigma2)
        sigma2 = omegas + alphas * eps ** 2 + betas * sigma2
        q = (1.0 - a - b) * fit.qbar[None, :, :] \
            + a * e[:, :, None] * e[:, None, :] + b * q
    return out


def rolling_refit(returns: np.ndarray, innovation: str = "normal",
                  schedule: FitSchedule | None = None, stride: int = 1,
                  target_length: int = 40) -> list[DccFit]:
    """One fit per conditioning window; failures carry the last success.

    Fits align with the (condition, target) window pairs: the fit at index k
    trains on the 40-step condition of pair k, so a panel of T steps yields
    T - window - target_length + 1 fits. Carried fits are flagged so
    evaluation can exclude them; leading failures are backfilled from the
    first success.
    """
    schedule = schedule or FitSchedule(mode="rolling")
    returns = np.asarray(returns, dtype=np.float64)
    t_total = returns.shape[0]
    window = schedule.window
    if t_total < window + target_length:
        raise ValueError("panel shorter than one conditioning window pair")
    fits: list[DccFit | None] = []
    last_good: DccFit | None = None
    for start in range(0, t_total - window - target_length + 1, stride):
        chunk = returns[start:start + window]
        try:
            fit = fit_dcc(chunk, innovation=innovation,
                          schedule=FitSchedule(mode="full-train"))
            if not fit.converged:
                raise RuntimeError("fit did not converge")
            last_good = fit
            fits.append(fit)
        except Exception:
            if last_good is not None:
                carried = DccFit.from_dict(last_good.to_dict())
                carried.carried_forward = True
                fits.append(carried)
            else:
                fits.append(None)
    first_good = next((f for f in fits if f is not None), None)
    if first_good is None:
        raise RuntimeError("no window produced a valid fit")
    backfilled = []
    for f in fits:
        if f is None:
            lead = DccFit.from_dict(first_good.to_dict())
            lead.carried_forward = True
            backfilled.append(lead)
        else:
            backfilled.append(f)
    return backfilled
