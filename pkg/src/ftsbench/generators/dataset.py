"""Synthetic dataset assembly: stitched parameter segments, correlation and
regime layers, jumps, burn-in handling, splits and conditioning windows."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ..core.linalg import cholesky
from .fsv import FsvForwardParams, simulate_fsv_forward
from .heston import HestonParams
from .layers import (BlockCorrelationSpec, JumpConfig, RegimeConfig,
                     regime_threshold, sample_jumps)
from .ngarch import NGarchParams
from .panel import ReturnPanel

__all__ = ["Segment", "GeneratorSpec", "build_dataset", "split_dataset",
           "conditioning_windows", "apply_regimes"]

CONDITION_LENGTH = 40
TARGET_LENGTH = 40

_PARAM_TYPES = {"ngarch": NGarchParams, "heston": HestonParams, "fsv": FsvForwardParams}


@dataclass(frozen=True)
class Segment:
    """One parameterization stretch: per-instrument params and its length."""

    length: int
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if self.length < CONDITION_LENGTH:
            raise ValueError(f"segment length must be >= {CONDITION_LENGTH}")
        if not self.params:
            raise ValueError("segment needs at least one parameter set")


@dataclass(frozen=True)
class GeneratorSpec:
    """Full description of one synthetic dataset."""

    family: str
    segments: tuple[Segment, ...]
    correlation: BlockCorrelationSpec | None = None
    regimes: RegimeConfig | None = None
    jumps: JumpConfig | None = None
    burn_in: int = 500
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.family not in _PARAM_TYPES:
            raise ValueError(f"unknown model family {self.family!r}")
        if not self.segments:
            raise ValueError("at least one segment required")
        ptype = _PARAM_TYPES[self.family]
        n = self.n_instruments
        for seg in self.segments:
            for p in seg.params:
                if not isinstance(p, ptype):
                    raise TypeError(f"{self.family} segments need {ptype.__name__}")
            if self.family != "fsv" and len(seg.params) != n:
                raise ValueError("all segments must cover the same instruments")
        if self.family == "fsv" and (self.correlation or self.regimes or self.jumps):
            raise ValueError("fsv datasets use the loading matrix for dependence; "
                             "correlation/regime/jump layers are not supported")
        if self.regimes is not None and self.correlation is not None:
            raise ValueError("with regimes the low/high specs define the correlation; "
                             "leave the base correlation unset")
        if self.burn_in < 0:
            raise ValueError("burn-in must be non-negative")
        if self.regimes is not None and self.burn_in < self.regimes.window + 1:
            raise ValueError("burn-in too short for the regime rolling window")

    @property
    def n_instruments(self) -> int:
        if self.family == "fsv":
            return self.segments[0].params[0].n_instruments
        return len(self.segments[0].params)

    @property
    def total_length(self) -> int:
        return sum(seg.length for seg in self.segments)

    def to_dict(self) -> dict:
        def params_dict(p):
            if self.family == "fsv":
                return {"loadings": p.loadings.tolist(),
                        "ar_mean": p.ar_mean.tolist(),
                        "ar_phi": p.ar_phi.tolist(),
                        "ar_std": p.ar_std.tolist(),
                        "upper_triangular": p.upper_triangular}
            return p.to_dict()

        return {
            "family": self.family,
            "segments": [{"length": s.length, "params": [params_dict(p) for p in s.params]}
                         for s in self.segments],
            "correlation": None if self.correlation is None else self.correlation.to_dict(),
            "regimes": None if self.regimes is None else self.regimes.to_dict(),
            "jumps": None if self.jumps is None else self.jumps.to_dict(),
            "burn_in": self.burn_in,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        family = d["family"]

        def parse_params(pd):
            if family == "fsv":
                return FsvForwardParams(np.asarray(pd["loadings"]),
                                        np.asarray(pd["ar_mean"]),
                                        np.asarray(pd["ar_phi"]),
                                        np.asarray(pd["ar_std"]),
                                        bool(pd.get("upper_triangular", False)))
            return _PARAM_TYPES[family].from_dict(pd)

        segments = tuple(Segment(int(s["length"]), tuple(parse_params(p) for p in s["params"]))
                         for s in d["segments"])
        return cls(
            family=family,
            segments=segments,
            correlation=None if d.get("correlation") is None
            else BlockCorrelationSpec.from_dict(d["correlation"]),
            regimes=None if d.get("regimes") is None
            else RegimeConfig.from_dict(d["regimes"]),
            jumps=None if d.get("jumps") is None else JumpConfig.from_dict(d["jumps"]),
            burn_in=int(d.get("burn_in", 500)),
            seed=int(d.get("seed", 0)),
        )

    def content_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _segment_index(spec: GeneratorSpec, t_raw: int) -> np.ndarray:
    """Segment id per raw step; the burn-in prefix runs on segment 0."""
    idx = np.zeros(t_raw, dtype=np.int64)
    pos = spec.burn_in
    for i, seg in enumerate(spec.segments):
        idx[pos:pos + seg.length] = i
        pos += seg.length
    return idx


def _build_fsv(spec: GeneratorSpec) -> ReturnPanel:
    ss = np.random.SeedSequence(spec.seed)
    children = ss.spawn(len(spec.segments))
    parts = []
    for i, seg in enumerate(spec.segments):
        steps = seg.length + (spec.burn_in if i == 0 else 0)
        part = simulate_fsv_forward(seg.params[0], steps,
                                    np.random.default_rng(children[i]))
        parts.append(part)
    returns = np.vstack([p.returns for p in parts])[spec.burn_in:]
    variance = np.vstack([p.variance for p in parts])[spec.burn_in:]
    return ReturnPanel(returns, parts[0].instruments, variance=variance,
                       spec_hash=spec.content_hash(), meta={"spec": spec.to_dict()})


def build_dataset(spec: GeneratorSpec) -> ReturnPanel:
    """Simulate the full panel described by ``spec``, deterministically.

    Segments run with their own parameters (recursion state restarts at each
    boundary) and are concatenated; the regime trigger and jump layer act on
    the final (jump-inclusive) returns; the burn-in prefix is discarded.
    """
    if spec.family == "fsv":
        return _build_fsv(spec)

    n = spec.n_instruments
    t_raw = spec.burn_in + spec.total_length
    ss = np.random.SeedSequence(spec.seed)
    shock_child, jump_child = ss.spawn(2)
    shock_rng = np.random.default_rng(shock_child)

    raw = shock_rng.standard_normal((t_raw, n))
    if spec.family == "heston":
        raw_var = shock_rng.standard_normal((t_raw, n))

    if spec.jumps is not None:
        additions, counts, large_day = sample_jumps(
            spec.jumps, t_raw, n, np.random.default_rng(jump_child))
    else:
        additions = counts = large_day = None

    if spec.regimes is not None:
        lowers = [cholesky(spec.regimes.low.matrix()),
                  cholesky(spec.regimes.high.matrix())]
        window = spec.regimes.window
    elif spec.correlation is not None:
        lowers = [cholesky(spec.correlation.matrix())] * 2
        window = None
    else:
        lowers = [np.eye(n)] * 2
        window = None

    seg_of = _segment_index(spec, t_raw)
    segments = spec.segments
    returns = np.empty((t_raw, n))
    variance = np.empty((t_raw, n))
    labels = np.zeros(t_raw, dtype=np.int64)

    # rolling cross-sectional volatility measure, kept causal via a ring buffer
    if window is not None:
        ring = np.zeros((window, n))
        ring_sum = np.zeros(n)
        ring_sum2 = np.zeros(n)
        measures = np.full(t_raw, np.nan)
        threshold = None

    current_seg = -1
    for t in range(t_raw):
        seg = seg_of[t]
        if seg != current_seg:
            current_seg = seg
            params = segments[seg].params
            if spec.family == "ngarch":
                mu = np.array([p.mu for p in params])
                omega = np.array([p.omega for p in params])
                alpha = np.array([p.alpha for p in params])
                beta = np.array([p.beta for p in params])
                gamma = np.array([p.gamma for p in params])
                sigma2 = np.array([p.sigma0 ** 2 for p in params])
            else:
                mu = np.array([p.mu for p in params])
                kappa = np.array([p.kappa for p in params])
                theta = np.array([p.theta for p in params])
                sigma_v = np.array([p.sigma_v for p in params])
                rho = np.array([p.rho for p in params])
                v_tilde = np.array([p.v0 for p in params])
                dts = {p.dt for p in params}
                if len(dts) != 1:
                    raise ValueError("all instruments must share the same dt")
                dt = dts.pop()
                sqdt = np.sqrt(dt)
                rho_c = np.sqrt(np.maximum(0.0, 1.0 - rho ** 2))

        label = 0
        if window is not None:
            if t >= window:
                var = np.maximum(ring_sum2 / window - (ring_sum / window) ** 2, 0.0)
                measures[t] = np.mean(np.sqrt(var))
            if t == spec.burn_in:
                threshold = regime_threshold(measures, spec.burn_in,
                                             spec.regimes.percentile, window)
            if t >= spec.burn_in and measures[t] > threshold:
                label = 1
        labels[t] = label

        z = lowers[label] @ raw[t]
        if spec.family == "ngarch":
            sigma = np.sqrt(sigma2)
            eps = sigma * z
            r = mu + eps
            variance[t] = sigma2
            sigma2 = omega + beta * (eps - gamma * sigma) ** 2 + alpha * sigma2
        else:
            z_v = rho * z + rho_c * raw_var[t]
            v_plus = np.maximum(v_tilde, 0.0)
            vol = np.sqrt(v_plus)
            r = (mu - 0.5 * v_plus) * dt + vol * sqdt * z
            variance[t] = v_plus
            v_tilde = v_tilde + kappa * (theta - v_plus) * dt + sigma_v * vol * sqdt * z_v

        if additions is not None:
            r = r + additions[t]
        returns[t] = r

        if window is not None:
            slot = t % window
            ring_sum += r - ring[slot]
            ring_sum2 += r * r - ring[slot] * ring[slot]
            ring[slot] = r

    cut = spec.burn_in
    return ReturnPanel(
        returns=returns[cut:],
        instruments=[f"I{i:02d}" for i in range(n)],
        variance=variance[cut:],
        jump_counts=None if counts is None else counts[cut:],
        vol_regime=labels[cut:] if spec.regimes is not None else None,
        jump_regime=None if large_day is None else large_day[cut:],
        spec_hash=spec.content_hash(),
        meta={"spec": spec.to_dict()},
    )


def apply_regimes(returns: np.ndarray, config: RegimeConfig,
                  burn_in: int) -> tuple[np.ndarray, np.ndarray]:
    """Regime label series plus the per-label correlation matrices.

    The per-step correlation matrix is ``matrices[labels[t]]``.
    """
    from .layers import regime_labels

    labels = regime_labels(returns, config, burn_in)
    matrices = np.stack([config.low.matrix(), config.high.matrix()])
    return labels, matrices


def split_dataset(panel: ReturnPanel,
                  fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
                  ) -> tuple[ReturnPanel, ReturnPanel, ReturnPanel]:
    """Contiguous chronological train/validation/test split, no shuffling."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    if any(f < 0 for f in fractions):
        raise ValueError("fractions must be non-negative")
    t = panel.n_steps
    n_train = int(np.floor(fractions[0] * t))
    n_val = int(np.floor(fractions[1] * t))
    return (panel.slice_rows(0, n_train),
            panel.slice_rows(n_train, n_train + n_val),
            panel.slice_rows(n_train + n_val, t))


def conditioning_windows(returns: np.ndarray,
                         condition_length: int = CONDITION_LENGTH,
                         target_length: int = TARGET_LENGTH
                         ) -> list[tuple[np.ndarray, np.ndarray]]:
    """Sliding stride-1 (condition, target) pairs as N x L matrices.

    A panel of T steps yields T - condition_length - target_length + 1 pairs.
    """
    if isinstance(returns, ReturnPanel):
        returns = returns.returns
    returns = np.asarray(returns, dtype=np.float64)
    t_total = returns.shape[0]
    need = condition_length + target_length
    if t_total < need:
        raise ValueError(f"panel too short: need at least {need} steps, got {t_total}")
    pairs = []
    for start in range(t_total - need + 1):
        cond = returns[start:start + condition_length].T
        target = returns[start + condition_length:start + need].T
        pairs.append((cond, target))
    return pairs
