"""Conditional generative model training: moment matching and adversarial.

Both trainers share the one-step generator shape (target = next return
vector), checkpoint on a validation distribution-distance metric every
``check_interval`` optimizer steps, and stop after ``patience`` consecutive
checks without improvement. The step-0 check evaluates the untrained model,
so patience 0 returns the initial network after a single check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import autodiff as ad
from ..core.optim import AdamState
from ..evaluation.scoring import ScoreConfig, score_model
from .arfnn import ArFnnModel, ArFnnSampler
from .mmd import (DEFAULT_MULTIPLIERS, MmdSpec, ZeroBandwidthError,
                  median_bandwidth, mmd_squared_tape)

__all__ = ["TrainConfig", "GmmnModel", "RcganModel", "TrainingDivergedError",
           "ModeCollapseError", "gmmn_loss", "train_gmmn", "train_rcgan"]

_VAR_FLOOR = 1e-30  # windows below this per-instrument variance are skipped


class TrainingDivergedError(RuntimeError):
    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = history


class ModeCollapseError(TrainingDivergedError):
    pass


@dataclass
class TrainConfig:
    batch_size: int = 64
    steps: int = 2000
    learning_rate: float = 1e-3
    disc_learning_rate: float = 2e-3
    check_interval: int = 250
    patience: int = 3
    seed: int = 0
    hidden: tuple[int, ...] = (64, 64, 64)
    disc_hidden: tuple[int, ...] = (64, 64)
    noise_dim: int | None = None
    mmd_multipliers: tuple[float, ...] = DEFAULT_MULTIPLIERS
    val_stride: int = 16
    val_batch: int = 16

    def __post_init__(self):
        for name in ("batch_size", "steps", "learning_rate",
                     "disc_learning_rate", "check_interval", "val_stride",
                     "val_batch"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")


@dataclass
class GmmnModel:
    generator: ArFnnModel
    config: TrainConfig
    history: list = field(default_factory=list)
    best_val: float = np.inf
    corr_windows_skipped: int = 0

    def sampler(self) -> ArFnnSampler:
        return ArFnnSampler(self.generator)


@dataclass
class RcganModel:
    generator: ArFnnModel
    discriminator: "object"
    config: TrainConfig
    history: list = field(default_factory=list)
    best_val: float = np.inf

    def sampler(self) -> ArFnnSampler:
        return ArFnnSampler(self.generator)


def _one_step_windows(returns: np.ndarray, length: int
                      ) -> tuple[np.ndarray, np.ndarray]:
    """All (condition window, next step) pairs of a panel, (K,N,L) and (K,N)."""
    returns = np.asarray(returns, dtype=np.float64)
    t, n = returns.shape
    if t < length + 1:
        raise ValueError("panel too short for one-step training windows")
    view = np.lib.stride_tricks.sliding_window_view(returns, (length, n))[:, 0]
    conds = view[:-1].transpose(0, 2, 1)      # (K, N, L)
    targets = returns[length:]                # (K, N)
    return np.ascontiguousarray(conds), targets


def _window_corr_vectors(windows: np.ndarray) -> tuple[np.ndarray, int]:
    """Lower-triangle correlations per (B, N, L) window; degenerate windows
    are dropped and counted."""
    b, n, length = windows.shape
    mean = windows.mean(axis=2, keepdims=True)
    centered = windows - mean
    cov = np.einsum("bit,bjt->bij", centered, centered) / length
    var = np.einsum("bii->bi", cov)
    good = np.all(var > _VAR_FLOOR, axis=1)
    skipped = int(b - good.sum())
    cov = cov[good]
    std = np.sqrt(var[good])
    corr = cov / (std[:, :, None] * std[:, None, :])
    rows, cols = np.tril_indices(n, k=-1)
    return corr[:, rows, cols], skipped


def _generated_corr_node(tape: ad.Tape, gen: ad.Node, tails: np.ndarray
                         ) -> tuple[ad.Node | None, int]:
    """Correlation vectors of [condition tail ++ generated step] windows.

    Only the last column of each window is a tape variable, so the
    covariance decomposes into constants plus rank-one terms in the
    generated step: cov_ij = (A_ij + g_i g_j)/L - (s_i+g_i)(s_j+g_j)/L^2.
    """
    b, n, tail_len = tails.shape
    length = tail_len + 1
    s = tails.sum(axis=2)
    a = np.einsum("bit,bjt->bij", tails, tails)

    g_val = gen.value
    var_val = (np.einsum("bii->bi", a) + g_val ** 2) / length \
        - (s + g_val) ** 2 / length ** 2
    good = np.all(var_val > _VAR_FLOOR, axis=1)
    skipped = int(b - good.sum())
    if skipped:
        keep = np.nonzero(good)[0]
        gen = ad.take_rows(gen, keep)
        s, a = s[keep], a[keep]
    if gen.value.shape[0] == 0:
        return None, skipped

    inv_l = 1.0 / length
    inv_l2 = 1.0 / length ** 2
    cols = [ad.narrow(gen, 1, i, 1) for i in range(n)]
    shifted = [ad.add(c, s[:, i:i + 1]) for i, c in enumerate(cols)]
    variances = []
    for i in range(n):
        quad = ad.mul(ad.add(ad.square(cols[i]), a[:, i:i + 1, i][:, :, 0] if False else a[:, i, i][:, None]), inv_l)
        variances.append(ad.sub(quad, ad.mul(ad.square(shifted[i]), inv_l2)))
    stds = [ad.sqrt(v) for v in variances]
    pieces = []
    for i in range(n):
        for j in range(i):
            cov = ad.sub(
                ad.mul(ad.add(ad.mul(cols[i], cols[j]), a[:, i, j][:, None]), inv_l),
                ad.mul(ad.mul(shifted[i], shifted[j]), inv_l2))
            pieces.append(ad.div(cov, ad.mul(stds[i], stds[j])))
    return ad.concat(pieces, axis=1), skipped


def gmmn_loss(tape: ad.Tape, gen: ad.Node, targets: np.ndarray,
              conditions: np.ndarray,
              multipliers: tuple[float, ...] = DEFAULT_MULTIPLIERS
              ) -> tuple[ad.Node, dict]:
    """MMD^2(returns) + MMD^2(absolute returns) + MMD^2(window correlations).

    The base bandwidth of each channel is recomputed from the pooled real
    and generated samples of the current batch.
    """
    targets = np.asarray(targets, dtype=np.float64)
    conditions = np.asarray(conditions, dtype=np.float64)
    gen_val = gen.value
    diagnostics = {"skipped_real": 0, "skipped_generated": 0}

    spec_r = MmdSpec(median_bandwidth(np.vstack([targets, gen_val])), multipliers)
    loss = mmd_squared_tape(tape, targets, gen, spec_r)

    abs_gen = ad.absolute(gen)
    spec_a = MmdSpec(median_bandwidth(np.vstack([np.abs(targets),
                                                 np.abs(gen_val)])), multipliers)
    loss = ad.add(loss, mmd_squared_tape(tape, np.abs(targets), abs_gen, spec_a))

    n = targets.shape[1]
    if n >= 2:
        tails = conditions[:, :, 1:]
        real_windows = np.concatenate([tails, targets[:, :, None]], axis=2)
        real_corr, skipped_real = _window_corr_vectors(real_windows)
        corr_node, skipped_gen = _generated_corr_node(tape, gen, tails)
        diagnostics["skipped_real"] = skipped_real
        diagnostics["skipped_generated"] = skipped_gen
        if real_corr.shape[0] and corr_node is not None:
            pooled = np.vstack([real_corr, corr_node.value])
            try:
                spec_c = MmdSpec(median_bandwidth(pooled), multipliers)
            except ZeroBandwidthError:
                spec_c = None
            if spec_c is not None:
                loss = ad.add(loss, mmd_squared_tape(tape, real_corr, corr_node,
                                                     spec_c))
    return loss, diagnostics


def _validation_metric(model: ArFnnModel, val_returns: np.ndarray,
                       config: TrainConfig) -> float:
    column, _ = score_model(
        val_returns, ArFnnSampler(model),
        ScoreConfig(batch=config.val_batch, window_stride=config.val_stride,
                    seed=20_000_000 + config.seed))
    return float(np.nanmean([column[m] for m in column]))


def _snapshot(net) -> list[np.ndarray]:
    return [p.copy() for p in net.parameters()]


def train_gmmn(train_returns: np.ndarray, val_returns: np.ndarray,
               config: TrainConfig | None = None) -> GmmnModel:
    """Minimize the three-channel MMD loss over the generator weights."""
    config = config or TrainConfig()
    train_returns = np.asarray(train_returns, dtype=np.float64)
    n = train_returns.shape[1]
    rng = np.random.default_rng(config.seed)
    model = ArFnnModel.build(n, noise_dim=config.noise_dim,
                             hidden=config.hidden, rng=rng)
    conds, targets = _one_step_windows(train_returns, model.condition_length)
    k = conds.shape[0]
    adam = AdamState(learning_rate=config.learning_rate)
    history: list[tuple[int, float, float]] = []
    skipped_total = 0

    best_val = np.inf
    best_params = _snapshot(model.network)
    checks_without_improve = 0
    step = 0
    last_loss = np.nan
    while True:
        metric = _validation_metric(model, val_returns, config)
        history.append((step, last_loss, metric))
        if metric < best_val:
            best_val = metric
            best_params = _snapshot(model.network)
            checks_without_improve = 0
        else:
            checks_without_improve += 1
        if checks_without_improve >= config.patience or step >= config.steps:
            break
        for _ in range(min(config.check_interval, config.steps - step)):
            idx = rng.integers(k, size=config.batch_size)
            noise = rng.standard_normal((config.batch_size, model.noise_dim))
            tape = ad.Tape()
            params = model.network.register(tape)
            features = model.input_features(conds[idx], noise)
            try:
                gen = model.network.forward_tape(tape, tape.constant(features),
                                                 params)
                loss, diag = gmmn_loss(tape, gen, targets[idx], conds[idx],
                                       config.mmd_multipliers)
                grads = tape.backward(loss)
            except FloatingPointError as exc:
                raise TrainingDivergedError(f"non-finite loss at step {step}: {exc}",
                                            history) from exc
            skipped_total += diag["skipped_real"] + diag["skipped_generated"]
            last_loss = float(loss.value)
            new = adam.step([p.value for p in params], [grads[p] for p in params])
            model.network.set_parameters(new)
            step += 1

    model.network.set_parameters(best_params)
    return GmmnModel(generator=model, config=config, history=history,
                     best_val=best_val, corr_windows_skipped=skipped_total)


def train_rcgan(train_returns: np.ndarray, val_returns: np.ndarray,
                config: TrainConfig | None = None) -> RcganModel:
    """Alternating discriminator/generator training on one-step targets.

    The discriminator scores (condition ++ absolute condition ++ candidate
    step); the generator uses the non-saturating objective. A generated
    batch whose dispersion stays under 1% of the real batch for 5
    consecutive checks aborts with diagnostics.
    """
    from ..core.nn import FeedForwardNet

    config = config or TrainConfig()
    train_returns = np.asarray(train_returns, dtype=np.float64)
    n = train_returns.shape[1]
    rng = np.random.default_rng(config.seed)
    model = ArFnnModel.build(n, noise_dim=config.noise_dim,
                             hidden=config.hidden, rng=rng)
    cond_feat_dim = 2 * n * model.condition_length
    disc = FeedForwardNet.build([cond_feat_dim + n, *config.disc_hidden, 1],
                                rng=rng)
    conds, targets = _one_step_windows(train_returns, model.condition_length)
    k = conds.shape[0]
    adam_g = AdamState(learning_rate=config.learning_rate)
    adam_d = AdamState(learning_rate=config.disc_learning_rate)
    history: list[tuple[int, float, float, float]] = []

    real_std = float(targets.std())
    collapse_streak = 0
    best_val = np.inf
    best_params = _snapshot(model.network)
    checks_without_improve = 0
    step = 0
    last_d = last_g = np.nan
    while True:
        metric = _validation_metric(model, val_returns, config)
        history.append((step, last_d, last_g, metric))
        probe_idx = np.arange(0, k, max(1, k // 64))[:64]
        probe_noise = np.random.default_rng(config.seed + 999).standard_normal(
            (probe_idx.size, model.noise_dim))
        gen_std = float(model.one_step(conds[probe_idx], probe_noise).std())
        if gen_std < 0.01 * real_std:
            collapse_streak += 1
            if collapse_streak >= 5:
                raise ModeCollapseError(
                    f"generated dispersion {gen_std:.3g} under 1% of real "
                    f"{real_std:.3g} for 5 checks", history)
        else:
            collapse_streak = 0
        if metric < best_val:
            best_val = metric
            best_params = _snapshot(model.network)
            checks_without_improve = 0
        else:
            checks_without_improve += 1
        if checks_without_improve >= config.patience or step >= config.steps:
            break

        for _ in range(min(config.check_interval, config.steps - step)):
            idx = rng.integers(k, size=config.batch_size)
            noise = rng.standard_normal((config.batch_size, model.noise_dim))
            cond_feats = np.concatenate(
                [conds[idx].reshape(idx.size, -1),
                 np.abs(conds[idx].reshape(idx.size, -1))], axis=1)
            try:
                # discriminator step: generator held fixed
                fake = model.one_step(conds[idx], noise)
                tape_d = ad.Tape()
                d_params = disc.register(tape_d)
                s_real = disc.forward_tape(
                    tape_d,
                    tape_d.constant(np.concatenate([cond_feats, targets[idx]], axis=1)),
                    d_params)
                s_fake = disc.forward_tape(
                    tape_d,
                    tape_d.constant(np.concatenate([cond_feats, fake], axis=1)),
                    d_params)
                loss_d = ad.add(ad.reduce_mean(ad.softplus(ad.neg(s_real))),
                                ad.reduce_mean(ad.softplus(s_fake)))
                grads_d = tape_d.backward(loss_d)
                disc.set_parameters(adam_d.step([p.value for p in d_params],
                                                [grads_d[p] for p in d_params]))

                # generator step: non-saturating loss through the (frozen) critic
                tape_g = ad.Tape()
                g_params = model.network.register(tape_g)
                features = model.input_features(conds[idx], noise)
                gen = model.network.forward_tape(tape_g,
                                                 tape_g.constant(features), g_params)
                d_input = ad.concat([tape_g.constant(cond_feats), gen], axis=1)
                d_const = [tape_g.constant(p) for p in disc.parameters()]
                s_gen = disc.forward_tape(tape_g, d_input, d_const)
                loss_g = ad.reduce_mean(ad.softplus(ad.neg(s_gen)))
                grads_g = tape_g.backward(loss_g)
                model.network.set_parameters(
                    adam_g.step([p.value for p in g_params],
                                [grads_g[p] for p in g_params]))
            except FloatingPointError as exc:
                raise TrainingDivergedError(f"non-finite loss at step {step}: {exc}",
                                            history) from exc
            last_d = float(loss_d.value)
            last_g = float(loss_g.value)
            step += 1

    model.network.set_parameters(best_params)
    return RcganModel(generator=model, discriminator=disc, config=config,
                      history=history, best_val=best_val)
