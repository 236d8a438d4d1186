"""Autoregressive feedforward generator over a sliding condition window.

One network call maps (flattened condition window, flattened absolute
condition window, noise) to the next return vector; longer paths are
generated by appending each step to the window and dropping its oldest
column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.nn import FeedForwardNet

__all__ = ["ArFnnModel", "rollout", "sample_conditional"]


@dataclass
class ArFnnModel:
    network: FeedForwardNet
    n_instruments: int
    noise_dim: int
    condition_length: int = 40

    def __post_init__(self):
        expected = 2 * self.n_instruments * self.condition_length + self.noise_dim
        if self.network.in_dim != expected:
            raise ValueError(
                f"network input width {self.network.in_dim} != "
                f"2*N*L + noise = {expected}")
        if self.network.out_dim != self.n_instruments:
            raise ValueError("network output width must equal the instrument count")

    @classmethod
    def build(cls, n_instruments: int, noise_dim: int | None = None,
              condition_length: int = 40, hidden: tuple[int, ...] = (64, 64, 64),
              residual: tuple[bool, ...] | None = None,
              rng: np.random.Generator | None = None) -> "ArFnnModel":
        noise_dim = n_instruments if noise_dim is None else noise_dim
        in_dim = 2 * n_instruments * condition_length + noise_dim
        widths = [in_dim, *hidden, n_instruments]
        if residual is None:
            # residual skips wherever consecutive hidden widths match
            residual = tuple(hidden[i] == hidden[i - 1] for i in range(1, len(hidden)))
            residual = (False, *residual)
        net = FeedForwardNet.build(widths, list(residual), rng=rng)
        return cls(net, n_instruments, noise_dim, condition_length)

    def copy(self) -> "ArFnnModel":
        return ArFnnModel(self.network.copy(), self.n_instruments,
                          self.noise_dim, self.condition_length)

    def input_features(self, conditions: np.ndarray, noise: np.ndarray) -> np.ndarray:
        """Stack (flat condition ++ flat |condition| ++ noise) rows.

        ``conditions`` is (B, N, L) and ``noise`` (B, noise_dim); flattening
        is instrument-major (C order).
        """
        b = conditions.shape[0]
        flat = conditions.reshape(b, -1)
        return np.concatenate([flat, np.abs(flat), noise], axis=1)

    def one_step(self, conditions: np.ndarray, noise: np.ndarray) -> np.ndarray:
        """Next return vector per batch element, (B, N)."""
        return self.network.forward(self.input_features(conditions, noise))


def rollout(model: ArFnnModel, condition: np.ndarray, steps: int,
            noise: np.ndarray) -> np.ndarray:
    """Iterative generation of ``steps`` return vectors.

    ``condition`` is (N, L) for one path or (B, N, L) for a batch; ``noise``
    must hold exactly steps x noise_dim values per path. Output is (N, steps)
    or (B, N, steps).
    """
    condition = np.asarray(condition, dtype=np.float64)
    single = condition.ndim == 2
    window = condition[None, :, :].copy() if single else condition.copy()
    b = window.shape[0]
    if window.shape[1] != model.n_instruments or \
            window.shape[2] != model.condition_length:
        raise ValueError(f"condition must be (N={model.n_instruments}, "
                         f"L={model.condition_length})")
    noise = np.asarray(noise, dtype=np.float64)
    expected = (steps, model.noise_dim) if single else (b, steps, model.noise_dim)
    if noise.shape != expected:
        raise ValueError(f"noise must have shape {expected}, got {noise.shape}")
    if single:
        noise = noise[None, :, :]
    out = np.empty((b, model.n_instruments, steps))
    for t in range(steps):
        step = model.one_step(window, noise[:, t, :])
        out[:, :, t] = step
        window = np.concatenate([window[:, :, 1:], step[:, :, None]], axis=2)
    return out[0] if single else out


def sample_conditional(model: ArFnnModel, condition: np.ndarray, batch: int,
                       seed: int, steps: int | None = None) -> np.ndarray:
    """Independent rollouts with per-path noise; deterministic per seed."""
    steps = model.condition_length if steps is None else steps
    condition = np.asarray(condition, dtype=np.float64)
    if batch == 0:
        return np.empty((0, model.n_instruments, steps))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((batch, steps, model.noise_dim))
    conditions = np.repeat(condition[None, :, :], batch, axis=0)
    return rollout(model, conditions, steps, noise)


class ArFnnSampler:
    """Adapter exposing the scoring-module sampler protocol."""

    def __init__(self, model: ArFnnModel):
        self.model = model

    def sample(self, condition: np.ndarray, start: int, batch: int,
               seed: int) -> np.ndarray:
        return sample_conditional(self.model, condition, batch, seed)
