"""Adam stochastic gradient optimizer."""

from __future__ import annotations

import numpy as np

__all__ = ["AdamState"]


class AdamState:
    """Per-parameter first/second moment accumulators plus a step counter.

    The update is the standard bias-corrected rule; with zero gradients from
    a fresh state the parameters are a fixed point.
    """

    def __init__(self, learning_rate: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        if learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)
        self.step_count = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
        """Return updated parameters; accumulators are advanced in place."""
        if len(params) != len(grads):
            raise ValueError("params and grads length mismatch")
        if self._m is None:
            self._m = [np.zeros_like(p, dtype=np.float64) for p in params]
            self._v = [np.zeros_like(p, dtype=np.float64) for p in params]
        if len(self._m) != len(params):
            raise ValueError("parameter count changed between steps")
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            g = np.asarray(g, dtype=np.float64)
            if g.shape != np.shape(p):
                raise ValueError(f"grad shape {g.shape} != param shape {np.shape(p)}")
            if not np.all(np.isfinite(g)):
                raise FloatingPointError("non-finite gradient")
            self._m[i] = self.beta1 * self._m[i] + (1.0 - self.beta1) * g
            self._v[i] = self.beta2 * self._v[i] + (1.0 - self.beta2) * g * g
            m_hat = self._m[i] / bc1
            v_hat = self._v[i] / bc2
            out.append(p - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon))
        return out
