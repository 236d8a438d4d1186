"""Small dense feedforward networks with parametric ReLU and residual blocks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad

__all__ = ["Layer", "FeedForwardNet", "DimensionMismatchError"]

DEFAULT_PRELU_SLOPE = 0.25


class DimensionMismatchError(ValueError):
    pass


@dataclass
class Layer:
    """One affine map with an optional PReLU activation and residual skip.

    ``slope`` is a trainable scalar; ``None`` marks a purely affine layer
    (used for the output). A residual layer requires equal in/out width and
    computes ``x + prelu(W x + b)``.
    """

    weight: np.ndarray
    bias: np.ndarray
    slope: np.ndarray | None = None
    residual: bool = False

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise DimensionMismatchError("weight must be (out, in) with matching bias")
        if self.slope is not None:
            self.slope = np.asarray(self.slope, dtype=np.float64).reshape(())
            if not np.isfinite(self.slope):
                raise ValueError("PReLU slope must be finite")
        if self.residual and self.weight.shape[0] != self.weight.shape[1]:
            raise DimensionMismatchError("residual layer requires equal in/out width")

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]


@dataclass
class FeedForwardNet:
    layers: list[Layer] = field(default_factory=list)

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise DimensionMismatchError(
                    f"layer widths incompatible: {prev.out_dim} -> {nxt.in_dim}")

    @classmethod
    def build(cls, widths: list[int], residual: list[bool] | None = None,
              rng: np.random.Generator | None = None,
              slope: float = DEFAULT_PRELU_SLOPE) -> "FeedForwardNet":
        """Glorot-uniform init; PReLU on all but the final (affine) layer."""
        if len(widths) < 2:
            raise ValueError("need at least input and output widths")
        rng = rng or np.random.default_rng(0)
        n_hidden = len(widths) - 2
        if residual is None:
            residual = [False] * n_hidden
        if len(residual) != n_hidden:
            raise ValueError("one residual flag per hidden layer")
        layers = []
        for i in range(len(widths) - 1):
            fan_in, fan_out = widths[i], widths[i + 1]
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
            b = np.zeros(fan_out)
            if i < n_hidden:
                layers.append(Layer(w, b, slope=np.float64(slope), residual=residual[i]))
            else:
                layers.append(Layer(w, b, slope=None, residual=False))
        return cls(layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> list[np.ndarray]:
        params = []
        for layer in self.layers:
            params.append(layer.weight)
            params.append(layer.bias)
            if layer.slope is not None:
                params.append(layer.slope)
        return params

    def set_parameters(self, params: list[np.ndarray]) -> None:
        it = iter(params)
        for layer in self.layers:
            layer.weight = np.asarray(next(it), dtype=np.float64)
            layer.bias = np.asarray(next(it), dtype=np.float64)
            if layer.slope is not None:
                layer.slope = np.asarray(next(it), dtype=np.float64).reshape(())
        rest = list(it)
        if rest:
            raise DimensionMismatchError("too many parameter arrays")

    def copy(self) -> "FeedForwardNet":
        return FeedForwardNet([
            Layer(l.weight.copy(), l.bias.copy(),
                  None if l.slope is None else l.slope.copy(), l.residual)
            for l in self.layers
        ])

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Pure evaluation. ``x`` is (in,) or (batch, in); output matches."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.in_dim:
            raise DimensionMismatchError(
                f"input width {h.shape[1]} != first layer width {self.in_dim}")
        for layer in self.layers:
            z = h @ layer.weight.T + layer.bias
            if layer.slope is not None:
                z = np.where(z > 0, z, layer.slope * z)
            h = h + z if layer.residual else z
        return h[0] if single else h

    def forward_tape(self, tape: ad.Tape, x: ad.Node,
                     param_nodes: list[ad.Node]) -> ad.Node:
        """Differentiable evaluation against previously registered parameters.

        ``param_nodes`` must follow the ``parameters()`` ordering.
        """
        it = iter(param_nodes)
        h = x
        if x.value.shape[-1] != self.in_dim:
            raise DimensionMismatchError(
                f"input width {x.value.shape[-1]} != first layer width {self.in_dim}")
        for layer in self.layers:
            w = next(it)
            b = next(it)
            z = ad.add(ad.matmul(h, ad.transpose(w)), b)
            if layer.slope is not None:
                slope = next(it)
                z = ad.prelu(z, slope)
            h = ad.add(h, z) if layer.residual else z
        return h

    def register(self, tape: ad.Tape) -> list[ad.Node]:
        return [tape.variable(p) for p in self.parameters()]
