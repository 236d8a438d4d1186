"""Reverse-mode automatic differentiation over dense numpy arrays.

A ``Tape`` records every primitive operation applied to its nodes in
topological order. ``Tape.backward`` walks the record in reverse and
accumulates adjoints, returning one gradient array per requested variable.
Only the small set of primitives needed by the feedforward networks and
kernel losses in this package is implemented.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = ["Tape", "Node", "IncompleteTapeError", "NonScalarLossError"]


class IncompleteTapeError(ValueError):
    """Raised when backward is called with a node from another tape."""


class NonScalarLossError(ValueError):
    """Raised when the loss node is not a scalar."""


class Node:
    """Handle to one recorded value on a tape."""

    __slots__ = ("tape", "idx")

    def __init__(self, tape: "Tape", idx: int):
        self.tape = tape
        self.idx = idx

    @property
    def value(self) -> np.ndarray:
        return self.tape._values[self.idx]

    @property
    def shape(self):
        return self.tape._values[self.idx].shape

    # Operator sugar; constants are auto-wrapped onto the same tape.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(self.tape.constant(other), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(self.tape.constant(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape:
    """Single-writer record of primitive operations with parent indices."""

    def __init__(self):
        self._values: list[np.ndarray] = []
        self._parents: list[tuple[int, ...]] = []
        self._vjps: list = []  # callable(adjoint) -> tuple of parent adjoints
        self._needs_grad: list[bool] = []

    def __len__(self) -> int:
        return len(self._values)

    def variable(self, value) -> Node:
        """Leaf node whose gradient will be computed."""
        return self._record(np.asarray(value, dtype=np.float64), (), None, True)

    def constant(self, value) -> Node:
        if isinstance(value, Node):
            if value.tape is not self:
                raise IncompleteTapeError("node belongs to a different tape")
            return value
        return self._record(np.asarray(value, dtype=np.float64), (), None, False)

    def _record(self, value: np.ndarray, parents: tuple[int, ...], vjp, needs_grad: bool) -> Node:
        if not np.all(np.isfinite(value)):
            # Non-finite intermediates poison gradients silently; fail loudly.
            raise FloatingPointError("non-finite value recorded on tape")
        self._values.append(value)
        self._parents.append(parents)
        self._vjps.append(vjp)
        self._needs_grad.append(needs_grad)
        return Node(self, len(self._values) - 1)

    def _wrap_operands(self, *ops) -> list[Node]:
        out = []
        for op in ops:
            out.append(op if isinstance(op, Node) else self.constant(op))
        return out

    def backward(self, loss: Node) -> "Gradients":
        """Adjoints of ``loss`` with respect to every variable on the tape."""
        if loss.tape is not self or loss.idx >= len(self._values):
            raise IncompleteTapeError("loss node is not on this tape")
        if np.size(self._values[loss.idx]) != 1:
            raise NonScalarLossError("loss must be scalar, got shape %r" % (self._values[loss.idx].shape,))
        adjoints: dict[int, np.ndarray] = {loss.idx: np.ones_like(self._values[loss.idx])}
        for idx in range(loss.idx, -1, -1):
            adj = adjoints.pop(idx, None)
            if adj is None or not self._needs_grad[idx]:
                continue
            vjp = self._vjps[idx]
            if vjp is None:
                adjoints[idx] = adj  # variable leaf: keep for the caller
                continue
            for parent, g in zip(self._parents[idx], vjp(adj)):
                if g is None or not self._needs_grad[parent]:
                    continue
                if parent in adjoints:
                    adjoints[parent] = adjoints[parent] + g
                else:
                    adjoints[parent] = g
        return Gradients(self, adjoints)


class Gradients:
    """Gradient lookup for the variables of one backward pass."""

    def __init__(self, tape: Tape, adjoints: dict[int, np.ndarray]):
        self._tape = tape
        self._adjoints = adjoints

    def __getitem__(self, node: Node) -> np.ndarray:
        if node.tape is not self._tape:
            raise IncompleteTapeError("node belongs to a different tape")
        adj = self._adjoints.get(node.idx)
        if adj is None:
            return np.zeros_like(node.value)
        return np.broadcast_to(adj, node.value.shape).astype(np.float64, copy=True)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum an adjoint down to the shape of a broadcast operand."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _binary(a, b):
    if isinstance(a, Node):
        tape = a.tape
    elif isinstance(b, Node):
        tape = b.tape
    else:
        raise TypeError("at least one operand must be a Node")
    a, b = tape._wrap_operands(a, b)
    return tape, a, b


def add(a, b) -> Node:
    tape, a, b = _binary(a, b)
    va, vb = a.value, b.value

    def vjp(g):
        return _unbroadcast(g, va.shape), _unbroadcast(g, vb.shape)

    return tape._record(va + vb, (a.idx, b.idx), vjp,
                        tape._needs_grad[a.idx] or tape._needs_grad[b.idx])


def sub(a, b) -> Node:
    tape, a, b = _binary(a, b)
    va, vb = a.value, b.value

    def vjp(g):
        return _unbroadcast(g, va.shape), _unbroadcast(-g, vb.shape)

    return tape._record(va - vb, (a.idx, b.idx), vjp,
                        tape._needs_grad[a.idx] or tape._needs_grad[b.idx])


def mul(a, b) -> Node:
    tape, a, b = _binary(a, b)
    va, vb = a.value, b.value

    def vjp(g):
        return _unbroadcast(g * vb, va.shape), _unbroadcast(g * va, vb.shape)

    return tape._record(va * vb, (a.idx, b.idx), vjp,
                        tape._needs_grad[a.idx] or tape._needs_grad[b.idx])


def div(a, b) -> Node:
    tape, a, b = _binary(a, b)
    va, vb = a.value, b.value

    def vjp(g):
        return (_unbroadcast(g / vb, va.shape),
                _unbroadcast(-g * va / (vb * vb), vb.shape))

    return tape._record(va / vb, (a.idx, b.idx), vjp,
                        tape._needs_grad[a.idx] or tape._needs_grad[b.idx])


def neg(a: Node) -> Node:
    tape = a.tape
    return tape._record(-a.value, (a.idx,), lambda g: (-g,), tape._needs_grad[a.idx])


def matmul(a, b) -> Node:
    tape, a, b = _binary(a, b)
    va, vb = a.value, b.value

    def vjp(g):
        if va.ndim == 1 and vb.ndim == 1:
            return g * vb, g * va
        if va.ndim == 1:  # (k,) @ (k,m) -> (m,)
            return g @ vb.T, np.outer(va, g)
        if vb.ndim == 1:  # (n,k) @ (k,) -> (n,)
            return np.outer(g, vb), va.T @ g
        return g @ vb.T, va.T @ g

    return tape._record(va @ vb, (a.idx, b.idx), vjp,
                        tape._needs_grad[a.idx] or tape._needs_grad[b.idx])


def transpose(a: Node) -> Node:
    tape = a.tape
    return tape._record(a.value.T.copy(), (a.idx,), lambda g: (g.T,), tape._needs_grad[a.idx])


def exp(a: Node) -> Node:
    tape = a.tape
    out = np.exp(a.value)
    return tape._record(out, (a.idx,), lambda g: (g * out,), tape._needs_grad[a.idx])


def log(a: Node) -> Node:
    tape = a.tape
    va = a.value
    return tape._record(np.log(va), (a.idx,), lambda g: (g / va,), tape._needs_grad[a.idx])


def sqrt(a: Node) -> Node:
    tape = a.tape
    out = np.sqrt(a.value)

    def vjp(g):
        return (g / (2.0 * out),)

    return tape._record(out, (a.idx,), vjp, tape._needs_grad[a.idx])


def square(a: Node) -> Node:
    tape = a.tape
    va = a.value
    return tape._record(va * va, (a.idx,), lambda g: (2.0 * g * va,), tape._needs_grad[a.idx])


def absolute(a: Node) -> Node:
    tape = a.tape
    va = a.value
    return tape._record(np.abs(va), (a.idx,), lambda g: (g * np.sign(va),),
                        tape._needs_grad[a.idx])


def prelu(x: Node, slope) -> Node:
    """Parametric ReLU: x where x > 0, slope * x elsewhere.

    ``slope`` may be a trainable scalar node.
    """
    tape, x, slope = _binary(x, slope)
    vx, vs = x.value, slope.value
    mask = vx > 0
    out = np.where(mask, vx, vs * vx)

    def vjp(g):
        gx = g * np.where(mask, 1.0, vs)
        gs = _unbroadcast(g * np.where(mask, 0.0, vx), vs.shape)
        return gx, gs

    return tape._record(out, (x.idx, slope.idx), vjp,
                        tape._needs_grad[x.idx] or tape._needs_grad[slope.idx])


def sigmoid(a: Node) -> Node:
    tape = a.tape
    va = a.value
    out = np.where(va >= 0, 1.0 / (1.0 + np.exp(-np.abs(va))),
                   np.exp(-np.abs(va)) / (1.0 + np.exp(-np.abs(va))))

    def vjp(g):
        return (g * out * (1.0 - out),)

    return tape._record(out, (a.idx,), vjp, tape._needs_grad[a.idx])


def softplus(a: Node) -> Node:
    """log(1 + exp(a)), evaluated in the overflow-safe form."""
    tape = a.tape
    va = a.value
    out = np.maximum(va, 0.0) + np.log1p(np.exp(-np.abs(va)))
    sig = np.where(va >= 0, 1.0 / (1.0 + np.exp(-np.abs(va))),
                   np.exp(-np.abs(va)) / (1.0 + np.exp(-np.abs(va))))

    def vjp(g):
        return (g * sig,)

    return tape._record(out, (a.idx,), vjp, tape._needs_grad[a.idx])


def reduce_sum(a: Node, axis=None, keepdims: bool = False) -> Node:
    tape = a.tape
    va = a.value
    out = va.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, va.shape).copy(),)

    return tape._record(np.asarray(out, dtype=np.float64), (a.idx,), vjp,
                        tape._needs_grad[a.idx])


def reduce_mean(a: Node, axis=None, keepdims: bool = False) -> Node:
    tape = a.tape
    va = a.value
    count = va.size if axis is None else va.shape[axis]
    out = va.mean(axis=axis, keepdims=keepdims)

    def vjp(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, va.shape).copy() / count,)

    return tape._record(np.asarray(out, dtype=np.float64), (a.idx,), vjp,
                        tape._needs_grad[a.idx])


def concat(nodes: Sequence[Node], axis: int = 0) -> Node:
    if not nodes:
        raise ValueError("concat of empty sequence")
    tape = nodes[0].tape
    nodes = [tape.constant(n) for n in nodes]
    values = [n.value for n in nodes]
    sizes = [v.shape[axis] for v in values]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        slicer = [slice(None)] * g.ndim
        grads = []
        for i in range(len(values)):
            slicer[axis] = slice(offsets[i], offsets[i + 1])
            grads.append(g[tuple(slicer)])
        return tuple(grads)

    needs = any(tape._needs_grad[n.idx] for n in nodes)
    return tape._record(np.concatenate(values, axis=axis),
                        tuple(n.idx for n in nodes), vjp, needs)


def narrow(a: Node, axis: int, start: int, length: int) -> Node:
    """Contiguous slice of ``length`` entries along ``axis``."""
    tape = a.tape
    va = a.value
    slicer = [slice(None)] * va.ndim
    slicer[axis] = slice(start, start + length)
    slicer = tuple(slicer)

    def vjp(g):
        full = np.zeros_like(va)
        full[slicer] = g
        return (full,)

    return tape._record(va[slicer].copy(), (a.idx,), vjp, tape._needs_grad[a.idx])


def take_rows(a: Node, indices: np.ndarray) -> Node:
    tape = a.tape
    va = a.value
    idx = np.asarray(indices, dtype=np.intp)

    def vjp(g):
        full = np.zeros_like(va)
        np.add.at(full, idx, g)
        return (full,)

    return tape._record(va[idx].copy(), (a.idx,), vjp, tape._needs_grad[a.idx])


def reshape(a: Node, shape: Iterable[int]) -> Node:
    tape = a.tape
    va = a.value
    shape = tuple(shape)

    def vjp(g):
        return (g.reshape(va.shape),)

    return tape._record(va.reshape(shape).copy(), (a.idx,), vjp, tape._needs_grad[a.idx])
