import numpy as np
import pytest

from ftsbench.core import autodiff as ad
from ftsbench.core.nn import FeedForwardNet


def finite_difference(fn, params, step=1e-5):
    """Central finite differences of a scalar function of a list of arrays."""
    work = [np.array(p, dtype=np.float64) for p in params]
    grads = []
    for p in work:
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            hi = fn(work)
            flat[i] = orig - step
            lo = fn(work)
            flat[i] = orig
            gflat[i] = (hi - lo) / (2.0 * step)
        grads.append(g)
    return grads


def relative_gradient_error(analytic, numeric):
    a = np.concatenate([np.ravel(g) for g in analytic])
    n = np.concatenate([np.ravel(g) for g in numeric])
    denom = max(np.max(np.abs(a)), np.max(np.abs(n)), 1e-8)
    return np.max(np.abs(a - n)) / denom


def test_gradient_of_identity_is_one():
    tape = ad.Tape()
    p = tape.variable(3.7)
    grads = tape.backward(p)
    assert grads[p] == pytest.approx(1.0)


def test_gradient_of_sum_of_squares():
    tape = ad.Tape()
    p = tape.variable([1.0, -2.0, 0.5])
    loss = ad.reduce_sum(ad.square(p))
    grads = tape.backward(loss)
    np.testing.assert_allclose(grads[p], [2.0, -4.0, 1.0])


def test_non_scalar_loss_rejected():
    tape = ad.Tape()
    p = tape.variable([1.0, 2.0])
    with pytest.raises(ad.NonScalarLossError):
        tape.backward(p)


def test_foreign_node_rejected():
    t1, t2 = ad.Tape(), ad.Tape()
    p = t1.variable(1.0)
    loss = ad.square(p)
    with pytest.raises(ad.IncompleteTapeError):
        t2.backward(loss)


def test_unused_variable_gets_zero_gradient():
    tape = ad.Tape()
    p = tape.variable([1.0, 2.0])
    q = tape.variable([5.0])
    loss = ad.reduce_sum(ad.square(p))
    grads = tape.backward(loss)
    np.testing.assert_allclose(grads[q], [0.0])


def test_broadcast_add_gradient():
    # (2,3) matrix plus (3,) bias: bias adjoint sums over the batch axis.
    tape = ad.Tape()
    m = tape.variable(np.arange(6.0).reshape(2, 3))
    b = tape.variable([1.0, 2.0, 3.0])
    loss = ad.reduce_sum(ad.square(ad.add(m, b)))

    def f(params):
        mm, bb = params
        return float(np.sum((mm + bb) ** 2))

    grads = tape.backward(loss)
    fd = finite_difference(f, [m.value.copy(), b.value.copy()])
    assert relative_gradient_error([grads[m], grads[b]], fd) < 1e-6


@pytest.mark.parametrize("seed", range(6))
def test_mixed_op_graph_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    a0 = rng.normal(size=(3, 4))
    b0 = rng.normal(size=(4, 2))
    c0 = rng.normal(size=(3, 2))
    s0 = np.float64(0.3)

    def f(params):
        a, b, c, s = params
        h = a @ b
        h = np.where(h > 0, h, s * h)
        h = h * c
        h = h + np.exp(-(c ** 2))
        return float(np.mean(np.log1p(np.exp(-np.abs(h))) + np.maximum(h, 0)))

    params = [a0, b0, c0, s0]
    tape = ad.Tape()
    nodes = [tape.variable(p) for p in params]
    a, b, c, s = nodes
    h = ad.matmul(a, b)
    h = ad.prelu(h, s)
    h = ad.mul(h, c)
    h = ad.add(h, ad.exp(ad.neg(ad.square(c))))
    loss = ad.reduce_mean(ad.softplus(h))
    grads = tape.backward(loss)

    fd = finite_difference(f, [p.copy() for p in params])
    analytic = [grads[n] for n in nodes]
    assert relative_gradient_error(analytic, fd) < 1e-6


def test_concat_narrow_take_rows_gradients():
    rng = np.random.default_rng(7)
    x0 = rng.normal(size=(4, 3))
    y0 = rng.normal(size=(4, 2))

    def f(params):
        x, y = params
        z = np.concatenate([x, y], axis=1)
        w = z[:, 1:4]
        t = w[[0, 2, 2], :]
        return float(np.sum(t ** 2))

    tape = ad.Tape()
    x = tape.variable(x0)
    y = tape.variable(y0)
    z = ad.concat([x, y], axis=1)
    w = ad.narrow(z, axis=1, start=1, length=3)
    t = ad.take_rows(w, np.array([0, 2, 2]))
    loss = ad.reduce_sum(ad.square(t))
    grads = tape.backward(loss)
    fd = finite_difference(f, [x0.copy(), y0.copy()])
    assert relative_gradient_error([grads[x], grads[y]], fd) < 1e-6


def test_reduce_ops_axis_gradients():
    rng = np.random.default_rng(11)
    x0 = rng.normal(size=(3, 5))

    def f(params):
        (x,) = params
        row_mean = x.mean(axis=1, keepdims=True)
        centered = x - row_mean
        return float(np.sum(centered.sum(axis=0) ** 2))

    tape = ad.Tape()
    x = tape.variable(x0)
    row_mean = ad.reduce_mean(x, axis=1, keepdims=True)
    centered = ad.sub(x, row_mean)
    loss = ad.reduce_sum(ad.square(ad.reduce_sum(centered, axis=0)))
    grads = tape.backward(loss)
    fd = finite_difference(f, [x0.copy()])
    assert relative_gradient_error([grads[x]], fd) < 1e-6


def test_random_small_nets_match_finite_differences():
    # Spot check here; the full 100-config sweep lives in the acceptance suite.
    rng = np.random.default_rng(42)
    for trial in range(10):
        n_hidden = int(rng.integers(0, 4))
        widths = [int(rng.integers(2, 17))]
        for _ in range(n_hidden):
            widths.append(int(rng.integers(2, 17)))
        widths.append(int(rng.integers(1, 17)))
        residual = [bool(rng.integers(0, 2)) and widths[i] == widths[i + 1]
                    for i in range(n_hidden)]
        net = FeedForwardNet.build(widths, residual, rng=rng)
        x = rng.normal(size=widths[0])
        target = rng.normal(size=widths[-1])

        tape = ad.Tape()
        pvars = net.register(tape)
        out = net.forward_tape(tape, tape.constant(x), pvars)
        loss = ad.reduce_sum(ad.square(ad.sub(out, tape.constant(target))))
        grads = tape.backward(loss)
        analytic = [grads[p] for p in pvars]

        base = net.parameters()

        def f(params):
            net.set_parameters(params)
            return float(np.sum((net.forward(x) - target) ** 2))

        fd = finite_difference(f, [p.copy() for p in base])
        net.set_parameters(base)
        assert relative_gradient_error(analytic, fd) < 1e-5, f"trial {trial}"
