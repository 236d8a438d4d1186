import numpy as np
import pytest

from ftsbench.core.nn import FeedForwardNet, Layer, DimensionMismatchError
from ftsbench.core.optim import AdamState


def test_zero_net_maps_everything_to_zero():
    net = FeedForwardNet([
        Layer(np.zeros((3, 2)), np.zeros(3), slope=np.float64(0.25)),
        Layer(np.zeros((2, 3)), np.zeros(2)),
    ])
    np.testing.assert_array_equal(net.forward([5.0, -7.0]), np.zeros(2))


def test_identity_affine_layer():
    net = FeedForwardNet([Layer(np.eye(2), np.zeros(2))])
    np.testing.assert_array_equal(net.forward([1.0, 2.0]), [1.0, 2.0])


def test_two_layer_prelu_matches_hand_evaluation():
    # Independent scalar-by-scalar re-evaluation of a fixed 2-layer net.
    w1 = np.array([[0.5, -1.0], [2.0, 0.25]])
    b1 = np.array([0.1, -0.2])
    w2 = np.array([[1.0, -0.5]])
    b2 = np.array([0.3])
    net = FeedForwardNet([Layer(w1, b1, slope=np.float64(0.25)), Layer(w2, b2)])
    x = np.array([0.8, -0.6])

    z1 = 0.5 * 0.8 + (-1.0) * (-0.6) + 0.1       # 1.1
    z2 = 2.0 * 0.8 + 0.25 * (-0.6) + (-0.2)      # 1.25
    a1 = z1 if z1 > 0 else 0.25 * z1
    a2 = z2 if z2 > 0 else 0.25 * z2
    expected = 1.0 * a1 + (-0.5) * a2 + 0.3
    assert net.forward(x)[0] == pytest.approx(expected, abs=1e-15)

    # negative pre-activation branch
    x2 = np.array([-2.0, 0.0])
    z1n = 0.5 * (-2.0) + 0.1                      # -0.9
    z2n = 2.0 * (-2.0) - 0.2                      # -4.2
    expected2 = 1.0 * (0.25 * z1n) - 0.5 * (0.25 * z2n) + 0.3
    assert net.forward(x2)[0] == pytest.approx(expected2, abs=1e-15)


def test_residual_block_adds_input():
    w = np.zeros((3, 3))
    net = FeedForwardNet([Layer(w, np.zeros(3), slope=np.float64(0.25), residual=True),
                          Layer(np.eye(3), np.zeros(3))])
    x = np.array([1.0, -2.0, 0.5])
    np.testing.assert_array_equal(net.forward(x), x)


def test_residual_requires_square():
    with pytest.raises(DimensionMismatchError):
        Layer(np.zeros((3, 2)), np.zeros(3), slope=np.float64(0.25), residual=True)


def test_dimension_mismatch_raises():
    net = FeedForwardNet.build([4, 3, 2])
    with pytest.raises(DimensionMismatchError):
        net.forward(np.zeros(5))


def test_forward_is_pure_and_deterministic():
    net = FeedForwardNet.build([6, 8, 8, 3], residual=[False, True],
                               rng=np.random.default_rng(3))
    x = np.random.default_rng(1).normal(size=(5, 6))
    a = net.forward(x)
    b = net.forward(x)
    assert a.tobytes() == b.tobytes()


def test_batched_forward_matches_single():
    net = FeedForwardNet.build([4, 7, 2], rng=np.random.default_rng(9))
    xs = np.random.default_rng(2).normal(size=(6, 4))
    batch = net.forward(xs)
    for i in range(6):
        np.testing.assert_allclose(batch[i], net.forward(xs[i]), rtol=1e-12)


def test_adam_zero_gradient_is_fixed_point():
    adam = AdamState(learning_rate=0.1)
    params = [np.array([1.0, -2.0]), np.array(3.0)]
    for _ in range(5):
        params = adam.step(params, [np.zeros(2), np.array(0.0)])
    np.testing.assert_array_equal(params[0], [1.0, -2.0])
    assert params[1] == 3.0


def test_adam_first_step_magnitude():
    # One step with constant gradient g: bias-corrected m_hat = g, v_hat = g^2,
    # so the update is lr * g / (|g| + eps) = lr * sign(g) up to eps.
    adam = AdamState(learning_rate=0.05)
    g = np.array([0.3, -1.7])
    updated = adam.step([np.zeros(2)], [g])[0]
    np.testing.assert_allclose(updated, -0.05 * np.sign(g), rtol=1e-6)


def test_adam_converges_on_quadratic():
    adam = AdamState(learning_rate=0.1)
    p = [np.array(0.0)]
    for _ in range(500):
        grad = 2.0 * (p[0] - 3.0)
        p = adam.step(p, [np.asarray(grad)])
    assert abs(p[0] - 3.0) < 0.05


def test_adam_shape_mismatch():
    adam = AdamState()
    with pytest.raises(ValueError):
        adam.step([np.zeros(3)], [np.zeros(2)])


def test_adam_rejects_non_finite_gradients():
    adam = AdamState()
    with pytest.raises(FloatingPointError):
        adam.step([np.zeros(2)], [np.array([np.nan, 0.0])])


def test_adam_deterministic():
    def run():
        adam = AdamState(learning_rate=0.01)
        p = [np.array([1.0, 2.0])]
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = adam.step(p, [rng.normal(size=2)])
        return p[0]

    np.testing.assert_array_equal(run(), run())
