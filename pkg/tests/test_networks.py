import numpy as np
import pytest

from ftsbench.evaluation import (CorrelationNetwork, ReplaySampler,
                                 bootstrap_network, jaccard, jaccard_curve,
                                 plain_network)


def _net(edges, n):
    adj = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        adj[i, j] = adj[j, i] = True
    return CorrelationNetwork(adj, 90.0, 40, 0)


class TestJaccard:
    def test_identical(self):
        a = _net([(0, 1), (1, 2)], 4)
        assert jaccard(a, a) == 1.0

    def test_disjoint(self):
        a = _net([(0, 1)], 4)
        b = _net([(2, 3)], 4)
        assert jaccard(a, b) == 0.0

    def test_one_third(self):
        a = _net([(0, 1), (1, 2)], 4)
        b = _net([(1, 2), (2, 3)], 4)
        assert jaccard(a, b) == pytest.approx(1 / 3)

    def test_both_empty(self):
        assert jaccard(_net([], 3), _net([], 3)) == 1.0

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            jaccard(_net([], 3), _net([], 4))

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            edges_a = [(i, j) for i in range(5) for j in range(i)
                       if rng.random() < 0.4]
            edges_b = [(i, j) for i in range(5) for j in range(i)
                       if rng.random() < 0.4]
            a, b = _net(edges_a, 5), _net(edges_b, 5)
            assert jaccard(a, b) == jaccard(b, a)
            assert (jaccard(a, b) == 1.0) == (np.array_equal(a.adjacency, b.adjacency))


class TestBootstrapNetwork:
    def test_perfectly_correlated_panel_complete_graph(self):
        base = np.random.default_rng(0).standard_normal(40)
        window = np.vstack([base, base * 2.0, base * 0.5])
        for pct in (10.0, 50.0, 99.0):
            net = bootstrap_network(window, pct, bootstrap_count=20, rng=0)
            assert net.n_edges == 3

    def test_independent_instruments_high_percentile_sparse(self):
        window = np.random.default_rng(1).standard_normal((20, 40))
        net = bootstrap_network(window, 99.0, bootstrap_count=50, rng=1)
        assert net.n_edges <= 0.05 * 190

    def test_b1_equals_plain_threshold_of_resample(self):
        window = np.random.default_rng(2).standard_normal((5, 40))
        rng_state = np.random.default_rng(7)
        net = bootstrap_network(window, 80.0, bootstrap_count=1, rng=7)
        # replay the single resample with the same generator state
        from ftsbench.evaluation.moments import correlation_values
        idx = np.random.default_rng(7).integers(40, size=40)
        resample_corr = correlation_values(window[:, idx])
        threshold = np.percentile(correlation_values(window), 80.0)
        rows, cols = np.tril_indices(5, k=-1)
        expected_edges = int(np.sum(resample_corr >= threshold))
        assert net.n_edges == expected_edges


class _ConstantSampler:
    def __init__(self, value):
        self.value = value

    def sample(self, condition, start, batch, seed):
        rng = np.random.default_rng(seed)
        return self.value + 0.001 * rng.standard_normal(
            (batch, condition.shape[0], condition.shape[1]))


class TestJaccardCurve:
    def test_replay_oracle_curve_is_identically_one(self):
        rng = np.random.default_rng(3)
        returns = rng.standard_normal((200, 4)) * 0.01
        sampler = ReplaySampler(returns, condition_length=40, target_length=40)
        curve = jaccard_curve(returns, sampler, [10, 50, 90], stride=7, batch=4)
        np.testing.assert_array_equal(curve["generated"], 1.0)

    def test_stationary_panel_high_past_similarity_at_low_percentile(self):
        rng = np.random.default_rng(4)
        base = rng.standard_normal((400, 1))
        noise = rng.standard_normal((400, 8))
        returns = 0.9 * base + 0.4 * noise
        sampler = ReplaySampler(returns, 40, 40)
        curve = jaccard_curve(returns, sampler, [0.0, 5.0], stride=10)
        assert curve["past"][0] == 1.0  # threshold at the minimum keeps all edges
        assert curve["past"][1] > 0.8

    def test_iid_panel_curves_decay_with_percentile(self):
        rng = np.random.default_rng(5)
        returns = rng.standard_normal((400, 8))
        sampler = _ConstantSampler(0.0)
        curve = jaccard_curve(returns, sampler, [5.0, 95.0], stride=10)
        assert curve["past"][1] < curve["past"][0]
