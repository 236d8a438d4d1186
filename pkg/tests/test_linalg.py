import numpy as np
import pytest

from ftsbench.core.linalg import (NotPositiveDefiniteError, cholesky,
                                  jittered_cholesky, validate_correlation)


def test_identity():
    np.testing.assert_array_equal(cholesky(np.eye(3)), np.eye(3))


def test_diagonal():
    L = cholesky(np.array([[4.0, 0.0], [0.0, 9.0]]))
    np.testing.assert_allclose(L, [[2.0, 0.0], [0.0, 3.0]])


def test_equicorrelation_reconstruction():
    rho = 0.5
    m = np.full((3, 3), rho) + (1 - rho) * np.eye(3)
    L = cholesky(m)
    assert np.max(np.abs(L @ L.T - m)) < 1e-12
    assert np.max(np.abs(np.triu(L, 1))) == 0.0


def test_non_pd_raises_distinct_error():
    m = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(m)


def test_non_symmetric_rejected():
    with pytest.raises(ValueError):
        cholesky(np.array([[1.0, 0.5], [0.2, 1.0]]))


def test_round_trip_random_lower_triangular():
    rng = np.random.default_rng(123)
    for _ in range(25):
        n = int(rng.integers(1, 8))
        L = np.tril(rng.normal(size=(n, n)))
        np.fill_diagonal(L, np.abs(np.diag(L)) + 0.5)
        got = cholesky(L @ L.T)
        assert np.max(np.abs(got - L)) < 1e-9


def test_jitter_fallback_is_explicit():
    # Barely indefinite matrix: plain cholesky refuses, jittered succeeds.
    m = np.array([[1.0, 1.0], [1.0, 1.0 - 1e-12]])
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(m)
    L, applied = jittered_cholesky(m)
    assert applied > 0
    assert np.all(np.isfinite(L))


def test_jitter_gives_up_on_hopeless_matrix():
    m = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NotPositiveDefiniteError):
        jittered_cholesky(m)


def test_validate_correlation():
    good = np.array([[1.0, 0.3], [0.3, 1.0]])
    validate_correlation(good)
    with pytest.raises(ValueError):
        validate_correlation(np.array([[2.0, 0.3], [0.3, 1.0]]))
    with pytest.raises(NotPositiveDefiniteError):
        validate_correlation(np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9],
                                       [-0.9, 0.9, 1.0]]))
