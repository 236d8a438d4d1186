import numpy as np
import pytest

from ftsbench.evaluation import (DegenerateSeriesError, correlation_values,
                                 moments, rolling_moments)


def test_two_point_symmetric_series():
    ms = moments(np.array([1.0, -1.0, 1.0, -1.0]))
    assert ms.mean == 0.0
    assert ms.std == 1.0
    assert ms.skew == 0.0
    assert ms.kurt == -2.0


def test_constant_series_errors():
    with pytest.raises(DegenerateSeriesError):
        moments(np.full(10, 3.3))


def test_gaussian_moments():
    x = np.random.default_rng(0).standard_normal(1_000_000)
    ms = moments(x)
    assert abs(ms.mean) < 0.02
    assert abs(ms.std - 1.0) < 0.02
    assert abs(ms.skew) < 0.02
    assert abs(ms.kurt) < 0.02


def test_short_series_rejected():
    with pytest.raises(ValueError):
        moments(np.array([1.0, 2.0]))


def test_rolling_window_default_one_third():
    series = np.random.default_rng(1).standard_normal(120)
    out, skipped = rolling_moments(series)
    assert len(out) == 81  # window 40, 120 - 40 + 1
    assert skipped == 0


def test_rolling_single_window_equals_full():
    series = np.random.default_rng(2).standard_normal(60)
    out, _ = rolling_moments(series, window=60)
    assert len(out) == 1
    full = moments(series)
    assert out[0] == full


def test_rolling_constant_variance_concentrates():
    series = np.random.default_rng(3).standard_normal(3000)
    out, _ = rolling_moments(series, window=1000)
    stds = np.array([m.std for m in out])
    assert np.all(np.abs(stds - 1.0) < 0.15)


def test_rolling_skips_degenerate_windows():
    series = np.concatenate([np.zeros(10), np.random.default_rng(4).standard_normal(10)])
    out, skipped = rolling_moments(series, window=5)
    assert skipped >= 1
    assert len(out) + skipped == 16


def test_correlation_values_duplicated_rows():
    row = np.random.default_rng(5).standard_normal(50)
    window = np.vstack([row, row, row])
    np.testing.assert_allclose(correlation_values(window), 1.0)


def test_correlation_values_counts():
    rng = np.random.default_rng(6)
    assert correlation_values(rng.standard_normal((2, 30))).shape == (1,)
    assert correlation_values(rng.standard_normal((50, 60))).shape == (1225,)


def test_correlation_values_names_degenerate_instrument():
    window = np.vstack([np.ones(20), np.random.default_rng(7).standard_normal(20)])
    with pytest.raises(DegenerateSeriesError, match="0"):
        correlation_values(window)
