import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrshift.errors import LookupFailure, WindowError
from corrshift.rolling import rolling_correlation, rolling_pearson
from corrshift.series import ReturnPanel
from conftest import days


def pearson_oracle(x, y):
    """Textbook formula with plain Python sums."""
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return float("nan")
    return sxy / math.sqrt(sxx * syy)


def brute(x, y, n):
    return np.array([pearson_oracle(list(x[j : j + n]), list(y[j : j + n])) for j in range(len(x) - n + 1)])


def panel(x, y):
    return ReturnPanel(days("2024-01-01", len(x)), {"X": np.asarray(x, float), "Y": np.asarray(y, float)})


def test_identical_columns_give_one(rng):
    x = rng.normal(size=40)
    s = rolling_correlation(panel(x, x), "X", "Y", 10)
    assert np.allclose(s.values, 1.0, atol=1e-12)


def test_negated_columns_give_minus_one(rng):
    x = rng.normal(size=40)
    s = rolling_correlation(panel(x, -x), "X", "Y", 10)
    assert np.allclose(s.values, -1.0, atol=1e-12)


def test_six_point_example():
    x = [1, 2, 3, 2, 1, 2]
    y = [2, 1, 3, 3, 1, 1]
    s = rolling_correlation(panel(x, y), "X", "Y", 3)
    assert len(s) == 4
    assert np.allclose(s.values, brute(x, y, 3), atol=1e-12, rtol=0)
    # trailing label: first value belongs to the third date
    assert s.dates[0] == np.datetime64("2024-01-03")
    assert s.base_asset_id == "Y" and s.other_asset_id == "X"


def test_flat_window_is_undefined_and_dropped():
    x = [1, 1, 1, 2, 3, 4, 5]
    y = [3, 1, 2, 5, 4, 6, 7]
    s = rolling_correlation(panel(x, y), "X", "Y", 3)
    assert np.isnan(s.values[0]) and s.n_undefined == 1
    d = s.dropna()
    assert len(d) == len(s) - 1 and np.all(np.isfinite(d.values))


def test_window_errors(rng):
    p = panel(rng.normal(size=10), rng.normal(size=10))
    with pytest.raises(WindowError):
        rolling_correlation(p, "X", "Y", 2)
    with pytest.raises(WindowError):
        rolling_correlation(p, "X", "Y", 11)
    with pytest.raises(LookupFailure):
        rolling_correlation(p, "X", "Q", 5)


def test_large_panel_against_direct_formula():
    rng = np.random.default_rng(99)
    x = rng.normal(size=10_000).cumsum() * 1e-3 + rng.normal(size=10_000)
    y = 0.3 * x + rng.normal(size=10_000)
    got = rolling_pearson(x, y, 250)
    # independent check: per-window np.corrcoef
    idx = np.arange(0, got.size, 37)
    ref = np.array([np.corrcoef(x[j : j + 250], y[j : j + 250])[0, 1] for j in idx])
    assert np.max(np.abs(got[idx] - ref)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 30), st.floats(0.01, 100), st.floats(-100, 100))
def test_symmetry_and_affine_invariance(seed, n, a, b):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n + 20)
    y = rng.normal(size=n + 20) + 0.5 * x
    xy = rolling_correlation(panel(x, y), "X", "Y", n).values
    yx = rolling_correlation(panel(y, x), "X", "Y", n).values
    assert np.allclose(xy, yx, atol=1e-14, rtol=0)
    moved = rolling_correlation(panel(a * x + b, y), "X", "Y", n).values
    assert np.allclose(moved, xy, atol=1e-10, rtol=0)
    assert np.all(np.abs(xy) <= 1)
