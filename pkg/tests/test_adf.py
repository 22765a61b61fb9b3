import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from statsmodels.tsa.stattools import adfuller

from corrshift.adf import adf_critical_values, adf_test, default_max_lags, format_pvalue, mackinnon_p
from corrshift.errors import DegenerateInputError, InsufficientDataError
from corrshift.linreg import ols


def test_white_noise_rejects_at_one_percent():
    x = np.random.default_rng(7).normal(size=500)
    res = adf_test(x)
    assert res.adf_statistic < -3.44
    assert res.p_value < 0.01


def test_random_walks_rarely_reject():
    keep = 0
    for seed in range(200):
        x = np.cumsum(np.random.default_rng(seed).normal(size=500))
        keep += adf_test(x).p_value > 0.05
    assert keep >= 180


@pytest.mark.parametrize("variant,reg", [("c", "c"), ("ct", "ct"), ("n", "n")])
@pytest.mark.parametrize("seed,phi", [(0, 0.6), (1, 0.97), (2, 0.99), (3, 1.0)])
def test_matches_statsmodels(variant, reg, seed, phi):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=400)
    x = np.empty(400)
    x[0] = e[0]
    for t in range(1, 400):
        x[t] = phi * x[t - 1] + e[t]
    res = adf_test(x, variant)
    stat, p, lag, nobs, crit, _ = adfuller(x, regression=reg, autolag="AIC")
    assert res.adf_statistic == pytest.approx(stat, abs=1e-10)
    assert res.lags_used == lag and res.n_effective == nobs
    # our p-values are clamped to [1e-6, 1 - 1e-6]
    assert res.p_value == pytest.approx(np.clip(p, 1e-6, 1 - 1e-6), abs=1e-10)
    for k in ("1%", "5%", "10%"):
        assert res.critical_values[k] == pytest.approx(crit[k], abs=1e-10)


def test_zero_lags_is_plain_dickey_fuller(rng):
    x = np.cumsum(rng.normal(size=200))
    res = adf_test(x, "c", max_lags=0)
    dy = np.diff(x)
    X = np.column_stack([np.ones(dy.size), x[:-1]])
    fit = ols(dy, X)
    assert res.lags_used == 0
    assert res.adf_statistic == pytest.approx(fit.tvalues[1], abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 1000))
def test_scale_invariant(seed, scale):
    x = np.random.default_rng(seed).normal(size=120)
    a, b = adf_test(x), adf_test(scale * x)
    assert b.adf_statistic == pytest.approx(a.adf_statistic, rel=1e-8)
    assert b.lags_used == a.lags_used


def test_pvalue_monotone():
    grid = np.linspace(-30, 5, 2000)
    for v in ("c", "ct", "n"):
        p = [mackinnon_p(s, v) for s in grid]
        assert all(q >= r for r, q in zip(p, p[1:]))
        assert min(p) >= 1e-6 and max(p) <= 1 - 1e-6


def test_pvalue_text():
    assert format_pvalue(3e-5) == "0.0000"
    assert format_pvalue(0.01234) == "0.0123"


def test_default_max_lags():
    assert default_max_lags(100) == 12
    assert default_max_lags(500) == 17


def test_errors():
    with pytest.raises(DegenerateInputError):
        adf_test(np.ones(100))
    with pytest.raises(InsufficientDataError):
        adf_test(np.arange(8.0) ** 2)
    with pytest.raises(ValueError):
        adf_test(np.random.default_rng(0).normal(size=100), "quadratic")


def test_critical_values_order():
    cv = adf_critical_values(200, "c")
    assert cv["1%"] < cv["5%"] < cv["10%"] < 0
