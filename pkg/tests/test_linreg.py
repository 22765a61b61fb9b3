import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrshift.errors import InsufficientDataError, SingularDesignError
from corrshift.linreg import ols


def design(x):
    return np.column_stack([np.ones(len(x)), x])


def test_exact_line():
    x = np.arange(10.0)
    fit = ols(2 + 3 * x, design(x))
    assert fit.params == pytest.approx([2, 3], abs=1e-12)
    assert fit.rss == pytest.approx(0, abs=1e-20)


def test_constant_mean_model():
    fit = ols(np.full(7, 4.25), np.ones((7, 1)))
    assert fit.params[0] == pytest.approx(4.25, abs=1e-14)
    assert fit.rss == pytest.approx(0, abs=1e-24)


def test_matches_normal_equations(rng):
    X = design(rng.normal(size=50))
    y = X @ [0.3, -1.7] + rng.normal(size=50)
    fit = ols(y, X)
    # oracle: solve (X'X) b = X'y by hand-written Gaussian elimination on the 2x2 system
    A = X.T @ X
    c = X.T @ y
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    b = np.array([(c[0] * A[1, 1] - A[0, 1] * c[1]) / det, (A[0, 0] * c[1] - A[1, 0] * c[0]) / det])
    assert np.allclose(fit.params, b, atol=1e-8)
    resid = y - X @ b
    assert fit.rss == pytest.approx(resid @ resid, rel=1e-10)
    s2 = resid @ resid / (50 - 2)
    Ainv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]]) / det
    assert np.allclose(fit.bse, np.sqrt(s2 * np.diag(Ainv)), rtol=1e-8)
    assert np.allclose(fit.tvalues, fit.params / fit.bse)
    assert np.allclose(fit.fitted + fit.resid, y)


def test_duplicate_column_is_singular(rng):
    x = rng.normal(size=30)
    with pytest.raises(SingularDesignError):
        ols(rng.normal(size=30), np.column_stack([np.ones(30), x, x]))


def test_too_few_rows():
    with pytest.raises(InsufficientDataError):
        ols([1.0, 2.0], design([0.0, 1.0]))


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.integers(8, 60))
def test_rss_order_free_and_nested(seed, n):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, 2))])
    y = rng.normal(size=n)
    full = ols(y, X)
    perm = rng.permutation(n)
    assert ols(y[perm], X[perm]).rss == pytest.approx(full.rss, rel=1e-9, abs=1e-12)
    assert full.rss <= ols(y, X[:, :2]).rss * (1 + 1e-12)
    assert ols(y, X[:, :2]).rss <= ols(y, X[:, :1]).rss * (1 + 1e-12)
