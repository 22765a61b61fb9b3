import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrshift.dcc import dcc_loglik, dcc_pipeline, dcc_recursion, fit_dcc, run_dcc, smooth_series
from corrshift.errors import InsufficientDataError
from corrshift.garch import GarchSpec
from corrshift.series import ReturnPanel
from conftest import days


def check_corr_matrices(R):
    m = R.shape[1]
    assert np.allclose(R[:, range(m), range(m)], 1.0)
    assert np.array_equal(R, np.swapaxes(R, 1, 2))
    assert np.min(np.linalg.eigvalsh(R)) >= -1e-8


def test_static_limit():
    eps = np.random.default_rng(0).normal(size=(50, 3))
    qbar = np.cov(eps, rowvar=False)
    Q, R = dcc_recursion(eps, 0.0, 0.0, qbar)
    assert np.allclose(Q, qbar[None])
    s = np.sqrt(np.diag(qbar))
    assert np.allclose(R, (qbar / np.outer(s, s))[None], atol=1e-15)


def test_hand_computed_two_by_three():
    eps = [[0.5, -1.0], [1.2, 0.3], [-0.7, 0.9]]
    qbar = [[1.0, 0.2], [0.2, 1.5]]
    a, b = 0.05, 0.90
    # element by element, straight from the recursion
    Q = [[row[:] for row in qbar]]
    for t in range(1, 3):
        prev = Q[-1]
        e = eps[t - 1]
        Q.append([[(1 - a - b) * qbar[i][j] + a * e[i] * e[j] + b * prev[i][j] for j in range(2)] for i in range(2)])
    R = [[[q[i][j] / math.sqrt(q[i][i] * q[j][j]) for j in range(2)] for i in range(2)] for q in Q]
    gotQ, gotR = dcc_recursion(np.array(eps), a, b, np.array(qbar))
    assert np.max(np.abs(gotQ - np.array(Q))) < 1e-12
    assert np.max(np.abs(gotR - np.array(R))) < 1e-12
    # Q_2 by hand: 0.05*[[1,.2],[.2,1.5]] + 0.05*[[.25,-.5],[-.5,1]] + 0.9*qbar
    assert gotQ[1, 0, 1] == pytest.approx(0.05 * 0.2 - 0.05 * 0.5 + 0.9 * 0.2, abs=1e-15)


def test_identical_columns_give_unit_correlation():
    x = np.random.default_rng(1).normal(size=200)
    eps = np.column_stack([x, x])
    _, R = dcc_recursion(eps, 0.05, 0.9, np.cov(eps, rowvar=False))
    assert np.allclose(R[:, 0, 1], 1.0)
    fit = fit_dcc(eps)
    assert fit.degenerate and np.allclose(fit.rho(0, 1), 1.0)


def test_loglik_oracle():
    rng = np.random.default_rng(4)
    eps = rng.normal(size=(40, 2))
    qbar = np.cov(eps, rowvar=False)
    _, R = dcc_recursion(eps, 0.04, 0.9, qbar)
    ref = 0.0
    for t in range(40):
        r = R[t, 0, 1]
        e1, e2 = eps[t]
        det = 1 - r * r
        quad = (e1 * e1 - 2 * r * e1 * e2 + e2 * e2) / det
        ref += -0.5 * (math.log(det) + quad - (e1 * e1 + e2 * e2))
    assert dcc_loglik([0.04, 0.9], eps, qbar) == pytest.approx(ref, abs=1e-10)


def correlated(T, rho, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(T, 2))
    return np.column_stack([z[:, 0], rho * z[:, 0] + math.sqrt(1 - rho * rho) * z[:, 1]])


def test_constant_correlation_recovered():
    fit = fit_dcc(correlated(3000, 0.5, 8))
    assert fit.a < 0.05
    assert abs(fit.rho(0, 1).mean() - 0.5) <= 0.05
    check_corr_matrices(fit.R)
    assert fit.loglik >= dcc_loglik([0, 0], correlated(3000, 0.5, 8), fit.qbar) - 1e-9


def test_independent_columns():
    fit = fit_dcc(np.random.default_rng(21).normal(size=(3000, 2)))
    assert np.mean(np.abs(fit.rho(0, 1))) < 0.05


def test_regime_switch():
    a = correlated(1500, 0.0, 30)
    b = correlated(1500, 0.6, 31)
    fit = fit_dcc(np.vstack([a, b]))
    rho = fit.rho(0, 1)
    assert rho[1500:].mean() - rho[:1500].mean() > 0.3
    check_corr_matrices(fit.R)


def test_permutation_equivariance():
    rng = np.random.default_rng(2)
    eps = rng.normal(size=(300, 3)) @ np.array([[1, 0.5, 0.2], [0, 1, 0.3], [0, 0, 1]])
    perm = [2, 0, 1]
    _, R = dcc_recursion(eps, 0.05, 0.9, np.cov(eps, rowvar=False))
    _, Rp = dcc_recursion(eps[:, perm], 0.05, 0.9, np.cov(eps[:, perm], rowvar=False))
    assert np.allclose(Rp, R[:, perm][:, :, perm], atol=1e-13)


def test_smoother_examples():
    x = np.random.default_rng(0).normal(size=20)
    assert np.array_equal(smooth_series(x, 0), x)
    assert np.allclose(smooth_series(np.full(9, 0.4), 3), 0.4)
    assert np.allclose(smooth_series([0, 0, 0, 1, 1, 1], 1), [0, 0, 1 / 3, 2 / 3, 1, 1], atol=1e-15)


@settings(max_examples=50)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.integers(0, 8))
def test_smoother_matches_window_means(values, h):
    out = smooth_series(values, h)
    n = len(values)
    for i in range(n):
        k = min(i, n - 1 - i, h)
        w = values[i - k : i + k + 1]
        assert out[i] == pytest.approx(math.fsum(w) / len(w), abs=1e-12)


def test_too_little_data():
    with pytest.raises(InsufficientDataError):
        fit_dcc(np.zeros((5, 2)))
    with pytest.raises(InsufficientDataError):
        fit_dcc(np.zeros((50, 1)))


def _sim_panel(T, corr, seed):
    rng = np.random.default_rng(seed)
    L = np.linalg.cholesky(corr)
    x = rng.normal(size=(T, corr.shape[0])) @ L.T * 0.01
    ids = ["A", "B", "C", "D"][: corr.shape[0]]
    return ReturnPanel(days("2015-01-01", T), {k: x[:, i] for i, k in enumerate(ids)})


def test_duplicate_asset_pair_is_one():
    x = np.random.default_rng(3).normal(size=400) * 0.01
    panel = ReturnPanel(days("2015-01-01", 400), {"A": x, "B": x.copy()})
    series = dcc_pipeline(panel, GarchSpec(0, 0, 1, 1), base_id="A")
    assert np.allclose(series[("A", "B")].raw, 1.0)


def test_block_structure():
    c = np.array([[1, 0.6, 0.05, 0.05], [0.6, 1, 0.05, 0.05], [0.05, 0.05, 1, 0.6], [0.05, 0.05, 0.6, 1]])
    panel = _sim_panel(1500, c, 12)
    run = run_dcc(panel, GarchSpec(0, 0, 1, 1), base_id="A")
    within = run.series[("A", "B")].raw.mean()
    across = np.mean([run.series[("A", k)].raw.mean() for k in ("C", "D")])
    assert within - across > 0.2
    assert set(run.series) == {("A", "B"), ("A", "C"), ("A", "D")}
    check_corr_matrices(run.dcc["joint"].R)

    pair = run_dcc(panel, GarchSpec(0, 0, 1, 1), base_id="A", pairwise=True, garch_fits=run.garch)
    assert set(pair.dcc) == {("A", "B"), ("A", "C"), ("A", "D")}
    assert pair.series[("A", "B")].raw.mean() - pair.series[("A", "C")].raw.mean() > 0.2
