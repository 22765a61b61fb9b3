"""
Second-stage DCC(1,1) on standardized residuals.

    Q_t = (1 - a - b) Qbar + a e_{t-1} e_{t-1}' + b Q_{t-1},   Q_1 = Qbar
    R_t = diag(Q_t)^{-1/2} Q_t diag(Q_t)^{-1/2}

``Qbar`` is fixed at the sample covariance of the residuals (correlation
targeting), so only ``a`` and ``b`` are estimated.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.signal import lfilter

from corrshift.errors import (
    InsufficientDataError,
    NonConvergenceError,
    NumericalDegeneracyError,
)
from corrshift.garch import GarchFit, GarchSpec, fit_garch
from corrshift.numerics import PENALTY, BoundBox, OptimResult, minimize
from corrshift.series import ReturnPanel, _frozen

logger = logging.getLogger(__name__)

__all__ = [
    "DccFit",
    "DccRun",
    "DccSeries",
    "dcc_loglik",
    "dcc_pipeline",
    "dcc_recursion",
    "fit_dcc",
    "run_dcc",
    "smooth_series",
]

STATIONARITY_MARGIN = 1e-4
_GRID_A = (0.01, 0.03, 0.05, 0.10)
_GRID_AB = (0.80, 0.90, 0.95, 0.97, 0.99)


def dcc_recursion(eps, a: float, b: float, qbar):
    """Run the DCC recursion.

    Parameters
    ----------
    eps : array_like, shape (T, m)
        Standardized residuals.
    a, b : float
        News and persistence parameters.
    qbar : array_like, shape (m, m)

    Returns
    -------
    Q, R : ndarray, shape (T, m, m)
    """
    eps = np.asarray(eps, dtype=float)
    qbar = np.asarray(qbar, dtype=float)
    if eps.ndim != 2 or eps.shape[0] < 2:
        raise InsufficientDataError("dcc_recursion needs a T x m residual array with T >= 2")
    T, m = eps.shape
    if qbar.shape != (m, m):
        raise ValueError(f"Qbar must be {m}x{m}, got {qbar.shape}")
    outer = eps[:-1, :, None] * eps[:-1, None, :]
    drive = (1.0 - a - b) * qbar + a * outer
    # elementwise AR(1) filter along time, seeded so that Q_1 = Qbar
    zi = (b * qbar)[None, :, :]
    rest, _ = lfilter([1.0], [1.0, -b], drive, axis=0, zi=zi)
    Q = np.concatenate([qbar[None], rest], axis=0)
    d = np.diagonal(Q, axis1=1, axis2=2)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise NumericalDegeneracyError("non-positive diagonal in Q_t")
    s = np.sqrt(d)
    R = Q / (s[:, :, None] * s[:, None, :])
    R = 0.5 * (R + np.swapaxes(R, 1, 2))
    np.clip(R, -1.0, 1.0, out=R)
    idx = np.arange(m)
    R[:, idx, idx] = 1.0
    return Q, R


def dcc_loglik(params, eps, qbar) -> float:
    """Correlation-stage Gaussian log-likelihood.

    ``sum_t -0.5 (ln|R_t| + e_t' R_t^{-1} e_t - e_t' e_t)``; ``-PENALTY`` when
    some ``R_t`` is not positive definite.
    """
    a, b = float(params[0]), float(params[1])
    eps = np.asarray(eps, dtype=float)
    try:
        _, R = dcc_recursion(eps, a, b, qbar)
    except NumericalDegeneracyError:
        return -PENALTY
    sign, logdet = np.linalg.slogdet(R)
    if np.any(sign <= 0):
        return -PENALTY
    try:
        sol = np.linalg.solve(R, eps[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        return -PENALTY
    quad = np.einsum("ij,ij->i", eps, sol)
    ll = -0.5 * float(np.sum(logdet + quad - np.einsum("ij,ij->i", eps, eps)))
    return ll if math.isfinite(ll) else -PENALTY


@dataclass(frozen=True)
class DccFit:
    a: float
    b: float
    qbar: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    loglik: float
    optim: OptimResult | None
    asset_ids: tuple = ()
    dates: np.ndarray | None = None
    degenerate: bool = False

    def rho(self, i, j) -> np.ndarray:
        """Dynamic correlation path between columns ``i`` and ``j`` (index or asset id)."""
        if not isinstance(i, (int, np.integer)):
            i = self.asset_ids.index(i)
        if not isinstance(j, (int, np.integer)):
            j = self.asset_ids.index(j)
        return self.R[:, i, j]


def fit_dcc(eps, asset_ids=None, dates=None, tol: float = 1e-9, max_iter: int = 5000) -> DccFit:
    """Estimate ``(a, b)`` by maximising :func:`dcc_loglik`.

    The search starts from the best point of a small grid and is bounded to
    ``a, b >= 0``, ``a + b <= 1 - 1e-4``. The constant-correlation model
    ``a = b = 0`` is nested, and is returned instead if it scores higher.

    Perfectly collinear residual columns make every ``R_t`` singular; that case
    skips estimation and returns the static model with ``degenerate=True``.
    """
    eps = np.asarray(eps, dtype=float)
    if eps.ndim != 2 or eps.shape[1] < 2:
        raise InsufficientDataError("fit_dcc needs a T x m residual array with m >= 2")
    T, m = eps.shape
    if T < 10:
        raise InsufficientDataError(f"fit_dcc needs more observations, got T={T}")
    if T < 100:
        logger.warning("DCC fit on only %d observations", T)
    ids = tuple(asset_ids) if asset_ids is not None else tuple(range(m))
    qbar = np.cov(eps, rowvar=False)
    sd = np.sqrt(np.diag(qbar))
    static_corr = qbar / np.outer(sd, sd)
    if np.min(np.linalg.eigvalsh(static_corr)) < 1e-10:
        logger.warning("standardized residuals are collinear; DCC reduces to static correlation")
        Q, R = dcc_recursion(eps, 0.0, 0.0, qbar)
        return DccFit(0.0, 0.0, qbar, Q, R, float("nan"), None, ids, dates, degenerate=True)

    def negll(x):
        if x[0] + x[1] > 1.0 - STATIONARITY_MARGIN:
            return PENALTY
        return -dcc_loglik(x, eps, qbar) / T

    grid = [(a, ab - a) for a, ab in itertools.product(_GRID_A, _GRID_AB) if ab - a > 0]
    scores = [negll(np.array(g)) for g in grid]
    x0 = np.array(grid[int(np.argmin(scores))])
    box = BoundBox(np.zeros(2), np.ones(2))
    res = minimize(negll, x0, box, tol=tol, max_iter=max_iter)
    if not res.converged:
        raise NonConvergenceError(
            f"DCC fit did not converge ({res.message})", best=res.x, context="DCC"
        )
    x, fx = res.x, res.fun
    f_static = negll(np.zeros(2))
    if f_static < fx:
        x, fx = np.zeros(2), f_static
    a, b = float(x[0]), float(x[1])
    Q, R = dcc_recursion(eps, a, b, qbar)
    return DccFit(a, b, qbar, Q, R, -fx * T, res, ids, dates)


def smooth_series(values, halfwidth: int) -> np.ndarray:
    """Centered moving average over ``2 * halfwidth + 1`` points.

    Near the ends the window shrinks symmetrically, so the first and last
    points are left as they are.
    """
    x = np.asarray(values, dtype=float)
    h = int(halfwidth)
    if h < 0:
        raise ValueError("halfwidth must be non-negative")
    if h == 0 or x.size == 0:
        return x.copy()
    n = x.size
    out = np.empty(n)
    for i in range(n):
        k = min(i, n - 1 - i, h)
        out[i] = x[i - k : i + k + 1].mean()
    return out


@dataclass(frozen=True)
class DccSeries:
    base_id: str
    other_id: str
    dates: np.ndarray
    raw: np.ndarray
    smoothed: np.ndarray
    halfwidth: int = 0

    def __post_init__(self):
        for name in ("dates", "raw", "smoothed"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def pair(self) -> tuple:
        return self.base_id, self.other_id


@dataclass
class DccRun:
    series: dict
    garch: dict
    dcc: dict
    eps: np.ndarray
    dates: np.ndarray
    notes: list = field(default_factory=list)


def _spec_for(specs, asset_id):
    if specs is None:
        return GarchSpec()
    if isinstance(specs, GarchSpec):
        return specs
    return specs.get(asset_id, GarchSpec())


def run_dcc(
    panel: ReturnPanel,
    specs: GarchSpec | Mapping[str, GarchSpec] | None = None,
    base_id: str | None = None,
    halfwidth: int = 5,
    scale: float = 100.0,
    pairwise: bool = False,
    garch_fits: Mapping[str, GarchFit] | None = None,
) -> DccRun:
    """Univariate fits, DCC estimation and extraction of the base-asset pairs.

    By default one DCC system is fit over every panel column and the
    ``(base, other)`` correlation paths are read off it. ``pairwise=True``
    fits a separate bivariate system per pair instead. Already available
    univariate fits can be handed in through ``garch_fits``.
    """
    ids = panel.asset_ids
    base = base_id if base_id is not None else ids[0]
    panel.column(base)
    fits = {}
    for aid in ids:
        if garch_fits is not None and aid in garch_fits:
            fits[aid] = garch_fits[aid]
            continue
        try:
            fits[aid] = fit_garch(panel.series(aid), _spec_for(specs, aid), scale=scale)
        except NonConvergenceError:
            raise
        except InsufficientDataError as exc:
            raise InsufficientDataError(f"{aid}: {exc}") from exc
    eps = np.column_stack([fits[a].std_resid for a in ids])
    others = [a for a in ids if a != base]
    dcc = {}
    series = {}
    if pairwise:
        for o in others:
            cols = [ids.index(base), ids.index(o)]
            fit = fit_dcc(eps[:, cols], asset_ids=(base, o), dates=panel.dates)
            dcc[(base, o)] = fit
            rho = fit.rho(0, 1)
            series[(base, o)] = DccSeries(base, o, panel.dates, rho, smooth_series(rho, halfwidth), halfwidth)
    else:
        fit = fit_dcc(eps, asset_ids=ids, dates=panel.dates)
        dcc["joint"] = fit
        for o in others:
            rho = fit.rho(base, o)
            series[(base, o)] = DccSeries(base, o, panel.dates, rho, smooth_series(rho, halfwidth), halfwidth)
    return DccRun(series=series, garch=fits, dcc=dcc, eps=eps, dates=panel.dates)


def dcc_pipeline(panel: ReturnPanel, specs=None, base_id=None, halfwidth: int = 5, **kwargs) -> dict:
    """Map ``(base_id, other_id) -> DccSeries``; see :func:`run_dcc`."""
    return run_dcc(panel, specs, base_id=base_id, halfwidth=halfwidth, **kwargs).series
