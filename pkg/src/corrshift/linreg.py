"""Ordinary least squares via a Householder QR factorisation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from corrshift.errors import InsufficientDataError, SingularDesignError

__all__ = ["RANK_TOL", "OlsFit", "ols"]

RANK_TOL = 1e-10


@dataclass(frozen=True)
class OlsFit:
    """Result of :func:`ols`.

    Attributes
    ----------
    params : ndarray
        Coefficient vector, intercept first when the caller put it first.
    resid : ndarray
        ``y - X @ params``.
    rss : float
        Residual sum of squares.
    nobs, k : int
        Sample size and number of regressors (intercept included).
    bse : ndarray
        Standard errors from ``s^2 (X'X)^{-1}`` with ``s^2 = rss / (n - k)``.
    tvalues : ndarray
        ``params / bse``; ``inf`` where a standard error is exactly zero.
    fitted : ndarray
    intercept_included : bool
    """

    params: np.ndarray
    resid: np.ndarray
    rss: float
    nobs: int
    k: int
    bse: np.ndarray
    tvalues: np.ndarray
    fitted: np.ndarray
    intercept_included: bool = True

    @property
    def sigma2(self) -> float:
        return self.rss / (self.nobs - self.k)


def ols(y, X, intercept_included: bool = True) -> OlsFit:
    """Least-squares fit of ``y`` on the columns of ``X``.

    Parameters
    ----------
    y : array_like, shape (n,)
    X : array_like, shape (n, k)
        Full design. Add a column of ones yourself if you want an intercept;
        ``intercept_included`` is only recorded on the result.
    intercept_included : bool

    Raises
    ------
    InsufficientDataError
        When ``n <= k``.
    SingularDesignError
        When ``min|diag(R)| / max|diag(R)| < RANK_TOL`` for the QR factor ``R``.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.size != n:
        raise ValueError(f"y has {y.size} rows but X has {n}")
    if n <= k:
        raise InsufficientDataError(f"OLS needs more observations than regressors (n={n}, k={k})")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise ValueError("OLS inputs must be finite")

    q, r = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.max() == 0.0 or diag.min() / diag.max() < RANK_TOL:
        raise SingularDesignError(
            f"design is rank deficient (|R| diagonal ratio {diag.min() / max(diag.max(), 1e-300):.3g})"
        )
    qty = q.T @ y
    params = np.linalg.solve(r, qty) if k > 1 else qty / r[0, 0]
    params = np.atleast_1d(params)
    fitted = X @ params
    resid = y - fitted
    rss = float(resid @ resid)
    sigma2 = rss / (n - k)
    r_inv = np.linalg.inv(r) if k > 1 else np.array([[1.0 / r[0, 0]]])
    xtx_inv_diag = np.sum(r_inv * r_inv, axis=1)
    bse = np.sqrt(sigma2 * xtx_inv_diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        tvalues = np.where(bse > 0, params / np.where(bse > 0, bse, 1.0), np.sign(params) * np.inf)
    return OlsFit(
        params=params,
        resid=resid,
        rss=rss,
        nobs=n,
        k=k,
        bse=bse,
        tvalues=tvalues,
        fitted=fitted,
        intercept_included=intercept_included,
    )
