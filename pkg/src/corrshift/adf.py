"""
Augmented Dickey-Fuller unit-root test.

P-values come from MacKinnon's (1994) response-surface approximation for a
single series; critical values from MacKinnon (2010) finite-sample surfaces.
Only the constants for one integrated variable (N = 1) are embedded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from corrshift.errors import DegenerateInputError, InsufficientDataError
from corrshift.linreg import ols
from corrshift.numerics import normal_cdf

__all__ = [
    "AdfResult",
    "adf_critical_values",
    "adf_test",
    "default_max_lags",
    "format_pvalue",
    "mackinnon_p",
]

VARIANTS = ("n", "c", "ct")
_VARIANT_ALIASES = {
    "none": "n",
    "nc": "n",
    "n": "n",
    "constant": "c",
    "c": "c",
    "constant+trend": "ct",
    "ct": "ct",
    "trend": "ct",
}

P_FLOOR = 1e-6
P_CEIL = 1.0 - 1e-6

# MacKinnon (1994), Table 3/4, first row (N = 1)
_TAU_STAR = {"n": -1.04, "c": -1.61, "ct": -2.89}
_TAU_MIN = {"n": -19.04, "c": -18.83, "ct": -16.18}
_TAU_MAX = {"n": math.inf, "c": 2.74, "ct": 0.7}
# p = Phi(sum_i coef_i * tau**i)
_SMALLP = {
    "n": (0.6344, 1.2378, 3.2496e-2),
    "c": (2.1659, 1.4412, 3.8269e-2),
    "ct": (3.2512, 1.6047, 4.9588e-2),
}
_LARGEP = {
    "n": (0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2),
    "c": (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2),
    "ct": (2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2),
}
# MacKinnon (2010): crit(T) = b0 + b1/T + b2/T^2 + b3/T^3 for 1%, 5%, 10%
_CRIT_2010 = {
    "n": (
        (-2.56574, -2.2358, -3.627, 0.0),
        (-1.94100, -0.2686, -3.365, 31.223),
        (-1.61682, 0.2656, -2.714, 25.364),
    ),
    "c": (
        (-3.43035, -6.5393, -16.786, -79.433),
        (-2.86154, -2.8903, -4.234, -40.040),
        (-2.56677, -1.5384, -2.809, 0.0),
    ),
    "ct": (
        (-3.95877, -9.0531, -28.428, -134.155),
        (-3.41049, -4.3904, -9.036, -45.374),
        (-3.12705, -2.5856, -3.925, -22.380),
    ),
}


def _variant(name: str) -> str:
    try:
        return _VARIANT_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown ADF regression variant {name!r}") from None


def mackinnon_p(stat: float, variant: str = "c") -> float:
    """Approximate p-value of a Dickey-Fuller tau statistic, clamped to [1e-6, 1 - 1e-6]."""
    v = _variant(variant)
    if stat > _TAU_MAX[v]:
        p = 1.0
    elif stat < _TAU_MIN[v]:
        p = 0.0
    else:
        coef = _SMALLP[v] if stat <= _TAU_STAR[v] else _LARGEP[v]
        p = normal_cdf(sum(c * stat**i for i, c in enumerate(coef)))
    return min(max(p, P_FLOOR), P_CEIL)


def adf_critical_values(nobs: int, variant: str = "c") -> dict:
    v = _variant(variant)
    out = {}
    for label, b in zip(("1%", "5%", "10%"), _CRIT_2010[v]):
        out[label] = b[0] + b[1] / nobs + b[2] / nobs**2 + b[3] / nobs**3
    return out


def format_pvalue(p: float) -> str:
    """Four-decimal rendering; anything below 5e-5 prints as ``0.0000``."""
    return "0.0000" if p < 5e-5 else f"{p:.4f}"


def default_max_lags(nobs: int) -> int:
    return int(math.floor(12.0 * (nobs / 100.0) ** 0.25))


@dataclass(frozen=True)
class AdfResult:
    adf_statistic: float
    p_value: float
    lags_used: int
    n_effective: int
    variant: str
    critical_values: dict = field(default_factory=dict)
    max_lags: int = 0
    ic_values: dict = field(default_factory=dict)

    @property
    def p_value_text(self) -> str:
        return format_pvalue(self.p_value)


def _design(y: np.ndarray, lags: int, nobs_drop: int, variant: str):
    """Regression arrays for lag order ``lags`` using rows ``nobs_drop..`` of the differences."""
    dy = np.diff(y)
    n = dy.size - nobs_drop
    cols = []
    if variant in ("c", "ct"):
        cols.append(np.ones(n))
    if variant == "ct":
        # trend counts from the first usable observation
        cols.append(np.arange(1, n + 1, dtype=float))
    cols.append(y[nobs_drop:-1])
    for i in range(1, lags + 1):
        cols.append(dy[nobs_drop - i : dy.size - i])
    return dy[nobs_drop:], np.column_stack(cols)


def _gamma_index(variant: str) -> int:
    return {"n": 0, "c": 1, "ct": 2}[variant]


def adf_test(series, variant: str = "c", max_lags: int | str | None = "auto") -> AdfResult:
    """Augmented Dickey-Fuller test.

    Fits ``dy_t = c [+ d t] + g y_{t-1} + sum_i phi_i dy_{t-i} + e_t`` and
    reports the t-ratio on ``g``.

    Parameters
    ----------
    series : array_like
        Observations in time order (levels of the series being tested).
    variant : {"c", "ct", "n"}
        Deterministic terms. Long names ("constant", "constant+trend",
        "none") are accepted.
    max_lags : int, "auto" or None
        ``"auto"``/``None`` selects the lag by AIC over
        ``0..floor(12 (n/100)^0.25)``. An integer fixes the lag order.

    Notes
    -----
    Lag selection compares every candidate on the common sample that drops
    the first ``max_lag`` differences; the chosen order is then refit on all
    rows it can use.
    """
    y = np.asarray(series, dtype=float).ravel()
    v = _variant(variant)
    nobs = y.size
    auto = max_lags is None or (isinstance(max_lags, str) and max_lags.lower() == "auto")
    maxlag = default_max_lags(nobs) if auto else int(max_lags)
    if maxlag < 0:
        raise ValueError("max_lags must be non-negative")
    if nobs < maxlag + 10:
        raise InsufficientDataError(f"ADF needs at least max_lags + 10 = {maxlag + 10} points, got {nobs}")
    if not np.all(np.isfinite(y)):
        raise ValueError("ADF input must be finite")
    if np.ptp(y) == 0.0:
        raise DegenerateInputError("ADF input is constant")

    gi = _gamma_index(v)
    ic = {}
    if auto:
        best = None
        for lag in range(maxlag + 1):
            dy, X = _design(y, lag, maxlag, v)
            fit = ols(dy, X, intercept_included=v != "n")
            n = fit.nobs
            aic = n * math.log(fit.rss / n) + 2 * fit.k
            ic[lag] = aic
            if best is None or aic < best[0]:
                best = (aic, lag)
        lags = best[1]
    else:
        lags = maxlag

    dy, X = _design(y, lags, lags, v)
    fit = ols(dy, X, intercept_included=v != "n")
    stat = float(fit.tvalues[gi])
    return AdfResult(
        adf_statistic=stat,
        p_value=mackinnon_p(stat, v),
        lags_used=lags,
        n_effective=fit.nobs,
        variant=v,
        critical_values=adf_critical_values(fit.nobs, v),
        max_lags=maxlag,
        ic_values=ic,
    )
