"""
Chow tests at a known breakpoint.

Two flavours are used by the event study: the pairwise return regression
``y_base = a + b * x_other + e`` split at the event date, and an intercept-only
regression of a rolling-correlation series (a mean-shift F test).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from corrshift.errors import InsufficientDataError, SingularDesignError
from corrshift.linreg import OlsFit, ols
from corrshift.numerics import f_sf
from corrshift.rolling import RollingCorrSeries
from corrshift.series import EventWindow, ReturnPanel, as_date

logger = logging.getLogger(__name__)

__all__ = [
    "ROLLING_CAVEAT",
    "BreakFitRow",
    "ChowResult",
    "break_fit_figure_data",
    "chow_on_pairwise_returns",
    "chow_on_rolling_corr",
    "chow_test",
    "significance_stars",
]

_RSS_RTOL = 1e-13

ROLLING_CAVEAT = "overlapping windows make observations serially dependent; F p-value is nominal"


def significance_stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


@dataclass(frozen=True)
class ChowResult:
    statistic: float
    p_value: float
    k: int
    n1: int
    n2: int
    rss_pooled: float
    rss_1: float
    rss_2: float
    fit_pre: OlsFit
    fit_post: OlsFit
    fit_pooled: OlsFit
    break_index: int

    @property
    def df(self) -> tuple:
        return self.k, self.n1 + self.n2 - 2 * self.k

    @property
    def stars(self) -> str:
        return significance_stars(self.p_value)

    def break_confirmed(self, level: float = 0.10) -> bool:
        return self.p_value < level


def _fit(y, X, which):
    try:
        return ols(y, X)
    except SingularDesignError as exc:
        raise SingularDesignError(str(exc), which=which) from None


def chow_test(y, X, break_index: int) -> ChowResult:
    """Chow F test for a coefficient change between ``[:break_index]`` and ``[break_index:]``.

    ``X`` must already contain the intercept column.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    n1 = int(break_index)
    n2 = n - n1
    if n1 <= k or n2 <= k:
        raise InsufficientDataError(
            f"each Chow segment needs more than k={k} observations (got {n1} and {n2})"
        )
    fit_pooled = _fit(y, X, "pooled")
    fit_pre = _fit(y[:n1], X[:n1], "pre-break")
    fit_post = _fit(y[n1:], X[n1:], "post-break")
    rss_u = fit_pre.rss + fit_post.rss
    dof = n1 + n2 - 2 * k
    # differences at rounding level (exact fits, or a hair below zero) count as no change
    gap = fit_pooled.rss - rss_u
    yc = y - y.mean()
    if gap <= _RSS_RTOL * float(yc @ yc):
        gap = 0.0
    num = gap / k
    den = rss_u / dof
    if num == 0.0:
        stat = 0.0
    elif den == 0.0:
        stat = float("inf")
    else:
        stat = num / den
    return ChowResult(
        statistic=float(stat),
        p_value=f_sf(stat, k, dof),
        k=k,
        n1=n1,
        n2=n2,
        rss_pooled=fit_pooled.rss,
        rss_1=fit_pre.rss,
        rss_2=fit_post.rss,
        fit_pre=fit_pre,
        fit_post=fit_post,
        fit_pooled=fit_pooled,
        break_index=n1,
    )


def chow_on_pairwise_returns(
    panel: ReturnPanel, window: EventWindow, base_id: str, other_id: str
) -> ChowResult:
    """Chow test of ``base = a + b * other + e`` on the pre/post event segments."""
    pre = window.pre_mask(panel.dates)
    post = window.post_mask(panel.dates)
    y_all = panel.column(base_id)
    x_all = panel.column(other_id)
    if not pre.any() or not post.any():
        raise InsufficientDataError(f"{base_id}~{other_id}: an event segment is empty")
    y = np.concatenate([y_all[pre], y_all[post]])
    x = np.concatenate([x_all[pre], x_all[post]])
    X = np.column_stack([np.ones(y.size), x])
    return chow_test(y, X, int(pre.sum()))


def _rolling_split(series: RollingCorrSeries, event_date, window: EventWindow | None):
    s = series.dropna()
    ev = as_date(event_date)
    if window is None:
        pre = s.dates < ev
        post = s.dates > ev
    else:
        pre = window.pre_mask(s.dates)
        post = window.post_mask(s.dates)
    return s, pre, post


def chow_on_rolling_corr(
    series: RollingCorrSeries,
    event_date,
    window: EventWindow | None = None,
    trend: bool = False,
) -> ChowResult:
    """Mean-shift Chow test on a rolling-correlation series.

    Observations are labelled by window end date. Everything dated before
    ``event_date`` is pre, everything after is post, the event date itself is
    dropped. Passing ``window`` further restricts both sides to the event
    window's segment bounds. ``trend=True`` adds a linear time trend to the
    regression (sensitivity option; the default is constant only).
    """
    s, pre, post = _rolling_split(series, event_date, window)
    if pre.sum() < 2 or post.sum() < 2:
        raise InsufficientDataError(
            f"rolling series {s.base_asset_id}-{s.other_asset_id} needs >1 observation "
            f"on each side of {as_date(event_date)} (got {int(pre.sum())}, {int(post.sum())})"
        )
    y = np.concatenate([s.values[pre], s.values[post]])
    cols = [np.ones(y.size)]
    if trend:
        t = np.concatenate([np.flatnonzero(pre), np.flatnonzero(post)]).astype(float)
        cols.append(t)
    return chow_test(y, np.column_stack(cols), int(pre.sum()))


@dataclass(frozen=True)
class BreakFitRow:
    date: np.datetime64
    observed: float
    fitted_segmented: float
    fitted_pooled: float


def break_fit_figure_data(result: ChowResult, dates) -> list:
    """Observed values with the per-segment and pooled fitted lines, one row per date."""
    dates = np.asarray(dates, dtype="datetime64[D]")
    seg = np.concatenate([result.fit_pre.fitted, result.fit_post.fitted])
    pooled = result.fit_pooled.fitted
    observed = pooled + result.fit_pooled.resid
    if dates.size != observed.size:
        raise ValueError(f"{dates.size} dates for {observed.size} fitted observations")
    return [
        BreakFitRow(d, float(o), float(s), float(p))
        for d, o, s, p in zip(dates, observed, seg, pooled)
    ]


def rolling_chow_dates(series: RollingCorrSeries, event_date, window: EventWindow | None = None):
    """Dates of the observations :func:`chow_on_rolling_corr` actually used, in order."""
    s, pre, post = _rolling_split(series, event_date, window)
    return np.concatenate([s.dates[pre], s.dates[post]])
