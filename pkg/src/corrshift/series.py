"""
Core time-series containers and the calendar plumbing shared by every stage.

Dates are held as ``numpy.datetime64[D]`` arrays. Any API that accepts a single
date also takes a :class:`datetime.date` or an ISO string.
"""
from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from corrshift.errors import (
    InsufficientDataError,
    LookupFailure,
    NoOverlapError,
    RejectedInputError,
)

logger = logging.getLogger(__name__)

DateLike = Union[dt.date, np.datetime64, str]

__all__ = [
    "DescriptiveRow",
    "EventWindow",
    "PriceSeries",
    "ReturnPanel",
    "ReturnSeries",
    "align_panel",
    "as_date",
    "compute_returns",
    "descriptive_stats",
    "segment",
]


def as_date(value: DateLike) -> np.datetime64:
    """Coerce ``value`` to a day-resolution ``datetime64``."""
    if isinstance(value, np.datetime64):
        return value.astype("datetime64[D]")
    if isinstance(value, dt.datetime):
        value = value.date()
    if isinstance(value, dt.date):
        return np.datetime64(value.isoformat(), "D")
    if isinstance(value, str):
        # round-trip through date.fromisoformat so that 2024-02-30 is rejected
        return np.datetime64(dt.date.fromisoformat(value.strip()).isoformat(), "D")
    raise TypeError(f"cannot interpret {value!r} as a date")


def _as_dates(values: Iterable[DateLike]) -> np.ndarray:
    if isinstance(values, np.ndarray) and np.issubdtype(values.dtype, np.datetime64):
        return values.astype("datetime64[D]")
    return np.array([as_date(v) for v in values], dtype="datetime64[D]")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _check_increasing(dates: np.ndarray, what: str) -> None:
    if dates.size > 1 and not np.all(dates[1:] > dates[:-1]):
        raise RejectedInputError(f"{what}: dates must be strictly increasing")


@dataclass(frozen=True)
class PriceSeries:
    """Dated closing prices for one asset."""

    asset_id: str
    dates: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        prices = np.asarray(self.prices, dtype=float)
        if dates.shape != prices.shape or dates.ndim != 1:
            raise RejectedInputError(f"{self.asset_id}: dates and prices must be equal-length 1-d")
        if dates.size < 2:
            raise InsufficientDataError(
                f"{self.asset_id}: need at least 2 price observations, got {dates.size}"
            )
        _check_increasing(dates, self.asset_id)
        bad = ~np.isfinite(prices) | (prices <= 0)
        if bad.any():
            i = int(np.argmax(bad))
            raise RejectedInputError(
                f"{self.asset_id}: non-positive price {prices[i]!r} on {dates[i]}"
            )
        object.__setattr__(self, "dates", _frozen(dates))
        object.__setattr__(self, "prices", _frozen(prices))

    def __len__(self):
        return self.dates.size

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.asset_id == other.asset_id
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.prices, other.prices)
        )

    __hash__ = None

    def between(self, start: DateLike, end: DateLike) -> np.ndarray:
        """Prices with ``start <= date <= end``."""
        mask = (self.dates >= as_date(start)) & (self.dates <= as_date(end))
        return self.prices[mask]


@dataclass(frozen=True)
class ReturnSeries:
    """Dated excess returns for one asset."""

    asset_id: str
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape or dates.ndim != 1:
            raise RejectedInputError(f"{self.asset_id}: dates and values must be equal-length 1-d")
        _check_increasing(dates, self.asset_id)
        if not np.all(np.isfinite(values)):
            raise RejectedInputError(f"{self.asset_id}: returns must be finite")
        object.__setattr__(self, "dates", _frozen(dates))
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self):
        return self.dates.size


@dataclass(frozen=True)
class ReturnPanel:
    """Rectangular, date-aligned block of return columns.

    ``columns`` keeps insertion order; that order is the column order used by
    :meth:`matrix`.
    """

    dates: np.ndarray
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        dates = _as_dates(self.dates)
        _check_increasing(dates, "panel")
        cols = {}
        for key, col in dict(self.columns).items():
            col = np.asarray(col, dtype=float)
            if col.shape != dates.shape:
                raise RejectedInputError(
                    f"panel column {key!r} has {col.size} rows, expected {dates.size}"
                )
            if not np.all(np.isfinite(col)):
                raise RejectedInputError(f"panel column {key!r} has missing or non-finite cells")
            cols[key] = _frozen(col)
        object.__setattr__(self, "dates", _frozen(dates))
        object.__setattr__(self, "columns", cols)

    def __len__(self):
        return self.dates.size

    @property
    def asset_ids(self) -> tuple:
        return tuple(self.columns)

    def column(self, asset_id: str) -> np.ndarray:
        try:
            return self.columns[asset_id]
        except KeyError:
            raise LookupFailure(
                f"unknown asset {asset_id!r}; panel has {list(self.columns)}"
            ) from None

    def matrix(self, asset_ids: Sequence[str] | None = None) -> np.ndarray:
        """``T x m`` array of the requested columns (all by default)."""
        ids = self.asset_ids if asset_ids is None else asset_ids
        return np.column_stack([self.column(a) for a in ids])

    def take(self, mask: np.ndarray) -> "ReturnPanel":
        return ReturnPanel(self.dates[mask], {k: v[mask] for k, v in self.columns.items()})

    def between(self, start: DateLike, end: DateLike) -> "ReturnPanel":
        return self.take((self.dates >= as_date(start)) & (self.dates <= as_date(end)))

    def series(self, asset_id: str) -> ReturnSeries:
        return ReturnSeries(asset_id, self.dates, self.column(asset_id))


@dataclass(frozen=True)
class EventWindow:
    """Pre/post sample bounds around an event date; the event day belongs to neither."""

    event_date: np.datetime64
    pre_start: np.datetime64
    pre_end: np.datetime64
    post_start: np.datetime64
    post_end: np.datetime64

    def __post_init__(self):
        for name in ("event_date", "pre_start", "pre_end", "post_start", "post_end"):
            object.__setattr__(self, name, as_date(getattr(self, name)))
        ok = (
            self.pre_start < self.pre_end < self.event_date <= self.post_start < self.post_end
        )
        if not ok:
            raise RejectedInputError(
                "event window must satisfy pre_start < pre_end < event_date <= "
                f"post_start < post_end, got {self.pre_start}..{self.pre_end} | "
                f"{self.event_date} | {self.post_start}..{self.post_end}"
            )
        if self.post_start == self.event_date:
            raise RejectedInputError("event date must be excluded from the post segment")

    def pre_mask(self, dates: np.ndarray) -> np.ndarray:
        return (dates >= self.pre_start) & (dates <= self.pre_end)

    def post_mask(self, dates: np.ndarray) -> np.ndarray:
        return (dates >= self.post_start) & (dates <= self.post_end)

    def span_mask(self, dates: np.ndarray) -> np.ndarray:
        return (dates >= self.pre_start) & (dates <= self.post_end)


def compute_returns(prices: PriceSeries, risk_free_daily: float = 0.0) -> ReturnSeries:
    """Log excess returns ``ln(P_t / P_{t-1}) - risk_free_daily``.

    The first observation is consumed; the return is stamped with the later date.
    """
    if risk_free_daily < 0 or not np.isfinite(risk_free_daily):
        raise RejectedInputError(f"risk_free_daily must be >= 0, got {risk_free_daily}")
    if len(prices) < 2:
        raise InsufficientDataError(f"{prices.asset_id}: need at least 2 prices")
    r = np.diff(np.log(prices.prices)) - risk_free_daily
    return ReturnSeries(prices.asset_id, prices.dates[1:], r)


def align_panel(series: Sequence[ReturnSeries], forward_fill: bool = False) -> ReturnPanel:
    """Join return series on their common dates.

    With ``forward_fill`` the union of dates inside the common span is used and
    a missing cell becomes a zero return (the price carried forward). This is
    meant for sensitivity checks only: it biases correlations toward zero.
    """
    series = list(series)
    if len(series) < 2:
        raise InsufficientDataError("align_panel needs at least 2 series")
    for s in series:
        if len(s) == 0:
            raise InsufficientDataError(f"{s.asset_id}: empty return series")
    ids = [s.asset_id for s in series]
    if len(set(ids)) != len(ids):
        raise RejectedInputError(f"duplicate asset ids in {ids}")

    if not forward_fill:
        common = series[0].dates
        for s in series[1:]:
            common = np.intersect1d(common, s.dates, assume_unique=True)
        if common.size == 0:
            raise NoOverlapError(f"no common dates across assets {ids}")
        cols = {}
        for s in series:
            keep = np.isin(s.dates, common, assume_unique=True)
            cols[s.asset_id] = s.values[keep]
        return ReturnPanel(common, cols)

    lo = max(s.dates[0] for s in series)
    hi = min(s.dates[-1] for s in series)
    if lo > hi:
        raise NoOverlapError(f"date ranges of {ids} do not overlap")
    union = series[0].dates
    for s in series[1:]:
        union = np.union1d(union, s.dates)
    union = union[(union >= lo) & (union <= hi)]
    cols = {}
    for s in series:
        col = np.zeros(union.size)
        pos = np.searchsorted(union, s.dates)
        inside = (s.dates >= lo) & (s.dates <= hi)
        col[pos[inside]] = s.values[inside]
        filled = union.size - int(inside.sum())
        if filled:
            logger.info("%s: %d missing days filled with zero return", s.asset_id, filled)
        cols[s.asset_id] = col
    return ReturnPanel(union, cols)


def segment(panel: ReturnPanel, window: EventWindow) -> tuple:
    """Split ``panel`` into its pre-event and post-event rows."""
    pre = panel.take(window.pre_mask(panel.dates))
    post = panel.take(window.post_mask(panel.dates))
    if len(pre) == 0 or len(post) == 0:
        raise InsufficientDataError(
            f"event window leaves an empty segment (pre={len(pre)}, post={len(post)} rows)"
        )
    return pre, post


def _mean_std(x: np.ndarray) -> tuple:
    # fsum is correctly rounded, so the result does not depend on row order
    n = x.size
    m = math.fsum(x) / n
    return m, math.sqrt(math.fsum((x - m) ** 2) / (n - 1))


@dataclass(frozen=True)
class DescriptiveRow:
    asset_id: str
    segment: str
    mean_price: float
    std_price: float
    mean_return: float
    std_return: float
    n_prices: int
    n_returns: int


def descriptive_stats(
    panel: ReturnPanel, prices: Sequence[PriceSeries], window: EventWindow
) -> list:
    """Per-asset, per-segment price and return moments (sample std, ``ddof=1``).

    Prices are taken from each asset's own calendar within the segment dates;
    returns come from the aligned panel.
    """
    by_id = {p.asset_id: p for p in prices}
    rows = []
    for asset_id in panel.asset_ids:
        if asset_id not in by_id:
            raise LookupFailure(f"no price series for panel column {asset_id!r}")
        px = by_id[asset_id]
        r = panel.column(asset_id)
        for name, lo, hi, mask in (
            ("pre", window.pre_start, window.pre_end, window.pre_mask(panel.dates)),
            ("post", window.post_start, window.post_end, window.post_mask(panel.dates)),
        ):
            p = px.between(lo, hi)
            rr = r[mask]
            if p.size < 2 or rr.size < 2:
                raise InsufficientDataError(
                    f"{asset_id} {name} segment has {p.size} prices / {rr.size} returns; need 2"
                )
            mp, sp = _mean_std(p)
            mr, sr = _mean_std(rr)
            rows.append(DescriptiveRow(asset_id, name, mp, sp, mr, sr, int(p.size), int(rr.size)))
    return rows
