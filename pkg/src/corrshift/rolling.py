"""
Trailing-window Pearson correlation.

The value stamped on date ``t`` uses the ``N`` aligned observations ending at
``t``, with the window means recomputed for every window. A window in which
either column is constant has no correlation; it is stored as ``NaN`` and
flagged in :attr:`RollingCorrSeries.defined`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from corrshift.errors import WindowError
from corrshift.series import ReturnPanel, _frozen

logger = logging.getLogger(__name__)

__all__ = ["MIN_WINDOW", "RollingCorrSeries", "rolling_correlation", "rolling_pearson"]

MIN_WINDOW = 3


@dataclass(frozen=True)
class RollingCorrSeries:
    base_asset_id: str
    other_asset_id: str
    window: int
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _frozen(self.dates))
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))

    def __len__(self):
        return self.dates.size

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def n_undefined(self) -> int:
        return int((~self.defined).sum())

    def dropna(self) -> "RollingCorrSeries":
        keep = self.defined
        if not keep.all():
            logger.info(
                "%s-%s (N=%d): dropping %d undefined windows",
                self.base_asset_id,
                self.other_asset_id,
                self.window,
                int((~keep).sum()),
            )
        return RollingCorrSeries(
            self.base_asset_id, self.other_asset_id, self.window, self.dates[keep], self.values[keep]
        )


def rolling_pearson(x, y, window: int) -> np.ndarray:
    """Per-window Pearson correlation of two equal-length arrays.

    Returns an array of length ``len(x) - window + 1``; entry ``j`` covers
    ``x[j:j + window]``. Constant windows give ``NaN``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    wx = sliding_window_view(x, window)
    wy = sliding_window_view(y, window)
    dx = wx - wx.mean(axis=1, keepdims=True)
    dy = wy - wy.mean(axis=1, keepdims=True)
    sxy = np.einsum("ij,ij->i", dx, dy)
    sxx = np.einsum("ij,ij->i", dx, dx)
    syy = np.einsum("ij,ij->i", dy, dy)
    flat = (np.ptp(wx, axis=1) == 0) | (np.ptp(wy, axis=1) == 0)
    denom = np.sqrt(sxx * syy)
    out = np.full(sxy.shape, np.nan)
    ok = ~flat & (denom > 0)
    out[ok] = np.clip(sxy[ok] / denom[ok], -1.0, 1.0)
    return out


def rolling_correlation(panel: ReturnPanel, x_id: str, y_id: str, window: int) -> RollingCorrSeries:
    """Rolling correlation between panel columns ``x_id`` and ``y_id``.

    ``y_id`` is recorded as the base asset, matching the convention that the
    base asset is the dependent variable of every pair.
    """
    window = int(window)
    x = panel.column(x_id)
    y = panel.column(y_id)
    if window < MIN_WINDOW:
        raise WindowError(f"rolling window must be at least {MIN_WINDOW}, got {window}")
    if window > len(panel):
        raise WindowError(f"rolling window {window} exceeds panel length {len(panel)}")
    values = rolling_pearson(x, y, window)
    return RollingCorrSeries(y_id, x_id, window, panel.dates[window - 1 :], values)
