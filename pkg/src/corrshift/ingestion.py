"""
Market-data CSV parsing and run-configuration loading.

Price files follow the Yahoo Finance export layout (``Date, Open, High, Low,
Close, Adj Close, Volume``). The run configuration is YAML; see
``data/synthetic/config.yaml`` for a complete example.
"""
from __future__ import annotations

import csv
import datetime as dt
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from corrshift.errors import (
    ConfigError,
    InsufficientDataError,
    IntegrityError,
    ParseError,
)
from corrshift.garch import GarchSpec
from corrshift.rolling import MIN_WINDOW
from corrshift.series import EventWindow, PriceSeries, as_date

logger = logging.getLogger(__name__)

__all__ = [
    "ROLES",
    "AssetSpec",
    "RunConfig",
    "load_config",
    "parse_price_csv",
    "read_price_csv",
    "write_price_csv",
]

ROLES = ("crypto", "equity_index", "commodity", "fx_index")
_EMPTY = {"", "null", "nan", "na", "n/a"}
_NUMERIC = ("open", "high", "low", "close", "adj close", "volume")


def _norm(h: str) -> str:
    return " ".join(h.strip().lower().replace("_", " ").split())


def read_price_csv(path, asset_id: str, price_field: str = "adj_close"):
    """Parse a price CSV and report which column supplied the prices.

    Returns
    -------
    (PriceSeries, str)
        The series and ``"adj_close"`` or ``"close"``.
    """
    path = Path(path)
    if price_field not in ("adj_close", "close"):
        raise ValueError(f"price_field must be 'adj_close' or 'close', got {price_field!r}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InsufficientDataError(f"{path}: file is empty") from None
        cols = {_norm(h): i for i, h in enumerate(header)}
        if "date" not in cols:
            raise ParseError("missing Date column", path, 1)
        if "close" not in cols and "adj close" not in cols:
            raise ParseError("missing Close column", path, 1)
        if price_field == "adj_close" and "adj close" in cols:
            used, pcol = "adj_close", cols["adj close"]
        elif "close" in cols:
            used, pcol = "close", cols["close"]
            if price_field == "adj_close":
                logger.warning("%s: no Adj Close column, using Close", path)
        else:
            used, pcol = "adj_close", cols["adj close"]
        numeric = [cols[c] for c in _NUMERIC if c in cols]

        rows = {}
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) < len(header):
                rec = rec + [""] * (len(header) - len(rec))
            if any(rec[i].strip().lower() in _EMPTY for i in numeric):
                logger.warning("%s:%d: empty numeric cell, row skipped", path, lineno)
                continue
            try:
                day = dt.date.fromisoformat(rec[cols["date"]].strip()[:10])
            except ValueError:
                raise ParseError(f"malformed date {rec[cols['date']]!r}", path, lineno) from None
            for i in numeric:
                try:
                    v = float(rec[i])
                except ValueError:
                    raise ParseError(f"non-numeric value {rec[i]!r} in {header[i]!r}", path, lineno) from None
                if not math.isfinite(v):
                    raise ParseError(f"non-finite value {rec[i]!r} in {header[i]!r}", path, lineno)
            price = float(rec[pcol])
            if price <= 0:
                raise ParseError(f"non-positive price {rec[pcol].strip()!r}", path, lineno)
            if day in rows:
                raise IntegrityError(f"{path}:{lineno}: duplicate date {day} (first seen on line {rows[day][1]})")
            rows[day] = (price, lineno)

    if not rows:
        raise InsufficientDataError(f"{path}: no data rows")
    days = sorted(rows)
    if len(days) < 2:
        raise InsufficientDataError(f"{path}: need at least 2 rows, got {len(days)}")
    dates = np.array([d.isoformat() for d in days], dtype="datetime64[D]")
    prices = np.array([rows[d][0] for d in days])
    return PriceSeries(asset_id, dates, prices), used


def parse_price_csv(path, asset_id: str, price_field: str = "adj_close") -> PriceSeries:
    """Parse a Yahoo-style daily price CSV into a date-sorted :class:`PriceSeries`.

    Header matching ignores case; ``Adj Close`` is used when present (unless
    ``price_field="close"``), otherwise ``Close``. Rows with an empty numeric
    cell are skipped with a warning.
    """
    return read_price_csv(path, asset_id, price_field)[0]


def write_price_csv(series: PriceSeries, path) -> None:
    """Write ``Date,Close,Adj Close`` rows; floats use ``repr`` so parsing round-trips."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Date", "Close", "Adj Close"])
        for d, p in zip(series.dates, series.prices):
            w.writerow([str(d), repr(float(p)), repr(float(p))])


@dataclass(frozen=True)
class AssetSpec:
    asset_id: str
    name: str
    csv_path: str
    role: str
    garch: GarchSpec = GarchSpec()


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration.

    Optional window bounds left out of the file are ``None`` and resolved
    against the data by :meth:`resolve_window`.
    """

    assets: tuple
    base_asset_id: str
    event_date: np.datetime64
    pre_start: np.datetime64 | None
    pre_end: np.datetime64
    post_start: np.datetime64
    post_end: np.datetime64 | None
    windows: tuple = (30, 60)
    risk_free_daily: float = 0.0
    forward_fill: bool = False
    price_field: str = "adj_close"
    adf_variant: str = "c"
    adf_max_lags: object = "auto"
    chow_trend: bool = False
    return_scale: float = 100.0
    smoothing_halfwidth: int = 5
    dcc_pairwise: bool = False
    output_dir: str = "out"
    source: str = ""
    defaults_applied: tuple = ()
    warnings: tuple = ()

    def asset(self, asset_id: str) -> AssetSpec:
        for a in self.assets:
            if a.asset_id == asset_id:
                return a
        raise KeyError(asset_id)

    @property
    def asset_ids(self) -> tuple:
        return tuple(a.asset_id for a in self.assets)

    @property
    def garch_specs(self) -> dict:
        return {a.asset_id: a.garch for a in self.assets}

    def resolve_window(self, first_date=None, last_date=None) -> EventWindow:
        pre_start = self.pre_start if self.pre_start is not None else first_date
        post_end = self.post_end if self.post_end is not None else last_date
        if pre_start is None or post_end is None:
            raise ConfigError("event.pre_start/post_end not configured and no data range given")
        return EventWindow(self.event_date, pre_start, self.pre_end, self.post_start, post_end)

    def echo(self) -> dict:
        """Plain-data view of every setting, for the run manifest."""
        return {
            "assets": [
                {
                    "id": a.asset_id,
                    "name": a.name,
                    "csv": a.csv_path,
                    "role": a.role,
                    "arma_ar": a.garch.ar,
                    "arma_ma": a.garch.ma,
                    "garch_p": a.garch.p,
                    "garch_q": a.garch.q,
                }
                for a in self.assets
            ],
            "base_asset": self.base_asset_id,
            "event": {
                "date": str(self.event_date),
                "pre_start": None if self.pre_start is None else str(self.pre_start),
                "pre_end": str(self.pre_end),
                "post_start": str(self.post_start),
                "post_end": None if self.post_end is None else str(self.post_end),
            },
            "analysis": {
                "windows": list(self.windows),
                "risk_free_daily": self.risk_free_daily,
                "forward_fill": self.forward_fill,
                "price_field": self.price_field,
                "adf_variant": self.adf_variant,
                "adf_max_lags": self.adf_max_lags,
                "chow_trend": self.chow_trend,
            },
            "models": {"return_scale": self.return_scale},
            "dcc": {"smoothing_halfwidth": self.smoothing_halfwidth, "pairwise": self.dcc_pairwise},
            "output": {"dir": self.output_dir},
        }


_SECTIONS = {
    "assets": None,
    "event": {"date", "pre_start", "pre_end", "post_start", "post_end"},
    "analysis": {
        "windows",
        "risk_free_daily",
        "base_asset",
        "forward_fill",
        "price_field",
        "adf_variant",
        "adf_max_lags",
        "chow_trend",
    },
    "models": {"garch_p", "garch_q", "arma_ar", "arma_ma", "return_scale"},
    "dcc": {"smoothing_halfwidth", "pairwise"},
    "output": {"dir"},
}
_ASSET_KEYS = {"id", "name", "csv", "role", "models"}
_MODEL_KEYS = {"garch_p", "garch_q", "arma_ar", "arma_ma"}


def _date(value, key):
    try:
        return as_date(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected an ISO date (YYYY-MM-DD), got {value!r}") from None


def _int(value, key, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}")
    return value


def load_config(path) -> RunConfig:
    """Read and validate a YAML run configuration.

    Missing optional keys take their defaults and are listed in
    ``RunConfig.defaults_applied``; unknown keys are logged and listed in
    ``RunConfig.warnings``. Relative CSV paths and ``output.dir`` resolve
    against the config file's directory.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base_dir = path.resolve().parent
    warns = []
    defaults = []

    def warn(msg):
        logger.warning("%s: %s", path, msg)
        warns.append(msg)

    for key in raw:
        if key not in _SECTIONS:
            warn(f"unknown key {key!r}")
    sections = {}
    for name, allowed in _SECTIONS.items():
        sec = raw.get(name)
        if name == "assets":
            continue
        if sec is None:
            sec = {}
        if not isinstance(sec, dict):
            raise ConfigError(f"{name}: expected a mapping")
        for key in sec:
            if key not in allowed:
                warn(f"unknown key '{name}.{key}'")
        sections[name] = sec

    def opt(section, key, default):
        sec = sections[section]
        if key in sec and sec[key] is not None:
            return sec[key]
        defaults.append(f"{section}.{key}")
        return default

    # models first: per-asset overrides fall back to these
    models = {
        "garch_p": _int(opt("models", "garch_p", 1), "models.garch_p", 1),
        "garch_q": _int(opt("models", "garch_q", 1), "models.garch_q", 1),
        "arma_ar": _int(opt("models", "arma_ar", 1), "models.arma_ar", 0),
        "arma_ma": _int(opt("models", "arma_ma", 1), "models.arma_ma", 0),
    }
    scale = float(opt("models", "return_scale", 100.0))
    if not scale > 0:
        raise ConfigError("models.return_scale must be positive")

    assets_raw = raw.get("assets")
    if not assets_raw:
        raise ConfigError(f"{path}: missing required key 'assets'")
    if not isinstance(assets_raw, list):
        raise ConfigError("assets: expected a list")
    assets = []
    seen = set()
    for i, a in enumerate(assets_raw):
        if not isinstance(a, dict):
            raise ConfigError(f"assets[{i}]: expected a mapping")
        for key in a:
            if key not in _ASSET_KEYS:
                warn(f"unknown key 'assets[{i}].{key}'")
        aid = a.get("id")
        if not aid or not isinstance(aid, str):
            raise ConfigError(f"assets[{i}]: missing 'id'")
        if aid in seen:
            raise ConfigError(f"assets[{i}]: duplicate id {aid!r}")
        seen.add(aid)
        csv_path = a.get("csv")
        if not csv_path:
            raise ConfigError(f"assets[{i}] ({aid}): missing 'csv'")
        role = a.get("role")
        if role is None:
            raise ConfigError(f"assets[{i}] ({aid}): missing 'role'")
        if role not in ROLES:
            raise ConfigError(f"assets[{i}] ({aid}): role must be one of {ROLES}, got {role!r}")
        over = a.get("models") or {}
        for key in over:
            if key not in _MODEL_KEYS:
                warn(f"unknown key 'assets[{i}].models.{key}'")
        orders = {k: _int(over.get(k, models[k]), f"assets[{i}].models.{k}", 0) for k in models}
        try:
            spec = GarchSpec(orders["arma_ar"], orders["arma_ma"], orders["garch_p"], orders["garch_q"])
        except ValueError as exc:
            raise ConfigError(f"assets[{i}] ({aid}): {exc}") from None
        resolved = os.path.normpath(os.path.join(base_dir, str(csv_path)))
        assets.append(AssetSpec(aid, str(a.get("name") or aid), resolved, role, spec))
    if len(assets) < 2:
        raise ConfigError("at least two assets are required")

    ev = sections["event"]
    if ev.get("date") is None:
        raise ConfigError(f"{path}: missing required key 'event.date'")
    event_date = _date(ev["date"], "event.date")
    pre_start = _date(ev["pre_start"], "event.pre_start") if ev.get("pre_start") is not None else None
    post_end = _date(ev["post_end"], "event.post_end") if ev.get("post_end") is not None else None
    if pre_start is None:
        defaults.append("event.pre_start")
    if post_end is None:
        defaults.append("event.post_end")
    pre_end = _date(opt("event", "pre_end", event_date - np.timedelta64(1, "D")), "event.pre_end")
    post_start = _date(opt("event", "post_start", event_date + np.timedelta64(1, "D")), "event.post_start")
    if not pre_end < event_date < post_start:
        raise ConfigError("event window must satisfy pre_end < event.date < post_start")
    if pre_start is not None and not pre_start < pre_end:
        raise ConfigError("event.pre_start must precede event.pre_end")
    if post_end is not None and not post_start < post_end:
        raise ConfigError("event.post_start must precede event.post_end")

    windows = opt("analysis", "windows", [30, 60])
    if not isinstance(windows, list) or not windows:
        raise ConfigError("analysis.windows must be a non-empty list of integers")
    windows = tuple(_int(w, "analysis.windows", MIN_WINDOW) for w in windows)
    rf = opt("analysis", "risk_free_daily", 0.0)
    if isinstance(rf, bool) or not isinstance(rf, (int, float)) or rf < 0:
        raise ConfigError(f"analysis.risk_free_daily must be a non-negative number, got {rf!r}")
    default_base = next((a.asset_id for a in assets if a.role == "crypto"), assets[0].asset_id)
    base = opt("analysis", "base_asset", default_base)
    if base not in seen:
        raise ConfigError(f"analysis.base_asset {base!r} is not among the assets {sorted(seen)}")
    price_field = opt("analysis", "price_field", "adj_close")
    if price_field not in ("adj_close", "close"):
        raise ConfigError("analysis.price_field must be 'adj_close' or 'close'")
    variant = str(opt("analysis", "adf_variant", "c"))
    if variant not in ("c", "ct", "n"):
        raise ConfigError("analysis.adf_variant must be one of c, ct, n")
    max_lags = opt("analysis", "adf_max_lags", "auto")
    if max_lags != "auto":
        max_lags = _int(max_lags, "analysis.adf_max_lags", 0)
    halfwidth = _int(opt("dcc", "smoothing_halfwidth", 5), "dcc.smoothing_halfwidth", 0)
    out_dir = str(opt("output", "dir", "out"))
    out_dir = os.path.normpath(os.path.join(base_dir, out_dir))

    return RunConfig(
        assets=tuple(assets),
        base_asset_id=base,
        event_date=event_date,
        pre_start=pre_start,
        pre_end=pre_end,
        post_start=post_start,
        post_end=post_end,
        windows=windows,
        risk_free_daily=float(rf),
        forward_fill=bool(opt("analysis", "forward_fill", False)),
        price_field=price_field,
        adf_variant=variant,
        adf_max_lags=max_lags,
        chow_trend=bool(opt("analysis", "chow_trend", False)),
        return_scale=scale,
        smoothing_halfwidth=halfwidth,
        dcc_pairwise=bool(opt("dcc", "pairwise", False)),
        output_dir=out_dir,
        source=str(path.resolve()),
        defaults_applied=tuple(defaults),
        warnings=tuple(warns),
    )
