"""
Synthetic four-asset fixture with a correlation regime change.

The shipped copy lives in ``corrshift/data/synthetic``; regenerate it with
``python -m corrshift.synthetic DIR``. Output is a pure function of the seed.

Daily shocks are drawn on the full calendar, with per-asset GARCH(1,1)
volatility and a cross-asset correlation matrix that switches on the event
date. The crypto asset trades every day; the others keep weekdays only, so
their Monday return absorbs the weekend shocks.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from corrshift.ingestion import write_price_csv
from corrshift.series import PriceSeries

__all__ = ["ASSETS", "EVENT_DATE", "fixture_config", "make_fixture", "simulate_prices"]

EVENT_DATE = np.datetime64("2024-01-10")
START, END = np.datetime64("2023-07-01"), np.datetime64("2024-04-30")

# id, name, role, start price, daily vol, daily drift
ASSETS = (
    ("BTC", "Bitcoin", "crypto", 30000.0, 0.025, 0.0015),
    ("SPX", "S&P 500", "equity_index", 4450.0, 0.008, 0.0004),
    ("GOLD", "Gold", "commodity", 1920.0, 0.008, 0.0002),
    ("DXY", "US Dollar Index", "fx_index", 102.5, 0.004, 0.0),
)

_CORR_PRE = np.array(
    [
        [1.00, 0.10, 0.30, -0.10],
        [0.10, 1.00, 0.05, -0.20],
        [0.30, 0.05, 1.00, -0.30],
        [-0.10, -0.20, -0.30, 1.00],
    ]
)
_CORR_POST = np.array(
    [
        [1.00, 0.55, 0.05, -0.45],
        [0.55, 1.00, 0.05, -0.20],
        [0.05, 0.05, 1.00, -0.30],
        [-0.45, -0.20, -0.30, 1.00],
    ]
)

_CONFIG = """\
# Synthetic fixture: BTC correlation regime change on the event date.
assets:
  - {id: BTC, name: Bitcoin, csv: BTC.csv, role: crypto}
  - {id: SPX, name: S&P 500, csv: SPX.csv, role: equity_index}
  - {id: GOLD, name: Gold, csv: GOLD.csv, role: commodity}
  - {id: DXY, name: US Dollar Index, csv: DXY.csv, role: fx_index}
event:
  date: 2024-01-10
  pre_start: 2023-10-01
  pre_end: 2024-01-09
  post_start: 2024-01-11
  post_end: 2024-04-30
analysis:
  windows: [30, 60]
  risk_free_daily: 0.0
  base_asset: BTC
models:
  arma_ar: 1
  arma_ma: 1
  garch_p: 1
  garch_q: 1
  return_scale: 100
dcc:
  smoothing_halfwidth: 5
output:
  dir: out
"""


def simulate_prices(seed: int = 20240110) -> dict:
    """Return ``{asset_id: PriceSeries}`` for the four fixture assets."""
    rng = np.random.default_rng(seed)
    days = np.arange(START, END + np.timedelta64(1, "D"))
    n, m = days.size, len(ASSETS)
    chol_pre = np.linalg.cholesky(_CORR_PRE)
    chol_post = np.linalg.cholesky(_CORR_POST)
    z = rng.standard_normal((n, m))
    post = days >= EVENT_DATE
    z = np.where(post[:, None], z @ chol_post.T, z @ chol_pre.T)

    alpha, beta = 0.08, 0.88
    h = np.ones(m)
    ret = np.empty((n, m))
    for t in range(n):
        e = np.sqrt(h) * z[t]
        ret[t] = e
        h = (1 - alpha - beta) + alpha * e**2 + beta * h
    vol = np.array([a[4] for a in ASSETS])
    drift = np.array([a[5] for a in ASSETS])
    logp = np.log([a[3] for a in ASSETS]) + np.cumsum(drift + vol * ret, axis=0)

    weekday = (days.astype("datetime64[D]").view("int64") - 4) % 7 < 5  # 1970-01-05 was a Monday
    out = {}
    for j, (aid, *_rest) in enumerate(ASSETS):
        keep = slice(None) if aid == "BTC" else weekday
        px = np.round(np.exp(logp[keep, j]), 4)
        out[aid] = PriceSeries(aid, days[keep], px)
    return out


def make_fixture(out_dir, seed: int = 20240110) -> list:
    """Write the four CSVs and ``config.yaml`` into ``out_dir``; return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for aid, series in simulate_prices(seed).items():
        p = out_dir / f"{aid}.csv"
        write_price_csv(series, p)
        paths.append(p)
    cfg = out_dir / "config.yaml"
    cfg.write_text(_CONFIG, encoding="utf-8")
    paths.append(cfg)
    return paths


def fixture_config() -> Path:
    """Path of the shipped fixture's ``config.yaml``."""
    return Path(__file__).parent / "data" / "synthetic" / "config.yaml"


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).parent / "data" / "synthetic")
    for p in make_fixture(target):
        print(p)
