"""
End-to-end orchestration: config -> data -> stages -> staged, atomic output.

Each stage returns its table rows as plain dicts plus any figure-data files;
the CSV writer and :mod:`corrshift.report` both render from those same rows.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from corrshift import __version__
from corrshift.adf import adf_test, format_pvalue
from corrshift.chow import (
    ROLLING_CAVEAT,
    break_fit_figure_data,
    chow_on_pairwise_returns,
    chow_on_rolling_corr,
    rolling_chow_dates,
    significance_stars,
)
from corrshift.dcc import run_dcc
from corrshift.errors import CorrshiftError
from corrshift.garch import fit_garch
from corrshift.ingestion import RunConfig, load_config, read_price_csv
from corrshift.rolling import rolling_correlation
from corrshift.series import align_panel, compute_returns, descriptive_stats

logger = logging.getLogger(__name__)

__all__ = [
    "EXIT_FATAL",
    "EXIT_OK",
    "EXIT_PARTIAL",
    "EXIT_USAGE",
    "STAGES",
    "Inputs",
    "RunResult",
    "cmd_run",
    "cmd_stage",
    "load_inputs",
    "run_analysis",
]

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2, 64
STAGES = ("adf", "roll", "chow", "garch", "dcc")
_ALL = ("describe",) + STAGES


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if np.isnan(x) else repr(x)
    return str(x)


@dataclass
class CsvFile:
    name: str
    columns: list
    rows: list
    comments: list = field(default_factory=list)

    def render(self) -> str:
        buf = io.StringIO()
        for c in self.comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_num(row.get(c)) for c in self.columns])
        return buf.getvalue()


@dataclass
class Inputs:
    config: RunConfig
    prices: dict
    price_fields: dict
    panel: object
    window: object

    @property
    def span(self):
        return self.panel.take(self.window.span_mask(self.panel.dates))

    @property
    def pairs(self):
        base = self.config.base_asset_id
        return [(base, a) for a in self.panel.asset_ids if a != base]


def load_inputs(config: RunConfig) -> Inputs:
    """Parse every CSV, build returns, align them and resolve the event window."""
    prices = {}
    fields = {}
    for a in config.assets:
        series, used = read_price_csv(a.csv_path, a.asset_id, config.price_field)
        prices[a.asset_id] = series
        fields[a.asset_id] = used
    returns = [compute_returns(prices[a], config.risk_free_daily) for a in config.asset_ids]
    panel = align_panel(returns, forward_fill=config.forward_fill)
    window = config.resolve_window(panel.dates[0], panel.dates[-1])
    return Inputs(config, prices, fields, panel, window)


def _pair_tag(base, other):
    return f"{base}_{other}"


# ---------------------------------------------------------------- stages


def stage_describe(inp: Inputs, info: dict):
    rows = [
        {
            "asset": r.asset_id,
            "segment": r.segment,
            "mean_price": r.mean_price,
            "std_price": r.std_price,
            "mean_return": r.mean_return,
            "std_return": r.std_return,
            "n_prices": r.n_prices,
            "n_returns": r.n_returns,
        }
        for r in descriptive_stats(inp.panel, list(inp.prices.values()), inp.window)
    ]
    cols = ["asset", "segment", "mean_price", "std_price", "mean_return", "std_return", "n_prices", "n_returns"]
    return rows, [CsvFile("table2_descriptive.csv", cols, rows)]


def stage_adf(inp: Inputs, info: dict):
    cfg = inp.config
    span = inp.span
    rows = []
    for aid in span.asset_ids:
        res = adf_test(span.column(aid), cfg.adf_variant, cfg.adf_max_lags)
        rows.append(
            {
                "asset": aid,
                "adf_statistic": res.adf_statistic,
                "p_value": res.p_value,
                "p_value_text": format_pvalue(res.p_value),
                "lags_used": res.lags_used,
                "max_lags": res.max_lags,
                "n_effective": res.n_effective,
                "variant": res.variant,
                "crit_1pct": res.critical_values["1%"],
                "crit_5pct": res.critical_values["5%"],
                "crit_10pct": res.critical_values["10%"],
            }
        )
    info["adf"] = {
        "variant": cfg.adf_variant,
        "lag_selection": "AIC" if cfg.adf_max_lags == "auto" else "fixed",
        "lags_chosen": {r["asset"]: r["lags_used"] for r in rows},
        "max_lags": {r["asset"]: r["max_lags"] for r in rows},
        "sample": [str(span.dates[0]), str(span.dates[-1])],
    }
    cols = list(rows[0]) if rows else []
    return rows, [CsvFile("table1_adf.csv", cols, rows)]


def _rolling(inp: Inputs):
    out = {}
    for base, other in inp.pairs:
        for n in inp.config.windows:
            out[(base, other, n)] = rolling_correlation(inp.panel, other, base, n)
    return out


def stage_roll(inp: Inputs, info: dict, rolling=None):
    rolling = rolling or _rolling(inp)
    windows = inp.config.windows
    files = []
    undefined = {}
    for base, other in inp.pairs:
        first = min(windows)
        dates = rolling[(base, other, first)].dates
        cols = {}
        for n in windows:
            s = rolling[(base, other, n)]
            undefined[f"{base}-{other}-{n}"] = s.n_undefined
            full = np.full(dates.size, np.nan)
            full[np.searchsorted(dates, s.dates)] = s.values
            cols[n] = full
        rows = [
            {"date": str(d), **{f"corr_{n}": cols[n][i] for n in windows}} for i, d in enumerate(dates)
        ]
        files.append(
            CsvFile(f"fig1_{_pair_tag(base, other)}.csv", ["date"] + [f"corr_{n}" for n in windows], rows)
        )
    info["roll"] = {"windows": list(windows), "label": "window end date", "undefined_windows": undefined}
    return None, files


def stage_chow(inp: Inputs, info: dict, rolling=None):
    cfg = inp.config
    rolling = rolling or _rolling(inp)
    t3 = []
    for base, other in inp.pairs:
        r = chow_on_pairwise_returns(inp.panel, inp.window, base, other)
        t3.append(
            {
                "base": base,
                "other": other,
                "variable": f"{cfg.asset(other).name} excess return",
                "statistic": r.statistic,
                "p_value": r.p_value,
                "stars": r.stars,
                "break_confirmed": "Yes" if r.break_confirmed() else "No",
                "k": r.k,
                "n1": r.n1,
                "n2": r.n2,
                "df_num": r.df[0],
                "df_den": r.df[1],
                "rss_pooled": r.rss_pooled,
                "rss_1": r.rss_1,
                "rss_2": r.rss_2,
            }
        )
    t4 = []
    files = []
    for base, other in inp.pairs:
        for n in cfg.windows:
            s = rolling[(base, other, n)]
            r = chow_on_rolling_corr(s, inp.window.event_date, inp.window, trend=cfg.chow_trend)
            t4.append(
                {
                    "base": base,
                    "other": other,
                    "window": n,
                    "variable": f"Corr {base}-{cfg.asset(other).name} ({n}-day)",
                    "statistic": r.statistic,
                    "p_value": r.p_value,
                    "stars": r.stars,
                    "break_confirmed": "Yes" if r.break_confirmed() else "No",
                    "k": r.k,
                    "n1": r.n1,
                    "n2": r.n2,
                    "n_dropped_undefined": s.n_undefined,
                    "pre_mean": float(r.fit_pre.params[0]),
                    "post_mean": float(r.fit_post.params[0]),
                    "caveat": ROLLING_CAVEAT,
                }
            )
            dates = rolling_chow_dates(s, inp.window.event_date, inp.window)
            fig_rows = [
                {
                    "date": str(row.date),
                    "segment": "pre" if i < r.n1 else "post",
                    "observed": row.observed,
                    "fitted_segmented": row.fitted_segmented,
                    "fitted_pooled": row.fitted_pooled,
                }
                for i, row in enumerate(break_fit_figure_data(r, dates))
            ]
            files.append(
                CsvFile(
                    f"fig2_{_pair_tag(base, other)}_w{n}.csv",
                    ["date", "segment", "observed", "fitted_segmented", "fitted_pooled"],
                    fig_rows,
                    comments=[f"breakpoint: {inp.window.event_date}"],
                )
            )
    info["chow"] = {
        "breakpoint": str(inp.window.event_date),
        "pairwise_design": "base ~ 1 + other",
        "rolling_design": "corr ~ 1 + t" if cfg.chow_trend else "corr ~ 1",
        "break_level": 0.10,
    }
    files.insert(0, CsvFile("table4_chow_rolling.csv", list(t4[0]), t4))
    files.insert(0, CsvFile("table3_chow_pairwise.csv", list(t3[0]), t3))
    return {"table3": t3, "table4": t4}, files


def _fit_all_garch(inp: Inputs, info: dict):
    cfg = inp.config
    span = inp.span
    fits = {}
    meta = {}
    for aid in span.asset_ids:
        spec = cfg.asset(aid).garch
        fit = fit_garch(span.series(aid), spec, scale=cfg.return_scale)
        fits[aid] = fit
        meta[aid] = {
            "spec": {"arma_ar": spec.ar, "arma_ma": spec.ma, "garch_p": spec.p, "garch_q": spec.q},
            "iterations": fit.optim.nit,
            "function_evals": fit.optim.nfev,
            "converged": fit.optim.converged,
            "loglik": fit.loglik,
            "persistence": fit.persistence,
            "se_available": fit.se_available,
            "notes": list(fit.notes),
        }
    info["garch"] = {
        "return_scale": cfg.return_scale,
        "distribution": "normal",
        "sample": [str(span.dates[0]), str(span.dates[-1])],
        "nobs": len(span),
        "fits": meta,
    }
    return fits


def stage_garch(inp: Inputs, info: dict, fits=None):
    fits = fits or _fit_all_garch(inp, info)
    rows = []
    for aid, fit in fits.items():
        for name, est, se, t, p in zip(fit.param_names, fit.params, fit.bse, fit.tvalues, fit.pvalues):
            rows.append(
                {
                    "asset": aid,
                    "parameter": name,
                    "estimate": float(est),
                    "std_err": float(se),
                    "t_stat": float(t),
                    "p_value": float(p),
                    "stars": significance_stars(p) if np.isfinite(p) else "",
                }
            )
    cols = ["asset", "parameter", "estimate", "std_err", "t_stat", "p_value", "stars"]
    return rows, [CsvFile("table5_garch.csv", cols, rows)]


def stage_dcc(inp: Inputs, info: dict, fits=None):
    cfg = inp.config
    fits = fits or _fit_all_garch(inp, info)
    run = run_dcc(
        inp.span,
        cfg.garch_specs,
        base_id=cfg.base_asset_id,
        halfwidth=cfg.smoothing_halfwidth,
        scale=cfg.return_scale,
        pairwise=cfg.dcc_pairwise,
        garch_fits=fits,
    )
    files = []
    summary = []
    for (base, other), s in run.series.items():
        rows = [
            {"date": str(d), "rho_raw": float(r), "rho_smoothed": float(m)}
            for d, r, m in zip(s.dates, s.raw, s.smoothed)
        ]
        files.append(
            CsvFile(
                f"fig3_{_pair_tag(base, other)}.csv",
                ["date", "rho_raw", "rho_smoothed"],
                rows,
                comments=[f"event_date: {inp.window.event_date}"],
            )
        )
        pre = inp.window.pre_mask(s.dates)
        post = inp.window.post_mask(s.dates)
        fit = run.dcc.get("joint") or run.dcc[(base, other)]
        summary.append(
            {
                "base": base,
                "other": other,
                "a": fit.a,
                "b": fit.b,
                "mean_rho_pre": float(s.raw[pre].mean()) if pre.any() else float("nan"),
                "mean_rho_post": float(s.raw[post].mean()) if post.any() else float("nan"),
            }
        )
    files.append(CsvFile("dcc_summary.csv", list(summary[0]), summary))
    info["dcc"] = {
        "mode": "pairwise" if cfg.dcc_pairwise else "joint",
        "smoothing_halfwidth": cfg.smoothing_halfwidth,
        "q1_init": "Qbar",
        "qbar": "sample covariance of standardized residuals",
        "fits": {
            ("-".join(k) if isinstance(k, tuple) else k): {
                "a": f.a,
                "b": f.b,
                "loglik": None if np.isnan(f.loglik) else f.loglik,
                "iterations": None if f.optim is None else f.optim.nit,
                "degenerate": f.degenerate,
            }
            for k, f in run.dcc.items()
        },
    }
    return summary, files


# ---------------------------------------------------------------- driver


@dataclass
class RunResult:
    status: dict
    tables: dict
    files: list
    info: dict
    timing: dict
    warnings: list
    inputs: Inputs

    @property
    def partial(self) -> bool:
        return any(v != "ok" for v in self.status.values())


def run_analysis(config: RunConfig, stages=_ALL) -> RunResult:
    """Run the requested stages in memory; nothing is written to disk."""
    inp = load_inputs(config)
    status = {}
    tables = {}
    files = []
    info = {}
    timing = {}
    warns = list(config.warnings)
    rolling = None
    fits = None
    garch_error = None

    def go(name, fn, *args):
        t0 = time.perf_counter()
        try:
            rows, out = fn(inp, info, *args)
        except CorrshiftError as exc:
            status[name] = f"skipped: {exc}"
            warns.append(f"{name}: {exc}")
            logger.warning("stage %s skipped: %s", name, exc)
            return
        finally:
            timing[name] = round(time.perf_counter() - t0, 6)
        status[name] = "ok"
        tables[name] = rows
        files.extend(out)

    if "describe" in stages:
        go("describe", stage_describe)
    if "adf" in stages:
        go("adf", stage_adf)
    if "roll" in stages or "chow" in stages:
        rolling = _rolling(inp)
    if "roll" in stages:
        go("roll", stage_roll, rolling)
    if "chow" in stages:
        go("chow", stage_chow, rolling)
    if "garch" in stages or "dcc" in stages:
        t0 = time.perf_counter()
        try:
            fits = _fit_all_garch(inp, info)
        except CorrshiftError as exc:
            garch_error = exc
            warns.append(f"univariate GARCH: {exc}")
            logger.warning("univariate GARCH failed: %s", exc)
        timing["garch_fits"] = round(time.perf_counter() - t0, 6)
    for name, fn in (("garch", stage_garch), ("dcc", stage_dcc)):
        if name not in stages:
            continue
        if garch_error is not None:
            status[name] = f"skipped: {garch_error}"
        else:
            go(name, fn, fits)

    for w in info.get("garch", {}).get("fits", {}).values():
        warns.extend(w["notes"])
    return RunResult(status, tables, files, info, timing, warns, inp)


def _manifest(result: RunResult) -> dict:
    cfg = result.inputs.config
    inp = result.inputs
    w = inp.window
    return {
        "artifact": "corrshift",
        "version": __version__,
        "config_source": cfg.source,
        "config": cfg.echo(),
        "defaults_applied": list(cfg.defaults_applied),
        "data": {
            "price_field_used": inp.price_fields,
            "return_definition": "log return minus constant daily risk-free rate",
            "alignment": "forward-fill (zero return)" if cfg.forward_fill else "inner join on dates",
            "panel_rows": len(inp.panel),
            "panel_range": [str(inp.panel.dates[0]), str(inp.panel.dates[-1])],
            "window": {
                "event_date": str(w.event_date),
                "pre": [str(w.pre_start), str(w.pre_end)],
                "post": [str(w.post_start), str(w.post_end)],
            },
        },
        "stages": result.status,
        "parameters": result.info,
        "outputs": sorted(f.name for f in result.files) + ["manifest.json", "report.txt"],
        "warnings": result.warnings,
        "timing": result.timing,
    }


def _commit(files: dict, out_dir: Path) -> None:
    """Write ``files`` (name -> text) to a staging directory, then move them into place."""
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.staging-", dir=out_dir.parent))
    try:
        for name, text in files.items():
            with open(staging / name, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in files:
            os.replace(staging / name, out_dir / name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def _fatal(msg: str) -> int:
    print(f"corrshift: error: {msg}", file=sys.stderr)
    return EXIT_FATAL


def cmd_run(config_path, output_dir=None) -> int:
    """Full analysis; returns the process exit status."""
    from corrshift.report import render_report

    try:
        cfg = load_config(config_path)
        result = run_analysis(cfg)
        out = Path(output_dir) if output_dir is not None else Path(cfg.output_dir)
        payload = {f.name: f.render() for f in result.files}
        payload["manifest.json"] = json.dumps(_manifest(result), indent=2, sort_keys=False) + "\n"
        payload["report.txt"] = render_report(result.tables, result.status, result.inputs)
        _commit(payload, out)
    except (CorrshiftError, OSError) as exc:
        return _fatal(str(exc))
    return EXIT_PARTIAL if result.partial else EXIT_OK


def cmd_stage(stage: str, config_path, output_dir=None) -> int:
    """Run one stage (plus whatever it depends on) and write only its outputs."""
    if stage not in STAGES:
        print(f"corrshift: error: unknown stage {stage!r}; choose from {', '.join(STAGES)}",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(config_path)
        result = run_analysis(cfg, stages=(stage,))
        out = Path(output_dir) if output_dir is not None else Path(cfg.output_dir)
        _commit({f.name: f.render() for f in result.files}, out)
    except (CorrshiftError, OSError) as exc:
        return _fatal(str(exc))
    return EXIT_PARTIAL if result.partial else EXIT_OK
