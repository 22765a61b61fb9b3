"""
Human-readable ``report.txt``.

Only formats rows that the pipeline also writes to CSV; nothing is computed
here beyond rounding.
"""
from __future__ import annotations

import math

__all__ = ["render_report", "fmt4", "fmt_price"]


def fmt4(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "n/a"
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.4f}"


def fmt_price(x) -> str:
    return f"{x:.1f}"


def _p(x) -> str:
    # p-values below the 4-decimal resolution show as 0.0000, never as 0.0
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "n/a"
    return "0.0000" if x < 5e-5 else f"{x:.4f}"


def _numeric(cell) -> bool:
    try:
        float(str(cell).replace(",", "").rstrip("*"))
    except ValueError:
        return cell == "n/a"
    return True


def _table(header, rows) -> list:
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    line = "  ".join(str(h).ljust(w) for h, w in zip(header, widths)).rstrip()
    out = [line, "-" * len(line)]
    for r in rows:
        out.append("  ".join(str(c).rjust(w) if _numeric(c) else str(c).ljust(w)
                             for c, w in zip(r, widths)).rstrip())
    return out


def _section(title, status, body) -> list:
    out = ["", title, "=" * len(title)]
    if status is None:
        status = "skipped: not requested"
    if status != "ok":
        return out + [f"(stage skipped: {status.removeprefix('skipped: ')})"]
    return out + body()


_STARS = "*** p<0.01, ** p<0.05, * p<0.10"


def render_report(tables: dict, status: dict, inputs=None) -> str:
    lines = ["corrshift event-study report"]
    if inputs is not None:
        w = inputs.window
        lines += [
            f"event date: {w.event_date}",
            f"pre-event:  {w.pre_start} .. {w.pre_end}",
            f"post-event: {w.post_start} .. {w.post_end}",
            f"base asset: {inputs.config.base_asset_id}",
        ]

    def adf():
        rows = [
            (r["asset"], fmt4(r["adf_statistic"]), r["p_value_text"], r["lags_used"], r["n_effective"],
             fmt4(r["crit_1pct"]), fmt4(r["crit_5pct"]), fmt4(r["crit_10pct"]))
            for r in tables["adf"]
        ]
        return _table(["asset", "ADF stat", "p-value", "lags", "nobs", "1%", "5%", "10%"], rows)

    def describe():
        rows = [
            (r["asset"], r["segment"], fmt_price(r["mean_price"]), fmt_price(r["std_price"]),
             fmt4(r["mean_return"]), fmt4(r["std_return"]), r["n_prices"], r["n_returns"])
            for r in tables["describe"]
        ]
        return _table(["asset", "segment", "mean price", "sd price", "mean ret", "sd ret", "n px", "n ret"], rows)

    def chow3():
        t3 = [
            (r["base"], r["variable"], fmt4(r["statistic"]) + r["stars"], _p(r["p_value"]), r["break_confirmed"])
            for r in tables["chow"]["table3"]
        ]
        out = ["regression: base ~ 1 + other, split at the event date"]
        out += _table(["dependent", "variable", "F", "p-value", "break"], t3)
        return out + [_STARS]

    def chow4():
        t4 = [
            (r["base"], r["variable"], fmt4(r["statistic"]) + r["stars"], _p(r["p_value"]), r["break_confirmed"])
            for r in tables["chow"]["table4"]
        ]
        out = ["regression: rolling correlation ~ 1 (mean shift)"]
        out += _table(["base", "variable", "F", "p-value", "break"], t4)
        if t4:
            out += ["note: " + tables["chow"]["table4"][0]["caveat"]]
        return out + [_STARS]

    def garch():
        rows = [
            (r["asset"], r["parameter"], fmt4(r["estimate"]), fmt4(r["std_err"]), fmt4(r["t_stat"]),
             _p(r["p_value"]) + r["stars"])
            for r in tables["garch"]
        ]
        return _table(["asset", "parameter", "estimate", "s.e.", "t", "p"], rows)

    def dcc():
        rows = [
            (r["base"], r["other"], fmt4(r["a"]), fmt4(r["b"]), fmt4(r["mean_rho_pre"]), fmt4(r["mean_rho_post"]))
            for r in tables["dcc"]
        ]
        return _table(["base", "other", "a", "b", "mean rho pre", "mean rho post"], rows)

    lines += _section("Table 1. Unit-root tests (ADF)", status.get("adf"), adf)
    lines += _section("Table 2. Descriptive statistics", status.get("describe"), describe)
    lines += _section("Table 3. Chow test, pairwise excess returns", status.get("chow"), chow3)
    lines += _section("Table 4. Chow test, rolling correlations", status.get("chow"), chow4)
    lines += _section("Table 5. ARMA-GARCH estimates", status.get("garch"), garch)
    lines += _section("DCC correlations", status.get("dcc"), dcc)
    roll = status.get("roll")
    lines += ["", f"rolling correlations: {'written to fig1_*.csv' if roll == 'ok' else roll or 'not run'}"]
    return "\n".join(lines) + "\n"
