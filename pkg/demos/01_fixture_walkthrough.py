"""
Walk through the synthetic fixture
==================================

The package ships a small four-asset data set in which the crypto asset's
correlations change on 2024-01-10. This script loads it the same way the
``corrshift run`` command does and prints the pieces one at a time.

    python demos/01_fixture_walkthrough.py
"""
from corrshift.ingestion import load_config
from corrshift.pipeline import load_inputs, run_analysis, stage_describe
from corrshift.report import render_report
from corrshift.synthetic import fixture_config

cfg = load_config(fixture_config())
inp = load_inputs(cfg)

# prices come in on their own calendars: BTC every day, the rest on weekdays
for aid, px in inp.prices.items():
    print(f"{aid:5s} {px.dates[0]} .. {px.dates[-1]}  {len(px.dates):4d} prices")

# log returns are aligned on the dates every asset shares
panel = inp.panel
print("\naligned panel:", len(panel.dates), "rows,", panel.asset_ids)
print("event window:", inp.window)

# rows before pre_start and the event day itself belong to neither segment
pre = inp.window.pre_mask(panel.dates)
post = inp.window.post_mask(panel.dates)
print("pre rows", pre.sum(), "| post rows", post.sum(), "| outside both", (~pre & ~post).sum())

# descriptive table: these row dicts are what goes into table2_descriptive.csv
rows, _files = stage_describe(inp, {})
for r in rows:
    print(f"{r['asset']:5s} {r['segment']:4s} mean px {r['mean_price']:10.1f}  "
          f"sd ret {r['std_return']:.4f}  n={r['n_returns']}")

# and the whole thing in one go, rendered as the text report
result = run_analysis(cfg)
print(render_report(result.tables, result.status, result.inputs))
print("warnings:", result.warnings or "none")
