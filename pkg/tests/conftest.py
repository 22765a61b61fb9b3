import numpy as np
import pytest

from corrshift.series import PriceSeries, ReturnSeries


def days(start, n, step=1):
    return np.datetime64(start) + np.arange(n) * step


def weekdays(start, stop):
    d = np.arange(np.datetime64(start), np.datetime64(stop) + 1)
    return d[(d.view("int64") - 4) % 7 < 5]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def price_series(asset_id, dates, prices):
    return PriceSeries(asset_id, np.asarray(dates, dtype="datetime64[D]"), np.asarray(prices, dtype=float))


def return_series(asset_id, dates, values):
    return ReturnSeries(asset_id, np.asarray(dates, dtype="datetime64[D]"), np.asarray(values, dtype=float))


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion, collected by test_acceptance.record()
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
