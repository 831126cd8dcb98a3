import datetime as dt
import os
import sys

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sdaeforecast.market_data import BarSeries  # noqa: E402

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


def random_walk_series(n, seed=0, vol=0.01, start=dt.date(2010, 1, 4)):
    rng = np.random.default_rng(seed)
    close = 100 * np.exp(np.cumsum(rng.normal(0, vol, n)))
    open_ = close * np.exp(rng.normal(0, vol / 2, n))
    high = np.maximum(open_, close) * np.exp(np.abs(rng.normal(0, vol / 2, n)))
    low = np.minimum(open_, close) * np.exp(-np.abs(rng.normal(0, vol / 2, n)))
    volume = rng.lognormal(10, 0.5, n)
    dates = [start + dt.timedelta(days=i) for i in range(n)]
    return BarSeries.from_arrays(dates, open_, high, low, close, volume)


def series_from_closes(closes, volumes=None, start=dt.date(2020, 1, 1)):
    closes = np.asarray(closes, dtype=float)
    volumes = np.ones(len(closes)) if volumes is None else np.asarray(volumes, dtype=float)
    dates = [start + dt.timedelta(days=i) for i in range(len(closes))]
    return BarSeries.from_arrays(dates, closes, closes, closes, closes, volumes)


@pytest.fixture
def walk300():
    return random_walk_series(300, seed=7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
