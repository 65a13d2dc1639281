# tests/conftest.py

import datetime as dt

import numpy as np
import pytest

from pricex.timeseries import Calendar, HourlySeries, HourStamp


@pytest.fixture
def calendar():
    """Calendar whose day 0 is Monday 2018-01-01"""
    return Calendar(dt.date(2018, 1, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_series(calendar):
    """Build a series from values starting at hour 1 of `day`"""

    def _make(values, day=0, hour=1, unit="MWh"):
        return HourlySeries(HourStamp(day, hour), np.asarray(values, dtype=float), calendar, unit)

    return _make
