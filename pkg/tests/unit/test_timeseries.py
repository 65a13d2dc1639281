# tests/unit/test_timeseries.py

import numpy as np
import pytest

from pricex.errors import AlignmentError, OutOfRange
from pricex.timeseries import (
    CalendarFlags,
    HourStamp,
    WindowSpec,
    concat,
    hour_of_week,
    hour_of_week_array,
    peak_mask,
    slice_series,
)


def test_hour_stamp_order_and_advance():
    assert HourStamp(1, 24) < HourStamp(2, 1)
    assert HourStamp(2, 3) < HourStamp(2, 4)
    stamp = HourStamp(5, 7)
    assert stamp.advance(24) == HourStamp(6, 7)
    assert stamp.advance(-7) == HourStamp(4, 24)
    assert HourStamp.from_ordinal(stamp.ordinal) == stamp
    with pytest.raises(OutOfRange):
        HourStamp(0, 25)


def test_slice(make_series):
    series = make_series(np.arange(48), day=1)
    first_day = slice_series(series, HourStamp(1, 1), HourStamp(1, 24))
    assert len(first_day) == 24
    np.testing.assert_array_equal(first_day.values, np.arange(24))

    point = series.slice(HourStamp(1, 5), HourStamp(1, 5))
    np.testing.assert_array_equal(point.values, [4.0])
    # original untouched
    assert len(series) == 48

    with pytest.raises(OutOfRange):
        series.slice(HourStamp(1, 6), HourStamp(1, 5))
    with pytest.raises(OutOfRange):
        series.slice(HourStamp(1, 1), HourStamp(3, 1))


def test_daily_slices_reconstruct(make_series, rng):
    series = make_series(rng.normal(size=24 * 5), day=3)
    rebuilt = concat(series.daily_slices())
    assert rebuilt.start == series.start
    np.testing.assert_array_equal(rebuilt.values, series.values)


def test_concat_rejects_gaps(make_series):
    with pytest.raises(AlignmentError):
        concat([make_series(np.zeros(24), day=0), make_series(np.zeros(24), day=2)])


def test_series_rejects_missing_values(make_series):
    with pytest.raises(ValueError):
        make_series([1.0, np.nan, 2.0])


def test_values_are_read_only(make_series):
    series = make_series(np.zeros(24))
    with pytest.raises(ValueError):
        series.values[0] = 1.0


def test_hour_of_week_anchors():
    assert hour_of_week(HourStamp(0, 1), CalendarFlags(1)) == 1
    assert hour_of_week(HourStamp(0, 24), CalendarFlags(7)) == 168
    assert hour_of_week(HourStamp(0, 5), CalendarFlags(3, is_holiday=True)) == 173


def test_hour_of_week_is_bijection():
    slots = {
        hour_of_week(HourStamp(0, h), CalendarFlags(wd))
        for wd in range(1, 8)
        for h in range(1, 25)
    }
    assert slots == set(range(1, 169))


def test_hour_of_week_array_matches_scalar():
    hours = np.array([1, 24, 5])
    weekdays = np.array([1, 7, 3])
    holidays = np.array([False, False, True])
    np.testing.assert_array_equal(hour_of_week_array(hours, weekdays, holidays), [1, 168, 173])


def test_calendar_weekdays(calendar):
    # 2018-01-01 is a Monday
    assert calendar.weekday(0) == 1
    assert calendar.weekday(6) == 7
    assert calendar.weekday(7) == 1
    np.testing.assert_array_equal(calendar.weekdays([0, 1, 13]), [1, 2, 7])
    assert calendar.day_index("2018-01-08") == 7
    holiday_cal = calendar.with_holidays({0})
    assert holiday_cal.is_holiday(0) and not holiday_cal.is_holiday(1)


def test_peak_mask():
    hours = np.array([8, 9, 20, 21, 12])
    weekdays = np.array([1, 1, 5, 5, 6])
    np.testing.assert_array_equal(peak_mask(hours, weekdays), [False, True, True, False, False])


def test_window_spec():
    window = WindowSpec.weeks(2)
    assert window.length_days == 14
    assert list(WindowSpec(3).days_ending(10)) == [8, 9, 10]
    with pytest.raises(ValueError):
        WindowSpec(0)
