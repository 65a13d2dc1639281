"""
Weekly seasonal profile of the TSO load forecast error.

The profile averages the error by (hour of day, weekday) over a trailing
window. For a forecast of day D the window ends with day D - 2: the most
recent complete day of actual load when the forecast is made on day D - 1.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger

from pricex.errors import EmptyCell, OutOfRange
from pricex.timeseries import (
    HOURS_PER_DAY,
    Calendar,
    HourlySeries,
    HourStamp,
    WindowSpec,
)

logger = logger.bind(module="load")


@dataclass(frozen=True, eq=False)
class SeasonalProfile:
    hs: np.ndarray  # (24, 7), hs[h - 1, wd - 1]
    n_obs: np.ndarray

    def __post_init__(self):
        if self.hs.shape != (HOURS_PER_DAY, 7):
            raise ValueError(f"profile must be 24x7, got {self.hs.shape}")
        if not np.all(np.isfinite(self.hs)):
            raise EmptyCell("profile has empty cells")

    def lookup(self, hours, weekdays) -> np.ndarray:
        return self.hs[np.asarray(hours) - 1, np.asarray(weekdays) - 1]

    @classmethod
    def constant(cls, value: float) -> "SeasonalProfile":
        return cls(np.full((HOURS_PER_DAY, 7), float(value)), np.ones((HOURS_PER_DAY, 7)))


def profile_last_day(target_day: int) -> int:
    """Last day of the averaging window for a forecast of `target_day`."""
    return target_day - 2


def fit_seasonal_profile(
    errors: HourlySeries, window: WindowSpec, last_day: int | None = None
) -> SeasonalProfile:
    """
    Average the errors by hour of day and weekday over a trailing window.

    Parameters
    ----------
    errors : HourlySeries
        Forecast errors covering whole days
    window : WindowSpec
        Averaging window. Days before the start of `errors` are skipped
    last_day : int, optional
        Final day of the window; defaults to the last day of `errors`

    Returns
    -------
    SeasonalProfile

    Raises
    ------
    EmptyCell
        If some (hour, weekday) cell has no observation in the window
    OutOfRange
        If `last_day` lies outside the series
    """
    last_series_day = errors.first_day + errors.n_days - 1
    if last_day is None:
        last_day = last_series_day
    if not errors.first_day <= last_day <= last_series_day:
        raise OutOfRange(
            f"window end day {last_day} outside errors days "
            f"{errors.first_day}..{last_series_day}"
        )
    days = window.days_ending(last_day)
    first = max(days.start, errors.first_day)
    if first > days.start:
        logger.debug(
            f"seasonal window clipped to {last_day - first + 1} of {window.length_days} days"
        )
    chunk = errors.days(first, last_day)

    slots = (chunk.hours - 1) * 7 + (chunk.weekdays - 1)
    sums = np.bincount(slots, weights=chunk.values, minlength=HOURS_PER_DAY * 7)
    counts = np.bincount(slots, minlength=HOURS_PER_DAY * 7)
    if np.any(counts == 0):
        missing = sorted({int(wd) + 1 for wd in np.flatnonzero(counts == 0) % 7})
        raise EmptyCell(
            f"no errors observed for weekday(s) {missing} in the {len(chunk) // 24}-day window"
        )
    hs = (sums / counts).reshape(HOURS_PER_DAY, 7)
    return SeasonalProfile(hs, counts.reshape(HOURS_PER_DAY, 7))


def seasonal_component(
    profile: SeasonalProfile, start: HourStamp, n_hours: int, calendar: Calendar
) -> HourlySeries:
    """Calendar lookup of the profile for `n_hours` hours from `start`."""
    template = HourlySeries(start, np.zeros(n_hours), calendar)
    return template.with_values(profile.lookup(template.hours, template.weekdays))
