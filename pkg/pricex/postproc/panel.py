from dataclasses import dataclass
from typing import Optional

import numpy as np

from pricex.errors import AlignmentError, OutOfRange
from pricex.timeseries import HOURS_PER_DAY, Calendar, HourlySeries

# lags of the error models, in days
DAILY_LAG = 1
WEEKLY_LAG = 7
EXOG_NAMES = ("eps_min_prev", "eps_max_prev", "holiday", "wind")


@dataclass(frozen=True, eq=False)
class PriceErrorPanel:
    """
    Daily panel of price estimator errors eps = P_actual - P_hat with exogenous inputs.

    Parameters
    ----------
    first_day : int
        Day index of row 0
    eps : ndarray, shape (n_days, 24)
        Errors in EUR/MWh; NaN on days whose actual prices are not known yet
    wind : ndarray, shape (n_days, 24)
        Focal-zone wind feed-in forecast in MWh
    holidays : ndarray of bool, shape (n_days,)
    calendar : Calendar
    """

    first_day: int
    eps: np.ndarray
    wind: np.ndarray
    holidays: np.ndarray
    calendar: Calendar

    def __post_init__(self):
        eps = np.array(self.eps, dtype=float)
        wind = np.array(self.wind, dtype=float)
        holidays = np.array(self.holidays, dtype=bool)
        if eps.ndim != 2 or eps.shape[1] != HOURS_PER_DAY:
            raise AlignmentError(f"error matrix must have 24 columns, got shape {eps.shape}")
        if wind.shape != eps.shape or holidays.shape != (eps.shape[0],):
            raise AlignmentError("wind and holiday inputs must cover the same days as the errors")
        if not np.all(np.isfinite(wind)):
            raise ValueError("wind forecast contains missing values")
        for arr in (eps, wind, holidays):
            arr.setflags(write=False)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "wind", wind)
        object.__setattr__(self, "holidays", holidays)

    @property
    def n_days(self) -> int:
        return self.eps.shape[0]

    @property
    def last_day(self) -> int:
        return self.first_day + self.n_days - 1

    @property
    def last_known_day(self) -> int:
        known = np.flatnonzero(np.all(np.isfinite(self.eps), axis=1))
        if len(known) == 0:
            raise OutOfRange("panel holds no day with known errors")
        return self.first_day + int(known[-1])

    def row(self, day: int) -> int:
        if not self.first_day <= day <= self.last_day:
            raise OutOfRange(f"day {day} outside panel days {self.first_day}..{self.last_day}")
        return day - self.first_day

    @property
    def eps_min_prev(self) -> np.ndarray:
        """Minimum error of the previous day, per day (NaN on the first day)."""
        out = np.full(self.n_days, np.nan)
        out[1:] = self.eps[:-1].min(axis=1)
        return out

    @property
    def eps_max_prev(self) -> np.ndarray:
        out = np.full(self.n_days, np.nan)
        out[1:] = self.eps[:-1].max(axis=1)
        return out

    def hourly_errors(self) -> np.ndarray:
        return self.eps.ravel()

    def hourly_exog(self) -> np.ndarray:
        """(n_days * 24, 4) matrix of eps_min_prev, eps_max_prev, holiday, wind."""
        per_day = np.column_stack(
            [self.eps_min_prev, self.eps_max_prev, self.holidays.astype(float)]
        )
        return np.column_stack([np.repeat(per_day, HOURS_PER_DAY, axis=0), self.wind.ravel()])

    def fit_days(self, window_days: int, last_day: Optional[int] = None) -> range:
        """
        Days entering a fit whose window ends on `last_day`.

        The window is clipped so that every day has its weekly lag inside
        the panel.
        """
        last_day = self.last_known_day if last_day is None else last_day
        self.row(last_day)
        first = max(self.first_day + WEEKLY_LAG, last_day - window_days + 1)
        if first > last_day:
            raise OutOfRange(
                f"panel starting on day {self.first_day} is too short "
                f"for a fit ending on day {last_day}"
            )
        rows = np.arange(first - WEEKLY_LAG, last_day + 1) - self.first_day
        if not np.all(np.isfinite(self.eps[rows])):
            raise OutOfRange(f"errors missing between day {first - WEEKLY_LAG} and day {last_day}")
        return range(first, last_day + 1)

    def require_history(self, day: int):
        """Errors of the week before `day` must be known to forecast it."""
        self.row(day)
        rows = np.arange(day - WEEKLY_LAG, day) - self.first_day
        if rows[0] < 0 or not np.all(np.isfinite(self.eps[rows])):
            raise OutOfRange(f"forecasting day {day} needs the errors of the seven days before")


def build_panel(
    actual: HourlySeries,
    estimated: HourlySeries,
    wind: Optional[HourlySeries] = None,
) -> PriceErrorPanel:
    """
    Error panel over the days of `estimated`.

    Days of `estimated` not covered by `actual` get NaN errors (prices not
    yet published); a missing wind forecast enters as zeros.
    """
    if not estimated.is_whole_days:
        raise AlignmentError("price estimators must cover whole days")
    first, n_days = estimated.first_day, estimated.n_days
    ordinals = estimated.ordinals

    eps = np.full(len(estimated), np.nan)
    inside = (ordinals >= actual.start.ordinal) & (ordinals < actual.start.ordinal + len(actual))
    eps[inside] = actual.values[ordinals[inside] - actual.start.ordinal] - estimated.values[inside]

    if wind is None:
        wind_values = np.zeros(len(estimated))
    else:
        if not wind.covers(estimated.start, estimated.end):
            raise AlignmentError("wind forecast does not cover the price estimator days")
        wind_values = wind.slice(estimated.start, estimated.end).values

    days = np.arange(first, first + n_days)
    return PriceErrorPanel(
        first_day=first,
        eps=eps.reshape(n_days, HOURS_PER_DAY),
        wind=wind_values.reshape(n_days, HOURS_PER_DAY),
        holidays=estimated.calendar.holiday_mask(days),
        calendar=estimated.calendar,
    )
