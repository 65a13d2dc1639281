import datetime as dt
from dataclasses import dataclass, field

import numpy as np

# peak hours are 8 a.m. to 8 p.m. on Monday to Friday (hours 9..20)
PEAK_HOURS = range(9, 21)


@dataclass(frozen=True)
class CalendarFlags:
    weekday: int  # 1 = Monday
    is_holiday: bool = False

    def __post_init__(self):
        if not 1 <= self.weekday <= 7:
            raise ValueError(f"weekday must lie in [1, 7], got {self.weekday}")


@dataclass(frozen=True)
class Calendar:
    """Maps day indices to dates, weekdays and holiday flags.

    Parameters
    ----------
    epoch : datetime.date
        Date of day index 0
    holidays : frozenset of int
        Day indices that are public holidays
    """

    epoch: dt.date
    holidays: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "holidays", frozenset(int(d) for d in self.holidays))

    def date(self, day_index: int) -> dt.date:
        return self.epoch + dt.timedelta(days=int(day_index))

    def day_index(self, date: dt.date | str) -> int:
        if isinstance(date, str):
            date = dt.date.fromisoformat(date)
        return (date - self.epoch).days

    def weekday(self, day_index: int) -> int:
        return (self.epoch.isoweekday() - 1 + int(day_index)) % 7 + 1

    def is_holiday(self, day_index: int) -> bool:
        return int(day_index) in self.holidays

    def flags(self, day_index: int) -> CalendarFlags:
        return CalendarFlags(self.weekday(day_index), self.is_holiday(day_index))

    def weekdays(self, day_indices) -> np.ndarray:
        day_indices = np.asarray(day_indices, dtype=int)
        return (self.epoch.isoweekday() - 1 + day_indices) % 7 + 1

    def holiday_mask(self, day_indices) -> np.ndarray:
        day_indices = np.asarray(day_indices, dtype=int)
        if not self.holidays:
            return np.zeros(day_indices.shape, dtype=bool)
        return np.isin(day_indices, np.fromiter(self.holidays, dtype=int))

    def years(self, day_indices) -> np.ndarray:
        return np.array([self.date(d).year for d in np.asarray(day_indices, dtype=int)])

    def with_holidays(self, holidays) -> "Calendar":
        return Calendar(self.epoch, frozenset(holidays))


def peak_mask(hours, weekdays) -> np.ndarray:
    """True for peak hours; holidays are not special-cased."""
    hours = np.asarray(hours)
    weekdays = np.asarray(weekdays)
    return (hours >= PEAK_HOURS.start) & (hours < PEAK_HOURS.stop) & (weekdays <= 5)
