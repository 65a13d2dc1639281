"""
Hourly series container shared by every stage.

Time is indexed by (day_index, hour) with hour running 1..24, day_index
counting days since the dataset epoch. Days always have 24 hours; DST
switch days are normalised at ingestion (see pricex.io.ingest).
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from pricex.errors import AlignmentError, OutOfRange
from pricex.timeseries.calendar import Calendar, CalendarFlags

HOURS_PER_DAY = 24
HOURS_PER_WEEK = 168


@dataclass(frozen=True, order=True)
class HourStamp:
    day_index: int
    hour: int  # 1..24

    def __post_init__(self):
        if not 1 <= self.hour <= HOURS_PER_DAY:
            raise OutOfRange(f"hour must lie in [1, 24], got {self.hour}")
        object.__setattr__(self, "day_index", int(self.day_index))
        object.__setattr__(self, "hour", int(self.hour))

    @property
    def ordinal(self) -> int:
        """Hours since hour 1 of day 0."""
        return self.day_index * HOURS_PER_DAY + self.hour - 1

    @classmethod
    def from_ordinal(cls, ordinal: int) -> "HourStamp":
        day, offset = divmod(int(ordinal), HOURS_PER_DAY)
        return cls(day, offset + 1)

    def advance(self, hours: int) -> "HourStamp":
        return HourStamp.from_ordinal(self.ordinal + int(hours))


@dataclass(frozen=True)
class WindowSpec:
    """Calibration window measured in whole days.

    Parameters
    ----------
    length_days : int
        Number of days in the window
    step_days : int, default=1
        Days the window rolls forward between two forecasts
    """

    length_days: int
    step_days: int = 1

    def __post_init__(self):
        if self.length_days < 1:
            raise ValueError(f"window length must be >= 1 day, got {self.length_days}")
        if self.step_days < 1:
            raise ValueError(f"window step must be >= 1 day, got {self.step_days}")

    @classmethod
    def weeks(cls, n_weeks: int) -> "WindowSpec":
        return cls(length_days=7 * int(n_weeks))

    def days_ending(self, last_day: int) -> range:
        """Day indices of the window whose final day is `last_day`."""
        return range(last_day - self.length_days + 1, last_day + 1)


@dataclass(frozen=True, eq=False)
class HourlySeries:
    """Contiguous hourly values starting at `start`.

    Value k belongs to `start` advanced by k hours. Values are copied into a
    read-only float array on construction; non-finite values are rejected.
    """

    start: HourStamp
    values: np.ndarray
    calendar: Calendar
    unit: str = "MWh"

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError(f"values must be one-dimensional, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            n_bad = int((~np.isfinite(values)).sum())
            raise ValueError(
                f"series contains {n_bad} missing or non-finite values; "
                "fill gaps at ingestion"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> HourStamp:
        if len(self) == 0:
            raise OutOfRange("empty series has no end stamp")
        return self.start.advance(len(self) - 1)

    @property
    def ordinals(self) -> np.ndarray:
        return self.start.ordinal + np.arange(len(self))

    @property
    def day_indices(self) -> np.ndarray:
        return self.ordinals // HOURS_PER_DAY

    @property
    def hours(self) -> np.ndarray:
        """Hour of day (1..24) of every value."""
        return self.ordinals % HOURS_PER_DAY + 1

    @property
    def weekdays(self) -> np.ndarray:
        return self.calendar.weekdays(self.day_indices)

    @property
    def holidays(self) -> np.ndarray:
        return self.calendar.holiday_mask(self.day_indices)

    @property
    def is_whole_days(self) -> bool:
        return self.start.hour == 1 and len(self) % HOURS_PER_DAY == 0

    @property
    def first_day(self) -> int:
        return self.start.day_index

    @property
    def n_days(self) -> int:
        if not self.is_whole_days:
            raise ValueError("series does not cover whole days")
        return len(self) // HOURS_PER_DAY

    def stamp_at(self, position: int) -> HourStamp:
        if not 0 <= position < len(self):
            raise OutOfRange(f"position {position} outside series of length {len(self)}")
        return self.start.advance(position)

    def position(self, stamp: HourStamp) -> int:
        offset = stamp.ordinal - self.start.ordinal
        if not 0 <= offset < len(self):
            raise OutOfRange(
                f"{stamp} outside series range {self.start} .. "
                f"{self.end if len(self) else self.start}"
            )
        return offset

    def covers(self, start: HourStamp, end: HourStamp) -> bool:
        if len(self) == 0:
            return False
        return self.start <= start and end <= self.end

    def slice(self, start: HourStamp, end: HourStamp) -> "HourlySeries":
        """Inclusive sub-series from `start` to `end`."""
        if end < start:
            raise OutOfRange(f"slice end {end} precedes start {start}")
        i = self.position(start)
        j = self.position(end)
        return HourlySeries(start, self.values[i : j + 1], self.calendar, self.unit)

    def day(self, day_index: int) -> "HourlySeries":
        return self.slice(HourStamp(day_index, 1), HourStamp(day_index, HOURS_PER_DAY))

    def days(self, first_day: int, last_day: int) -> "HourlySeries":
        return self.slice(HourStamp(first_day, 1), HourStamp(last_day, HOURS_PER_DAY))

    def daily_slices(self) -> list["HourlySeries"]:
        return [self.day(d) for d in range(self.first_day, self.first_day + self.n_days)]

    def as_days(self) -> np.ndarray:
        """Values reshaped to (n_days, 24)."""
        return self.values.reshape(self.n_days, HOURS_PER_DAY)

    def with_values(self, values: Sequence[float], unit: str | None = None) -> "HourlySeries":
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise AlignmentError(
                f"new values have shape {values.shape}, series has {self.values.shape}"
            )
        return HourlySeries(self.start, values, self.calendar, unit or self.unit)

    def aligned_with(self, other: "HourlySeries") -> bool:
        return self.start == other.start and len(self) == len(other)

    @classmethod
    def from_days(
        cls, first_day: int, matrix: np.ndarray, calendar: Calendar, unit: str = "MWh"
    ) -> "HourlySeries":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] != HOURS_PER_DAY:
            raise ValueError(f"expected (n_days, 24) matrix, got shape {matrix.shape}")
        return cls(HourStamp(first_day, 1), matrix.ravel(), calendar, unit)


def slice_series(series: HourlySeries, start: HourStamp, end: HourStamp) -> HourlySeries:
    return series.slice(start, end)


def concat(parts: Iterable[HourlySeries]) -> HourlySeries:
    """Join contiguous series; raises AlignmentError on gaps or overlaps."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to concatenate")
    first = parts[0]
    expected = first.start.ordinal + len(first)
    for part in parts[1:]:
        if part.start.ordinal != expected:
            raise AlignmentError(
                f"series starting at {part.start} does not continue at hour ordinal {expected}"
            )
        expected += len(part)
    values = np.concatenate([p.values for p in parts])
    return HourlySeries(first.start, values, first.calendar, first.unit)


def require_aligned(a: HourlySeries, b: HourlySeries) -> None:
    if not a.aligned_with(b):
        raise AlignmentError(
            f"series not aligned: start {a.start} / {b.start}, length {len(a)} / {len(b)}"
        )


def hour_of_week(stamp: HourStamp, cal: CalendarFlags) -> int:
    """Slot 1..168 for regular hours (Monday hour 1 is 1), 169..192 on holidays."""
    if cal.is_holiday:
        return HOURS_PER_WEEK + stamp.hour
    return (cal.weekday - 1) * HOURS_PER_DAY + stamp.hour


def hour_of_week_array(hours: np.ndarray, weekdays: np.ndarray, holidays: np.ndarray) -> np.ndarray:
    """Vectorised hour_of_week."""
    hours = np.asarray(hours)
    regular = (np.asarray(weekdays) - 1) * HOURS_PER_DAY + hours
    return np.where(np.asarray(holidays, dtype=bool), HOURS_PER_WEEK + hours, regular)
