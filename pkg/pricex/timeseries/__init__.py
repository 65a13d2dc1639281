from .calendar import Calendar, CalendarFlags, peak_mask
from .series import (
    HOURS_PER_DAY,
    HOURS_PER_WEEK,
    HourStamp,
    HourlySeries,
    WindowSpec,
    concat,
    hour_of_week,
    hour_of_week_array,
    require_aligned,
    slice_series,
)

__all__ = [
    "HOURS_PER_DAY",
    "HOURS_PER_WEEK",
    "Calendar",
    "CalendarFlags",
    "HourStamp",
    "HourlySeries",
    "WindowSpec",
    "concat",
    "hour_of_week",
    "hour_of_week_array",
    "peak_mask",
    "require_aligned",
    "slice_series",
]
