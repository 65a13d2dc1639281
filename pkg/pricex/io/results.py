"""
Per-day artifacts of a pipeline run

Every stage writes one CSV per day under its own directory of the run:
``load/``, ``dispatch/``, ``postproc/`` and ``forecasts/``. Files are
written to a temporary name first and moved into place, so a file that
exists is complete.
"""

import datetime as dt
import os
from pathlib import Path

import numpy as np
import pandas as pd

from pricex.density import ScenarioSet
from pricex.dispatch import WindowLoad
from pricex.errors import AlignmentError
from pricex.postproc import ProbabilisticForecast, SubModelForecasts
from pricex.postproc.qra import peak_hours
from pricex.timeseries import HOURS_PER_DAY, Calendar, HourlySeries, HourStamp

FLOAT_FORMAT = "%.10g"
HOURS = pd.RangeIndex(1, HOURS_PER_DAY + 1, name="hour")

# stage -> (directory, file prefix)
ARTIFACTS = {
    "preprocess": ("load", "preprocess"),
    "density": ("load", "window"),
    "dispatch": ("dispatch", "prices"),
    "submodels": ("postproc", "submodels"),
    "postprocess": ("forecasts", "prices"),
    "quantiles": ("forecasts", "quantiles"),
}


def artifact_path(run_dir, kind: str, date: dt.date) -> Path:
    directory, prefix = ARTIFACTS[kind]
    return Path(run_dir) / directory / f"{prefix}_{date.isoformat()}.csv"


def write_frame(path, frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    frame.to_csv(tmp, float_format=FLOAT_FORMAT, lineterminator="\n")
    os.replace(tmp, path)
    return path


def read_frame(path) -> pd.DataFrame:
    return pd.read_csv(path, index_col=0)


def _day_values(frame: pd.DataFrame, column: str, n_hours: int = HOURS_PER_DAY) -> np.ndarray:
    values = frame[column].to_numpy(dtype=float)
    if values.shape != (n_hours,):
        raise AlignmentError(f"column {column!r} holds {len(values)} values, expected {n_hours}")
    return values


def preprocess_frame(improved: HourlySeries, two_day_ahead: HourlySeries) -> pd.DataFrame:
    """Improved forecast of the target day and the two-day-ahead forecast of the day after."""
    return pd.DataFrame(
        {"improved": improved.values, "two_day_ahead": two_day_ahead.values}, index=HOURS
    )


def read_preprocess(path, target_day: int, calendar: Calendar) -> tuple:
    frame = read_frame(path)
    improved = HourlySeries(
        HourStamp(target_day, 1), _day_values(frame, "improved"), calendar, "MWh"
    )
    two_day_ahead = HourlySeries(
        HourStamp(target_day + 1, 1), _day_values(frame, "two_day_ahead"), calendar, "MWh"
    )
    return improved, two_day_ahead


def window_frame(load: WindowLoad) -> pd.DataFrame:
    """72 rows of low, expected and high load; the shared hours repeat in all three."""
    demand = load.demand_matrix()
    crossed = np.concatenate([np.zeros(2 * HOURS_PER_DAY, dtype=bool), load.scenarios.crossed])
    return pd.DataFrame(
        {
            "low": demand[0],
            "expected": demand[1],
            "high": demand[2],
            "crossed": crossed.astype(int),
        },
        index=pd.RangeIndex(1, 3 * HOURS_PER_DAY + 1, name="hour"),
    )


def read_window(path, target_day: int, calendar: Calendar, weights: tuple) -> WindowLoad:
    frame = read_frame(path)
    n = 3 * HOURS_PER_DAY
    low, expected, high = (_day_values(frame, c, n) for c in ("low", "expected", "high"))
    crossed = _day_values(frame, "crossed", n).astype(bool)
    shared_days = 2 * HOURS_PER_DAY
    shared = HourlySeries(HourStamp(target_day - 1, 1), expected[:shared_days], calendar, "MWh")
    d2 = HourStamp(target_day + 1, 1)
    return WindowLoad(
        shared=shared,
        scenarios=ScenarioSet(
            low=HourlySeries(d2, low[shared_days:], calendar, "MWh"),
            expected=HourlySeries(d2, expected[shared_days:], calendar, "MWh"),
            high=HourlySeries(d2, high[shared_days:], calendar, "MWh"),
            weights=tuple(weights),
            crossed=crossed[shared_days:],
        ),
    )


def dispatch_frame(prices: pd.DataFrame) -> pd.DataFrame:
    frame = prices.copy()
    frame.index = HOURS
    return frame


def submodels_frame(six: SubModelForecasts) -> pd.DataFrame:
    return pd.DataFrame({"base": six.base, **six.prices}, index=HOURS)


def read_submodels(path, day: int) -> SubModelForecasts:
    frame = read_frame(path)
    prices = {name: _day_values(frame, name) for name in frame.columns if name != "base"}
    return SubModelForecasts(day=day, base=_day_values(frame, "base"), prices=prices)


def point_frame(six: SubModelForecasts, point: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"estimator": six.base, "point": point}, index=HOURS)


def quantile_frame(forecast: ProbabilisticForecast) -> pd.DataFrame:
    """Hour by quantile level, plus the point forecast and the rearrangement flag."""
    frame = pd.DataFrame(
        forecast.values, index=HOURS, columns=[f"q{q:g}" for q in forecast.levels]
    )
    frame["point"] = forecast.point
    frame["rearranged"] = forecast.rearranged.astype(int)
    return frame


def read_quantiles(path, day: int, calendar: Calendar) -> ProbabilisticForecast:
    frame = read_frame(path)
    columns = [c for c in frame.columns if c.startswith("q")]
    return ProbabilisticForecast(
        day=day,
        levels=tuple(float(c[1:]) for c in columns),
        values=frame[columns].to_numpy(dtype=float),
        point=_day_values(frame, "point"),
        peak=peak_hours(calendar, day),
        rearranged=_day_values(frame, "rearranged").astype(bool),
    )
