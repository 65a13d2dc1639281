import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from pricex.errors import AlignmentError
from pricex.evaluation.metrics import coverage_histogram, interval_widths, mae, pinball, rmse
from pricex.postproc import ProbabilisticForecast, Segment, negative_price_probability
from pricex.timeseries import (
    HOURS_PER_DAY,
    HOURS_PER_WEEK,
    Calendar,
    HourlySeries,
    hour_of_week_array,
    peak_mask,
    require_aligned,
)

logger = logger.bind(module="evaluation")

# 168 regular slots plus 24 holiday slots
N_WEEK_SLOTS = HOURS_PER_WEEK + HOURS_PER_DAY
FLOAT_FORMAT = "%.10g"


@dataclass
class EvalReport:
    """
    Error breakdown of a forecast over an evaluation range.

    Attributes
    ----------
    accuracy : pandas.DataFrame
        RMSE, MAE and number of hours per slice: "base" (all hours),
        "year:<yyyy>", "peak", "offpeak" and "group:<k>" for the actual price
        quantile groups
    error_stats : pandas.DataFrame
        Descriptive statistics of the errors per calendar year
    error_by_hour_of_week : pandas.Series
        Mean error per hour-of-week slot 1..192
    pinball : pandas.Series, optional
        Mean pinball loss per quantile level
    coverage : pandas.DataFrame, optional
        Actual price counts per quantile band, overall and per segment
    interval_width_by_hour : pandas.DataFrame, optional
        Distribution of the outermost interval width per hour of day
    interval_width_by_hour_of_week : pandas.Series, optional
    neg_price_prob_by_hour_of_week : pandas.Series, optional
    tables : dict of str to pandas.DataFrame
        Further named tables written next to the report
    """

    accuracy: pd.DataFrame
    error_stats: pd.DataFrame
    error_by_hour_of_week: pd.Series
    pinball: Optional[pd.Series] = None
    coverage: Optional[pd.DataFrame] = None
    interval_width_by_hour: Optional[pd.DataFrame] = None
    interval_width_by_hour_of_week: Optional[pd.Series] = None
    neg_price_prob_by_hour_of_week: Optional[pd.Series] = None
    tables: dict = field(default_factory=dict)

    @property
    def rmse(self) -> pd.Series:
        return self.accuracy["rmse"]

    @property
    def mae(self) -> pd.Series:
        return self.accuracy["mae"]

    @property
    def n_hours(self) -> int:
        return int(self.accuracy.loc["base", "n_hours"])

    def summary(self) -> dict:
        out = {
            "n_hours": self.n_hours,
            "rmse": self.accuracy["rmse"].to_dict(),
            "mae": self.accuracy["mae"].to_dict(),
        }
        if self.pinball is not None:
            out["pinball_mean"] = float(self.pinball.mean())
            out["coverage"] = self.coverage["overall"].tolist()
            out["interval_width_mean"] = float(self.interval_width_by_hour["mean"].mean())
        return out

    def frames(self) -> dict:
        frames = {
            "accuracy": self.accuracy,
            "error_stats": self.error_stats,
            "error_by_hour_of_week": self.error_by_hour_of_week,
            "pinball": self.pinball,
            "coverage": self.coverage,
            "interval_width_by_hour": self.interval_width_by_hour,
            "interval_width_by_hour_of_week": self.interval_width_by_hour_of_week,
            "neg_price_prob_by_hour_of_week": self.neg_price_prob_by_hour_of_week,
        }
        frames.update(self.tables)
        return {name: frame for name, frame in frames.items() if frame is not None}

    def write(self, directory) -> list[Path]:
        """One CSV per table plus summary.json; returns the written paths."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, frame in self.frames().items():
            path = directory / f"{name}.csv"
            frame.to_csv(path, float_format=FLOAT_FORMAT)
            paths.append(path)
        path = directory / "summary.json"
        with open(path, "w") as f:
            json.dump(self.summary(), f, indent=2, sort_keys=True)
        paths.append(path)
        return paths


def price_groups(actual: np.ndarray, n_groups: int = 5) -> np.ndarray:
    """Group 1..n_groups of each hour by the rank of its actual price."""
    actual = np.asarray(actual, dtype=float)
    rank = np.empty(len(actual), dtype=int)
    rank[np.argsort(actual, kind="stable")] = np.arange(len(actual))
    return rank * n_groups // max(len(actual), 1) + 1


def _accuracy_row(a, f) -> dict:
    if len(a) == 0:
        return {"rmse": np.nan, "mae": np.nan, "n_hours": 0}
    return {"rmse": rmse(a, f), "mae": mae(a, f), "n_hours": len(a)}


def _error_stats(errors: np.ndarray, years: np.ndarray) -> pd.DataFrame:
    frame = pd.DataFrame({"error": errors, "year": years})
    stats = frame.groupby("year")["error"].agg(["mean", "median", "std", "min", "max"])
    grouped = frame.groupby("year")["error"]
    stats["q05"] = grouped.quantile(0.05)
    stats["q95"] = grouped.quantile(0.95)
    return stats


def _by_week_slot(values: np.ndarray, slots: np.ndarray, name: str) -> pd.Series:
    series = pd.Series(values).groupby(slots).mean()
    return series.reindex(np.arange(1, N_WEEK_SLOTS + 1)).rename_axis("hour_of_week").rename(name)


def _check_forecast_days(probs: Sequence[ProbabilisticForecast], actual: HourlySeries):
    days = [f.day for f in probs]
    expected = list(range(actual.first_day, actual.first_day + actual.n_days))
    if days != expected:
        raise AlignmentError("probabilistic forecasts must cover the evaluation days in order")


def slice_report(
    actual: HourlySeries,
    point: HourlySeries,
    probs: Optional[Sequence[ProbabilisticForecast]] = None,
    calendar: Optional[Calendar] = None,
    n_groups: int = 5,
) -> EvalReport:
    """
    Score a point forecast (and optionally its quantile forecasts).

    Parameters
    ----------
    actual : HourlySeries
        Actual prices over whole days
    point : HourlySeries
        Point forecast aligned with `actual`
    probs : sequence of ProbabilisticForecast, optional
        One forecast per day of `actual`, in order
    calendar : Calendar, optional
        Defaults to the calendar of `actual`
    n_groups : int, default=5
        Number of actual price quantile groups

    Returns
    -------
    EvalReport
    """
    require_aligned(actual, point)
    if not actual.is_whole_days:
        raise AlignmentError("evaluation needs whole days")
    calendar = calendar or actual.calendar
    a, f = actual.values, point.values
    errors = a - f
    days = actual.day_indices
    years = calendar.years(days)
    weekdays = calendar.weekdays(days)
    holidays = calendar.holiday_mask(days)
    peak = peak_mask(actual.hours, weekdays)
    groups = price_groups(a, n_groups)

    rows = {"base": _accuracy_row(a, f)}
    for year in np.unique(years):
        rows[f"year:{year}"] = _accuracy_row(a[years == year], f[years == year])
    rows["peak"] = _accuracy_row(a[peak], f[peak])
    rows["offpeak"] = _accuracy_row(a[~peak], f[~peak])
    for g in range(1, n_groups + 1):
        rows[f"group:{g}"] = _accuracy_row(a[groups == g], f[groups == g])
    accuracy = pd.DataFrame.from_dict(rows, orient="index")
    accuracy.index.name = "slice"

    slots = hour_of_week_array(actual.hours, weekdays, holidays)
    report = EvalReport(
        accuracy=accuracy,
        error_stats=_error_stats(errors, years),
        error_by_hour_of_week=_by_week_slot(errors, slots, "mean_error"),
    )
    if not probs:
        return report

    _check_forecast_days(probs, actual)
    levels = probs[0].levels
    quantiles = np.concatenate([p.values for p in probs])
    actual_days = actual.as_days()
    report.pinball = pinball(a, quantiles, levels)
    report.coverage = pd.DataFrame(
        {
            "overall": coverage_histogram(actual_days, probs),
            "peak": coverage_histogram(actual_days, probs, Segment.PEAK),
            "offpeak": coverage_histogram(actual_days, probs, Segment.OFFPEAK),
        }
    ).rename_axis("band")

    widths = interval_widths(probs)
    report.interval_width_by_hour = (
        pd.DataFrame(widths, columns=np.arange(1, HOURS_PER_DAY + 1))
        .describe(percentiles=[0.25, 0.5, 0.75])
        .T.drop(columns="count")
        .rename(columns={"50%": "median"})
        .rename_axis("hour")
    )
    report.interval_width_by_hour_of_week = _by_week_slot(
        widths.ravel(), slots, "interval_width"
    )
    neg = np.array(
        [[negative_price_probability(p, h) for h in range(1, HOURS_PER_DAY + 1)] for p in probs]
    )
    report.neg_price_prob_by_hour_of_week = _by_week_slot(neg.ravel(), slots, "neg_price_prob")
    return report


def submodel_rmse_by_hour(actual: HourlySeries, forecasts: dict) -> pd.DataFrame:
    """RMSE per hour of day (rows) for each named forecast (columns)."""
    out = {}
    for name, forecast in forecasts.items():
        require_aligned(actual, forecast)
        err = (actual.values - forecast.values).reshape(-1, HOURS_PER_DAY)
        out[name] = np.sqrt((err**2).mean(axis=0))
    return pd.DataFrame(out, index=pd.RangeIndex(1, HOURS_PER_DAY + 1, name="hour"))


def improvement_table(
    actual: HourlySeries, base: HourlySeries, improved: HourlySeries, by: str = "hour"
) -> pd.DataFrame:
    """
    RMSE of two forecasts and the relative improvement per hour of day or weekday.

    `by` is "hour" (1..24) or "weekday" (1 = Monday).
    """
    require_aligned(actual, base)
    require_aligned(actual, improved)
    if by == "hour":
        keys = actual.hours
    elif by == "weekday":
        keys = actual.weekdays
    else:
        raise ValueError(f"unknown grouping {by!r}")
    frame = pd.DataFrame(
        {
            by: keys,
            "base": (actual.values - base.values) ** 2,
            "improved": (actual.values - improved.values) ** 2,
        }
    )
    table = np.sqrt(frame.groupby(by).mean()).add_prefix("rmse_")
    table["improvement_pct"] = 100 * (1 - table["rmse_improved"] / table["rmse_base"])
    return table


def load_improvement_table(
    actual: HourlySeries, tso: HourlySeries, improved: HourlySeries
) -> pd.DataFrame:
    """RMSE and MAE of the TSO and the improved load forecasts per year and overall."""
    require_aligned(actual, tso)
    require_aligned(actual, improved)
    years = actual.calendar.years(actual.day_indices)
    rows = {}
    for label, mask in [("all", np.ones(len(actual), dtype=bool))] + [
        (str(y), years == y) for y in np.unique(years)
    ]:
        a = actual.values[mask]
        row = {
            "rmse_tso": rmse(a, tso.values[mask]),
            "rmse_improved": rmse(a, improved.values[mask]),
            "mae_tso": mae(a, tso.values[mask]),
            "mae_improved": mae(a, improved.values[mask]),
        }
        row["rmse_gain_pct"] = 100 * (1 - row["rmse_improved"] / row["rmse_tso"])
        row["mae_gain_pct"] = 100 * (1 - row["mae_improved"] / row["mae_tso"])
        rows[label] = row
    return pd.DataFrame.from_dict(rows, orient="index").rename_axis("year")


def error_correlations(errors: HourlySeries, exog: dict) -> pd.Series:
    """Pearson correlation of the price errors with each exogenous series."""
    out = {}
    for name, series in exog.items():
        if not series.covers(errors.start, errors.end):
            logger.warning(f"{name} does not cover the evaluation range; skipped")
            continue
        x = series.slice(errors.start, errors.end).values
        out[name] = np.nan if np.std(x) == 0 else float(np.corrcoef(errors.values, x)[0, 1])
    return pd.Series(out, name="correlation", dtype=float)
