"""
Quantile regression averaging over the sub-model price forecasts

Every quantile level is fitted twice, once on peak hours and once on
off-peak hours, with the regressors [1, uv44, uv48, uv52, mv44, mv48, mv52].
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from loguru import logger

from pricex.config import SolverConfig
from pricex.density import QuantileModel, fit_quantile_regression
from pricex.errors import AlignmentError, OutOfRange, TooFewDays
from pricex.postproc.combine import SUBMODEL_NAMES, SubModelForecasts, combine_point
from pricex.timeseries import HOURS_PER_DAY, Calendar, HourlySeries, peak_mask

logger = logger.bind(module="postproc")

DAY_HOURS = np.arange(1, HOURS_PER_DAY + 1)


class Segment(str, Enum):
    PEAK = "peak"
    OFFPEAK = "offpeak"

    def hours_of(self, peak: np.ndarray) -> np.ndarray:
        return peak if self is Segment.PEAK else ~peak


def peak_hours(calendar: Calendar, day: int) -> np.ndarray:
    """Peak flag of each hour 1..24 of `day`."""
    return peak_mask(DAY_HOURS, np.full(HOURS_PER_DAY, calendar.weekday(day)))


def _qra_rows(history, actual: HourlySeries, names) -> tuple:
    """Regressors, actual prices and peak flags of the history days inside `actual`."""
    X, y, peak = [], [], []
    for f in history:
        start = f.day * HOURS_PER_DAY
        offset = start - actual.start.ordinal
        if offset < 0 or offset + HOURS_PER_DAY > len(actual):
            continue
        X.append(np.column_stack([np.ones(HOURS_PER_DAY), f.matrix(names)]))
        y.append(actual.values[offset : offset + HOURS_PER_DAY])
        peak.append(peak_hours(actual.calendar, f.day))
    if not X:
        return np.zeros((0, len(names) + 1)), np.zeros(0), np.zeros(0, dtype=bool)
    return np.vstack(X), np.concatenate(y), np.concatenate(peak)


def fit_price_qra(
    history: list[SubModelForecasts],
    actual: HourlySeries,
    q: float,
    segment: Segment,
    solver: Optional[SolverConfig] = None,
    names=SUBMODEL_NAMES,
) -> QuantileModel:
    """
    Quantile regression of the actual price on the sub-model forecasts.

    Parameters
    ----------
    history : list of SubModelForecasts
        Past days with all sub-model forecasts
    actual : HourlySeries
        Actual prices; history days it does not cover are skipped
    q : float
        Quantile level in (0, 1)
    segment : Segment
        Hours entering the fit
    solver : SolverConfig, optional
    names : tuple of str
        Sub-model columns in regressor order

    Returns
    -------
    QuantileModel
        Intercept followed by one coefficient per sub-model. Collinear
        sub-models are dropped with coefficient 0 and flagged.
    """
    segment = Segment(segment)
    X, y, peak = _qra_rows(history, actual, names)
    rows = segment.hours_of(peak)
    if rows.sum() < X.shape[1] + 1:
        raise TooFewDays(
            f"{int(rows.sum())} {segment.value} hours in the history, "
            f"need at least {X.shape[1] + 1}"
        )
    return fit_quantile_regression(X[rows], y[rows], q, solver)


def fit_qra_models(
    history: list[SubModelForecasts],
    actual: HourlySeries,
    quantiles,
    solver: Optional[SolverConfig] = None,
    names=SUBMODEL_NAMES,
) -> dict:
    """Fit every (quantile, segment) pair; returns a dict keyed by (q, Segment)."""
    models = {}
    for segment in Segment:
        for q in quantiles:
            models[(float(q), segment)] = fit_price_qra(history, actual, q, segment, solver, names)
    n_degenerate = sum(m.degenerate for m in models.values())
    if n_degenerate:
        logger.warning(f"{n_degenerate} of {len(models)} QRA fits dropped collinear sub-models")
    logger.debug(f"fitted {len(models)} QRA models on {len(history)} days")
    return models


@dataclass(frozen=True, eq=False)
class ProbabilisticForecast:
    """
    Quantile forecasts of one day's prices.

    Parameters
    ----------
    day : int
    levels : tuple of float
        Increasing quantile levels
    values : ndarray, shape (24, n_levels)
        Price quantiles in EUR/MWh, non-decreasing along each row
    point : ndarray, shape (24,)
        Combined point forecast
    peak : ndarray of bool, shape (24,)
    rearranged : ndarray of bool, shape (24,)
        Hours whose raw quantiles crossed and were sorted
    """

    day: int
    levels: tuple
    values: np.ndarray
    point: np.ndarray
    peak: np.ndarray
    rearranged: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (HOURS_PER_DAY, len(self.levels)):
            raise AlignmentError(
                f"expected {HOURS_PER_DAY} x {len(self.levels)} quantiles, got {values.shape}"
            )
        if np.any(np.diff(values, axis=1) < 0):
            raise ValueError("quantile forecasts must be non-decreasing in the level")
        point = np.array(self.point, dtype=float)
        if not np.all(np.isfinite(point)):
            raise ValueError("point forecast must be finite")
        object.__setattr__(self, "levels", tuple(float(q) for q in self.levels))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "point", point)

    def quantile(self, q: float) -> np.ndarray:
        try:
            j = self.levels.index(float(q))
        except ValueError:
            raise OutOfRange(f"no forecast for quantile level {q}") from None
        return self.values[:, j]

    def interval_width(self) -> np.ndarray:
        """Width of the outermost interval, q95 - q05 on the default grid."""
        return self.values[:, -1] - self.values[:, 0]


def predict_probabilistic(
    models: dict,
    six: SubModelForecasts,
    calendar: Calendar,
    names=SUBMODEL_NAMES,
) -> ProbabilisticForecast:
    """
    Evaluate all quantile models for one day and repair crossings by sorting.

    The segment model of each hour follows the day's weekday; the point
    forecast is the plain mean of the sub-models.
    """
    levels = sorted({q for q, _ in models})
    peak = peak_hours(calendar, six.day)
    X = np.column_stack([np.ones(HOURS_PER_DAY), six.matrix(names)])

    raw = np.empty((HOURS_PER_DAY, len(levels)))
    for j, q in enumerate(levels):
        for segment in Segment:
            hours = segment.hours_of(peak)
            if hours.any():
                raw[hours, j] = models[(q, segment)].predict(X[hours])

    crossed = np.any(np.diff(raw, axis=1) < 0, axis=1)
    if crossed.any():
        logger.warning(f"day {six.day}: quantile crossing in {int(crossed.sum())} hour(s), sorted")
    return ProbabilisticForecast(
        day=six.day,
        levels=tuple(levels),
        values=np.sort(raw, axis=1),
        point=combine_point(six, names),
        peak=peak,
        rearranged=crossed,
    )


def negative_price_probability(f: ProbabilisticForecast, hour: int) -> float:
    """
    Probability of a negative price in hour 1..24.

    Inside the quantile grid the quantile function is interpolated linearly
    at 0. Outside it the first (last) two quantiles are extrapolated
    linearly, bounded by 0 and the lowest level (the highest level and 1).
    """
    if not 1 <= hour <= HOURS_PER_DAY:
        raise OutOfRange(f"hour must lie in 1..24, got {hour}")
    v = f.values[hour - 1]
    q = np.asarray(f.levels)

    if v[0] > 0:
        if len(v) < 2 or v[1] == v[0]:
            return 0.0
        slope = (q[1] - q[0]) / (v[1] - v[0])
        return float(np.clip(q[0] - slope * v[0], 0.0, q[0]))
    if v[-1] < 0:
        if len(v) < 2 or v[-1] == v[-2]:
            return 1.0
        slope = (q[-1] - q[-2]) / (v[-1] - v[-2])
        return float(np.clip(q[-1] - slope * v[-1], q[-1], 1.0))
    return float(np.clip(np.interp(0.0, v, q), 0.0, 1.0))
