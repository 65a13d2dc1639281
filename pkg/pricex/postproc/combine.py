from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from pricex.config import PostprocConfig
from pricex.errors import AlignmentError, MissingSubModel, PricexError
from pricex.postproc.mv import fit_mv, forecast_mv
from pricex.postproc.panel import PriceErrorPanel
from pricex.postproc.uv import fit_uv, forecast_uv
from pricex.timeseries import HOURS_PER_DAY

logger = logger.bind(module="postproc")


def submodel_names(window_weeks=(44, 48, 52)) -> tuple:
    """uv44, uv48, uv52, mv44, mv48, mv52 for the default windows."""
    return tuple(f"uv{w}" for w in window_weeks) + tuple(f"mv{w}" for w in window_weeks)


SUBMODEL_NAMES = submodel_names()


@dataclass(frozen=True, eq=False)
class SubModelForecasts:
    """
    Price forecasts of the sub-models for one day.

    Parameters
    ----------
    day : int
        Forecast day index
    base : ndarray, shape (24,)
        Price estimator of the dispatch model in EUR/MWh
    prices : dict of str to ndarray
        Sub-model name to its 24 price forecasts (estimator plus error forecast)
    """

    day: int
    base: np.ndarray
    prices: dict = field(default_factory=dict)

    def __post_init__(self):
        base = np.array(self.base, dtype=float)
        if base.shape != (HOURS_PER_DAY,):
            raise AlignmentError(f"price estimator must hold 24 values, got {base.shape}")
        prices = {}
        for name, values in self.prices.items():
            values = np.array(values, dtype=float)
            if values.shape != (HOURS_PER_DAY,) or not np.all(np.isfinite(values)):
                raise AlignmentError(f"sub-model {name} must give 24 finite prices")
            values.setflags(write=False)
            prices[name] = values
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "prices", prices)

    @property
    def names(self) -> tuple:
        return tuple(self.prices)

    def missing(self, required=SUBMODEL_NAMES) -> list:
        return [name for name in required if name not in self.prices]

    def matrix(self, names=SUBMODEL_NAMES) -> np.ndarray:
        """(24, len(names)) matrix of the named forecasts in the given order."""
        missing = self.missing(names)
        if missing:
            raise MissingSubModel(f"day {self.day}: no forecast from {', '.join(missing)}")
        return np.column_stack([self.prices[name] for name in names])


def combine_point(six: SubModelForecasts, required=SUBMODEL_NAMES) -> np.ndarray:
    """Arithmetic mean of the sub-model price forecasts per hour."""
    return six.matrix(required).mean(axis=1)


def forecast_submodels(
    panel: PriceErrorPanel,
    day: int,
    base_prices,
    config: Optional[PostprocConfig] = None,
    last_fit_day: Optional[int] = None,
) -> SubModelForecasts:
    """
    Fit the univariate and multivariate models on every window and forecast `day`.

    Each model is calibrated on the window ending on `last_fit_day` (the day
    before `day` by default). A sub-model that cannot be fitted is left out
    and logged; combine_point then raises MissingSubModel for the day.

    Parameters
    ----------
    panel : PriceErrorPanel
        Errors known up to the day before `day`
    day : int
        Forecast day
    base_prices : array-like, shape (24,)
        Dispatch price estimator of `day`
    config : PostprocConfig, optional
    last_fit_day : int, optional

    Returns
    -------
    SubModelForecasts
    """
    config = config or PostprocConfig()
    base = np.asarray(base_prices, dtype=float)
    last_fit_day = day - 1 if last_fit_day is None else last_fit_day

    prices = {}
    for weeks in config.window_weeks:
        for kind, fit, forecast in (
            ("uv", lambda w: fit_uv(panel, w, last_fit_day, maxiter=config.maxiter), forecast_uv),
            ("mv", lambda w: fit_mv(panel, w, last_fit_day), forecast_mv),
        ):
            name = f"{kind}{weeks}"
            try:
                params = fit(weeks)
                prices[name] = base + forecast(params, panel, day)
            except PricexError as e:
                logger.warning(f"day {day}: sub-model {name} failed: {e}")

    ordered = {name: prices[name] for name in submodel_names(config.window_weeks) if name in prices}
    return SubModelForecasts(day=day, base=base, prices=ordered)
