import numpy as np

from pricex.errors import OutOfRange, TooFewDays
from pricex.load.sarma import SarmaParams, recursive_forecast
from pricex.load.seasonal import SeasonalProfile, seasonal_component
from pricex.timeseries import HOURS_PER_DAY, HourlySeries, HourStamp


def residual_component(errors: HourlySeries, profile: SeasonalProfile) -> HourlySeries:
    """Errors minus their seasonal component."""
    sc = seasonal_component(profile, errors.start, len(errors), errors.calendar)
    return errors.with_values(errors.values - sc.values)


def forecast_error_24h(
    params: SarmaParams,
    profile: SeasonalProfile,
    history: HourlySeries,
    target_day: int,
) -> HourlySeries:
    """
    Forecast the TSO load forecast error for the 24 hours of `target_day`.

    The residual component is forecast recursively from the end of `history`
    through the target day with future innovations set to zero; hours between
    the end of history and the target day are forecast too. The seasonal
    profile of the target day is added back.

    Parameters
    ----------
    params : SarmaParams
        Fitted residual model
    profile : SeasonalProfile
        Weekly seasonal profile of the error
    history : HourlySeries
        Observed errors, ending before `target_day`
    target_day : int
        Day index to forecast

    Returns
    -------
    HourlySeries
        24 forecasted errors for `target_day`
    """
    if len(history) < 26:
        raise TooFewDays(f"need at least 26 hours of error history, got {len(history)}")
    target_start = HourStamp(target_day, 1)
    n_ahead = target_start.ordinal - history.end.ordinal - 1 + HOURS_PER_DAY
    if n_ahead < HOURS_PER_DAY:
        raise OutOfRange(f"history ending {history.end} overlaps target day {target_day}")

    rc = residual_component(history, profile)
    rc_hat = recursive_forecast(rc.values, params, n_ahead)[-HOURS_PER_DAY:]
    sc = seasonal_component(profile, target_start, HOURS_PER_DAY, history.calendar)
    return sc.with_values(sc.values + rc_hat)
