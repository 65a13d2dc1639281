from dataclasses import dataclass

from loguru import logger

from pricex.config import LoadConfig
from pricex.load.error import LoadRecord, forecast_error, improve_forecast
from pricex.load.forecast import forecast_error_24h, residual_component
from pricex.load.sarma import SarmaParams, fit_sarma
from pricex.load.seasonal import SeasonalProfile, fit_seasonal_profile, profile_last_day
from pricex.load.twoday import SarmaxParams, fit_sarmax_2da, forecast_2da
from pricex.timeseries import HourlySeries, WindowSpec

logger = logger.bind(module="load")


@dataclass(frozen=True, eq=False)
class LoadForecast:
    """Load inputs of the dispatch model for one forecast day."""

    target_day: int
    improved: HourlySeries  # day target_day
    two_day_ahead: HourlySeries  # day target_day + 1
    eps_hat: HourlySeries
    profile: SeasonalProfile
    sarma: SarmaParams
    sarmax: SarmaxParams


def preprocess_load(
    actual: HourlySeries,
    tso: HourlySeries,
    target_day: int,
    config: LoadConfig | None = None,
) -> LoadForecast:
    """
    Improve the TSO forecast of `target_day` and forecast the day after.

    Information available when forecasting `target_day` (issued on day
    target_day - 1): actual load through day target_day - 2 and TSO
    forecasts through `target_day`.

    Parameters
    ----------
    actual : HourlySeries
        Actual load, whole days
    tso : HourlySeries
        TSO day-ahead load forecasts, whole days
    target_day : int
        Day whose prices are forecast
    config : LoadConfig, optional
        Calibration window and optimiser cap

    Returns
    -------
    LoadForecast
    """
    config = config or LoadConfig()
    window = WindowSpec(config.window_days)
    last_obs = profile_last_day(target_day)
    first = max(actual.first_day, tso.first_day, last_obs - config.window_days + 1)
    logger.debug(f"load pre-processing for day {target_day}, window days {first}..{last_obs}")

    record = LoadRecord(actual.days(first, last_obs), tso.days(first, last_obs))
    errors = forecast_error(record)
    profile = fit_seasonal_profile(errors, window, last_day=last_obs)
    sarma = fit_sarma(residual_component(errors, profile), maxiter=config.maxiter)
    if not sarma.converged:
        logger.warning(f"SARMA error model did not converge for day {target_day}")
    eps_hat = forecast_error_24h(sarma, profile, errors, target_day)
    improved = improve_forecast(tso.day(target_day), eps_hat)

    origin = target_day - 1
    tso_first = max(tso.first_day, origin - config.window_days + 1)
    tso_history = tso.days(tso_first, origin)
    sarmax = fit_sarmax_2da(tso_history, maxiter=config.maxiter)
    if not sarmax.converged:
        logger.warning(f"two-day-ahead model did not converge for day {target_day}")
    two_day_ahead = forecast_2da(sarmax, tso_history, horizon=48)

    return LoadForecast(
        target_day=target_day,
        improved=improved,
        two_day_ahead=two_day_ahead,
        eps_hat=eps_hat,
        profile=profile,
        sarma=sarma,
        sarmax=sarmax,
    )
