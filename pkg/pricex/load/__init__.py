from pricex.load.error import LoadRecord, forecast_error, improve_forecast
from pricex.load.forecast import forecast_error_24h, residual_component
from pricex.load.preprocess import LoadForecast, preprocess_load
from pricex.load.sarma import SarmaParams, fit_sarma, sarma_innovations, simulate
from pricex.load.seasonal import (
    SeasonalProfile,
    fit_seasonal_profile,
    profile_last_day,
    seasonal_component,
)
from pricex.load.twoday import SarmaxParams, backcast_2da, fit_sarmax_2da, forecast_2da

__all__ = [
    "LoadForecast",
    "LoadRecord",
    "SarmaParams",
    "SarmaxParams",
    "SeasonalProfile",
    "backcast_2da",
    "fit_sarma",
    "fit_sarmax_2da",
    "fit_seasonal_profile",
    "forecast_2da",
    "forecast_error",
    "forecast_error_24h",
    "improve_forecast",
    "preprocess_load",
    "profile_last_day",
    "residual_component",
    "sarma_innovations",
    "seasonal_component",
    "simulate",
]
