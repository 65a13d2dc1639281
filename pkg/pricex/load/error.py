from dataclasses import dataclass

from pricex.timeseries import HourlySeries, require_aligned


@dataclass(frozen=True)
class LoadRecord:
    """Actual load and the TSO's day-ahead forecast on the same hours."""

    actual: HourlySeries
    tso_forecast: HourlySeries

    def __post_init__(self):
        require_aligned(self.actual, self.tso_forecast)


def forecast_error(rec: LoadRecord) -> HourlySeries:
    """TSO forecast error, actual minus forecast."""
    require_aligned(rec.actual, rec.tso_forecast)
    return rec.actual.with_values(rec.actual.values - rec.tso_forecast.values)


def improve_forecast(tso: HourlySeries, eps_hat: HourlySeries) -> HourlySeries:
    """Add the forecasted error to the TSO forecast."""
    require_aligned(tso, eps_hat)
    return tso.with_values(tso.values + eps_hat.values)
