"""
Two-day-ahead forecast of the TSO load forecast: the SARMA recursion applied
to the TSO forecast series itself, with the value one week earlier as an
extra regressor. Fitting starts at hour 168 so that every lag is observed.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger

from pricex.errors import OutOfRange, TooFewDays
from pricex.load.sarma import SarmaParams, _forecast_numba, css_fit, innovations
from pricex.timeseries import HOURS_PER_DAY, HOURS_PER_WEEK, HourlySeries, HourStamp

logger = logger.bind(module="load")

WEEKLY_START = HOURS_PER_WEEK


@dataclass(frozen=True)
class SarmaxParams(SarmaParams):
    phi168: float = 0.0

    def coefficients(self) -> np.ndarray:
        return np.array(
            [self.phi0, self.phi1, self.phi24, self.phi168, self.omega1, self.omega24],
            dtype=float,
        )


def fit_sarmax_2da(
    tso_history: HourlySeries, maxiter: int = 200, strict: bool = False
) -> SarmaxParams:
    """CSS fit of the two-day-ahead model on a TSO forecast history."""
    if len(tso_history) < 30 * HOURS_PER_DAY:
        raise TooFewDays(
            f"need at least 30 days of TSO forecasts, got {len(tso_history)} hours"
        )
    coefs, sigma2, converged, nit, _ = css_fit(
        tso_history.values, WEEKLY_START, True, maxiter, strict
    )
    params = SarmaxParams(
        phi0=coefs[0],
        phi1=coefs[1],
        phi24=coefs[2],
        phi168=coefs[3],
        omega1=coefs[4],
        omega24=coefs[5],
        sigma2=sigma2,
        converged=converged,
        iterations=nit,
    )
    logger.debug(
        f"SARMAX fit: phi1={params.phi1:.3f} phi24={params.phi24:.3f} "
        f"phi168={params.phi168:.3f} sigma2={params.sigma2:.4g}"
    )
    return params


def forecast_2da(
    params: SarmaxParams, tso_history: HourlySeries, horizon: int = 48
) -> HourlySeries:
    """
    Forecast `horizon` hours past the end of `tso_history` and return the last 24.

    With the default horizon and a history ending on day d, the result holds
    hours 25..48 of the forecast, i.e. day d + 2.
    """
    if len(tso_history) <= WEEKLY_START:
        raise TooFewDays(f"need more than {WEEKLY_START} hours of history")
    if horizon < HOURS_PER_DAY:
        raise OutOfRange(f"horizon must cover at least one day, got {horizon}")
    y = tso_history.values
    psi = innovations(y, params, WEEKLY_START)
    path = _forecast_numba(y, psi, params.coefficients(), len(y), int(horizon))
    start = tso_history.end.advance(horizon - HOURS_PER_DAY + 1)
    return HourlySeries(start, path[-HOURS_PER_DAY:], tso_history.calendar, tso_history.unit)


def backcast_2da(
    params: SarmaxParams, tso: HourlySeries, first_day: int, last_day: int
) -> HourlySeries:
    """
    Historical two-day-ahead forecasts for days `first_day`..`last_day`.

    The forecast of day D uses `params` and the TSO forecasts through day
    D - 2, exactly as a live forecast issued on day D - 2 would.
    """
    y = tso.values
    psi = innovations(y, params, WEEKLY_START)
    coefs = params.coefficients()
    out = np.empty((last_day - first_day + 1, HOURS_PER_DAY))
    for k, day in enumerate(range(first_day, last_day + 1)):
        origin = tso.position(HourStamp(day - 2, HOURS_PER_DAY)) + 1
        if origin <= WEEKLY_START:
            raise OutOfRange(f"not enough TSO history before day {day} for a backcast")
        out[k] = _forecast_numba(y, psi, coefs, origin, 2 * HOURS_PER_DAY)[-HOURS_PER_DAY:]
    return HourlySeries.from_days(first_day, out, tso.calendar, tso.unit)
