"""
Univariate hourly ARX model of the price estimator error

    eps_t = phi0 + phi1 eps_{t-1} + phi2 eps_{t-2} + phi3 eps_{t-24} + phi4 eps_{t-168}
            + phi5 psi_{t-1}
            + omega1 eps_min(d-1) + omega2 eps_max(d-1) + omega3 hol(d) + omega4 wind_t
            + psi_t

on the error series read as one hourly sequence, so the within-day lags of
hours 1 and 2 reach into the previous day. Fitted by conditional sum of
squares with the first back innovation filtered recursively.
"""

from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
from loguru import logger
from scipy import optimize

from pricex.errors import NonConvergence, OutOfRange
from pricex.postproc.panel import WEEKLY_LAG, PriceErrorPanel
from pricex.timeseries import HOURS_PER_DAY, HOURS_PER_WEEK

logger = logger.bind(module="postproc")

MA_BOUND = 0.99
FILTER_BURN_IN_DAYS = 56


@dataclass(frozen=True)
class UvArxParams:
    phi: tuple = (0.0,) * 6
    omega: tuple = (0.0,) * 4
    sigma2: float = 0.0
    converged: bool = True
    iterations: int = 0

    def __post_init__(self):
        phi = tuple(float(v) for v in self.phi)
        omega = tuple(float(v) for v in self.omega)
        if len(phi) != 6 or len(omega) != 4:
            raise ValueError("univariate ARX needs six phi and four omega coefficients")
        if not np.all(np.isfinite(phi + omega)) or not self.sigma2 >= 0:
            raise ValueError("coefficients must be finite and sigma2 non-negative")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "omega", omega)

    def coefficients(self) -> np.ndarray:
        return np.array(self.phi + self.omega, dtype=float)

    @classmethod
    def from_coefficients(cls, coefs, **kwargs) -> "UvArxParams":
        coefs = np.asarray(coefs, dtype=float)
        return cls(phi=tuple(coefs[:6]), omega=tuple(coefs[6:]), **kwargs)


@numba.njit
def _mean_part(y, exog, coefs, t):
    return (
        coefs[0]
        + coefs[1] * y[t - 1]
        + coefs[2] * y[t - 2]
        + coefs[3] * y[t - 24]
        + coefs[4] * y[t - 168]
        + coefs[6] * exog[t, 0]
        + coefs[7] * exog[t, 1]
        + coefs[8] * exog[t, 2]
        + coefs[9] * exog[t, 3]
    )


@numba.njit
def _uv_innovations(y, exog, coefs, start, stop):
    # psi before `start` is 0
    psi = np.zeros(len(y))
    for t in range(start, stop):
        psi[t] = y[t] - _mean_part(y, exog, coefs, t) - coefs[5] * psi[t - 1]
    return psi


@numba.njit
def _uv_forecast(y, psi, exog, coefs, origin, n_ahead):
    buf = y.copy()
    for k in range(n_ahead):
        t = origin + k
        value = _mean_part(buf, exog, coefs, t)
        if k == 0:
            value += coefs[5] * psi[t - 1]
        buf[t] = value
    return buf[origin : origin + n_ahead]


@numba.njit
def _uv_simulate(psi, exog, coefs, y_init):
    # exog columns 0 and 1 are rewritten from the simulated path
    n = len(psi)
    y = np.zeros(n)
    start = len(y_init)
    for t in range(start):
        y[t] = y_init[t]
    for t in range(start, n):
        if t % 24 == 0:
            lo = y[t - 24 : t].min()
            hi = y[t - 24 : t].max()
            for k in range(t, min(t + 24, n)):
                exog[k, 0] = lo
                exog[k, 1] = hi
        y[t] = _mean_part(y, exog, coefs, t) + coefs[5] * psi[t - 1] + psi[t]
    return y


def uv_innovations(y, exog, params: UvArxParams, start: int, stop: Optional[int] = None):
    y = np.asarray(y, dtype=float)
    stop = len(y) if stop is None else stop
    if start < HOURS_PER_WEEK:
        raise ValueError(f"innovations need {HOURS_PER_WEEK} hours of lags, start={start}")
    return _uv_innovations(y, np.asarray(exog, dtype=float), params.coefficients(), start, stop)


def simulate_uv(psi, exog, params: UvArxParams, y_init=None) -> np.ndarray:
    """
    Run the univariate model forward from innovations `psi`.

    The first 168 values come from `y_init` (zeros by default). The holiday
    and wind columns of `exog` are used as given; the previous-day minimum
    and maximum are recomputed from the simulated path.
    """
    psi = np.asarray(psi, dtype=float)
    y_init = np.zeros(HOURS_PER_WEEK) if y_init is None else np.asarray(y_init, dtype=float)
    if len(y_init) < HOURS_PER_WEEK:
        raise ValueError(f"need {HOURS_PER_WEEK} initial values, got {len(y_init)}")
    exog = np.array(exog, dtype=float)
    return _uv_simulate(psi, exog, params.coefficients(), y_init)


def _design(y, exog, start, stop):
    t = np.arange(start, stop)
    return np.column_stack(
        [np.ones(len(t)), y[t - 1], y[t - 2], y[t - 24], y[t - 168], exog[t]]
    )


def fit_uv(
    panel: PriceErrorPanel,
    window_weeks: int,
    last_day: Optional[int] = None,
    maxiter: int = 200,
    strict: bool = False,
) -> UvArxParams:
    """
    Fit the univariate ARX model on the window ending on `last_day`.

    Least squares without the moving-average term gives the starting
    point; the conditional sum of squares with phi5 in (-0.99, 0.99) is then
    minimised by L-BFGS-B on column-scaled regressors. Regressors that do
    not vary in the window (e.g. a holiday dummy without holidays) are held
    at zero.

    Parameters
    ----------
    panel : PriceErrorPanel
    window_weeks : int
        Calibration window; clipped to the panel's first day with a weekly lag
    last_day : int, optional
        Last day of the window; defaults to the panel's last day with known errors
    maxiter : int, default=200
    strict : bool, default=False
        Raise NonConvergence instead of flagging it

    Returns
    -------
    UvArxParams
    """
    days = panel.fit_days(7 * window_weeks, last_day)
    y = panel.hourly_errors()
    exog = panel.hourly_exog()
    start = (days.start - panel.first_day) * HOURS_PER_DAY
    stop = (days.stop - panel.first_day) * HOURS_PER_DAY
    n_eff = stop - start

    X = _design(y, exog, start, stop)
    spread = X.std(axis=0)
    active = spread > 0
    active[0] = True
    scale = np.where(spread > 0, spread, 1.0)
    scale[0] = 1.0

    beta0 = np.zeros(X.shape[1])
    beta0[active] = np.linalg.lstsq(X[:, active] / scale[active], y[start:stop], rcond=None)[0]

    # theta = scaled regression coefficients of the active columns followed by phi5
    def _unpack(theta):
        beta = np.zeros(X.shape[1])
        beta[active] = theta[:-1]
        beta = beta / scale
        return np.concatenate([beta[:5], theta[-1:], beta[5:]])

    def objective(theta):
        psi = _uv_innovations(y, exog, _unpack(theta), start, stop)
        return float(psi[start:stop] @ psi[start:stop]) / n_eff

    theta0 = np.concatenate([beta0[active], [0.0]])
    bounds = [(None, None)] * int(active.sum()) + [(-MA_BOUND, MA_BOUND)]
    res = optimize.minimize(
        objective, theta0, method="L-BFGS-B", bounds=bounds, options={"maxiter": maxiter}
    )
    if not res.success:
        message = f"univariate ARX fit stopped after {res.nit} iterations: {res.message}"
        if strict:
            raise NonConvergence(message)
        logger.warning(message + "; keeping best-so-far parameters")

    coefs = _unpack(res.x)
    logger.debug(f"uv{window_weeks}: days {days.start}..{days.stop - 1}, sigma2={res.fun:.4g}")
    return UvArxParams.from_coefficients(
        coefs, sigma2=float(res.fun), converged=bool(res.success), iterations=int(res.nit)
    )


def forecast_uv(params: UvArxParams, panel: PriceErrorPanel, day: int) -> np.ndarray:
    """
    24 recursive error forecasts for `day` from the errors up to day - 1.

    Within-day lags that are not observed yet are replaced by their own
    forecasts; the back innovation enters the first hour only.
    """
    panel.require_history(day)
    origin = (day - panel.first_day) * HOURS_PER_DAY
    if origin < HOURS_PER_WEEK + 1:
        raise OutOfRange(f"day {day} has fewer than {WEEKLY_LAG} days of history in the panel")
    y = panel.hourly_errors().copy()
    y[origin:] = 0.0
    exog = panel.hourly_exog()

    start = max(HOURS_PER_WEEK, origin - FILTER_BURN_IN_DAYS * HOURS_PER_DAY)
    # lags of the filter must not reach a day with unknown errors
    unknown = np.flatnonzero(~np.isfinite(y[:origin]))
    if len(unknown):
        start = max(start, int(unknown[-1]) + 1 + HOURS_PER_WEEK)
    coefs = params.coefficients()
    psi = _uv_innovations(y, exog, coefs, start, origin)
    return _uv_forecast(y, psi, exog, coefs, origin, HOURS_PER_DAY)
