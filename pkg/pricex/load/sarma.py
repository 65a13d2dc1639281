"""
Multiplicative SARMA(1,1)x(1,1)_24 model of the residual load forecast error

    y_t = phi0 + phi1 y_{t-1} + phi24 y_{t-24} - phi1 phi24 y_{t-25}
          + omega1 psi_{t-1} + omega24 psi_{t-24} + omega1 omega24 psi_{t-25}
          + psi_t

fitted by conditional sum of squares. The recursion kernels also carry an
optional lag-168 term (phi168 y_{t-168}) used by the two-day-ahead model.
Values of y and psi before the start index are taken as 0.
"""

from dataclasses import dataclass

import numba
import numpy as np
from loguru import logger
from scipy import optimize

from pricex.errors import NonConvergence, TooFewDays
from pricex.timeseries import HourlySeries

logger = logger.bind(module="load")


@dataclass(frozen=True)
class SarmaParams:
    phi0: float = 0.0
    phi1: float = 0.0
    phi24: float = 0.0
    omega1: float = 0.0
    omega24: float = 0.0
    sigma2: float = 0.0
    converged: bool = True
    iterations: int = 0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError(f"innovation variance must be >= 0, got {self.sigma2}")

    @property
    def is_stationary(self) -> bool:
        return abs(self.phi1) < 1 and abs(self.phi24) < 1

    def coefficients(self) -> np.ndarray:
        """(phi0, phi1, phi24, phi168, omega1, omega24) in kernel order."""
        return np.array(
            [self.phi0, self.phi1, self.phi24, 0.0, self.omega1, self.omega24],
            dtype=float,
        )


@numba.njit
def _lag(y, t, k):
    if t - k < 0:
        return 0.0
    return y[t - k]


@numba.njit
def _innovations_numba(y, coefs, start):
    phi0, phi1, phi24, phi168 = coefs[0], coefs[1], coefs[2], coefs[3]
    w1, w24 = coefs[4], coefs[5]
    n = len(y)
    psi = np.zeros(n)
    for t in range(start, n):
        ar = (
            phi0
            + phi1 * _lag(y, t, 1)
            + phi24 * _lag(y, t, 24)
            - phi1 * phi24 * _lag(y, t, 25)
            + phi168 * _lag(y, t, 168)
        )
        ma = w1 * _lag(psi, t, 1) + w24 * _lag(psi, t, 24) + w1 * w24 * _lag(psi, t, 25)
        psi[t] = y[t] - ar - ma
    return psi


@numba.njit
def _simulate_numba(psi, coefs, y_init):
    # y[t] = y_init[t] for t < len(y_init), the recursion afterwards
    phi0, phi1, phi24, phi168 = coefs[0], coefs[1], coefs[2], coefs[3]
    w1, w24 = coefs[4], coefs[5]
    n = len(psi)
    y = np.zeros(n)
    start = len(y_init)
    for t in range(start):
        y[t] = y_init[t]
    for t in range(start, n):
        y[t] = (
            phi0
            + phi1 * _lag(y, t, 1)
            + phi24 * _lag(y, t, 24)
            - phi1 * phi24 * _lag(y, t, 25)
            + phi168 * _lag(y, t, 168)
            + w1 * _lag(psi, t, 1)
            + w24 * _lag(psi, t, 24)
            + w1 * w24 * _lag(psi, t, 25)
            + psi[t]
        )
    return y


@numba.njit
def _forecast_numba(y, psi, coefs, origin, n_ahead):
    # forecast n_ahead steps after y[:origin] with future innovations at 0
    n_hist = 169
    lo = max(0, origin - n_hist)
    m = origin - lo
    yy = np.zeros(m + n_ahead)
    pp = np.zeros(m + n_ahead)
    for k in range(m):
        yy[k] = y[lo + k]
        pp[k] = psi[lo + k]
    phi0, phi1, phi24, phi168 = coefs[0], coefs[1], coefs[2], coefs[3]
    w1, w24 = coefs[4], coefs[5]
    for t in range(m, m + n_ahead):
        # lags reaching before the buffer are pre-sample zeros of the full series
        yy[t] = (
            phi0
            + phi1 * _lag(yy, t, 1)
            + phi24 * _lag(yy, t, 24)
            - phi1 * phi24 * _lag(yy, t, 25)
            + phi168 * _lag(yy, t, 168)
            + w1 * _lag(pp, t, 1)
            + w24 * _lag(pp, t, 24)
            + w1 * w24 * _lag(pp, t, 25)
        )
    return yy[m:]


def innovations(y: np.ndarray, params, start: int = 0) -> np.ndarray:
    return _innovations_numba(np.asarray(y, dtype=float), params.coefficients(), int(start))


def simulate(psi: np.ndarray, params, y_init=None) -> np.ndarray:
    """Run the model forward from innovations `psi`."""
    y_init = np.zeros(0) if y_init is None else np.asarray(y_init, dtype=float)
    return _simulate_numba(np.asarray(psi, dtype=float), params.coefficients(), y_init)


def recursive_forecast(y: np.ndarray, params, n_ahead: int, start: int = 0) -> np.ndarray:
    """Forecast `n_ahead` values after the end of `y`."""
    y = np.asarray(y, dtype=float)
    psi = innovations(y, params, start)
    return _forecast_numba(y, psi, params.coefficients(), len(y), int(n_ahead))


def sarma_innovations(params: SarmaParams, rc: HourlySeries) -> HourlySeries:
    """Innovations of the residual component, pre-sample values zero."""
    if len(rc) < 26:
        raise TooFewDays(f"need at least 26 hours of residuals, got {len(rc)}")
    return rc.with_values(innovations(rc.values, params))


def _unpack(theta, with_weekly, mean):
    a, u1, u24, v1, v24 = theta[:5]
    phi1, phi24 = np.tanh(u1), np.tanh(u24)
    phi168 = theta[5] if with_weekly else 0.0
    # intercept measured from the value that reproduces the sample mean
    phi0 = mean * (1 - phi1 - phi24 + phi1 * phi24 - phi168) + a
    return np.array([phi0, phi1, phi24, phi168, np.tanh(v1), np.tanh(v24)])


def css_fit(y: np.ndarray, start: int, with_weekly: bool, maxiter: int, strict: bool):
    """
    Conditional sum-of-squares fit on the scale-standardised series.

    Returns the kernel coefficients on the original scale, sigma2, the
    convergence flag, the iteration count and the objective trace.
    """
    y = np.asarray(y, dtype=float)
    scale = float(np.std(y[start:]))
    if scale == 0.0 or not np.isfinite(scale):
        # constant series: mean-only model
        coefs = np.zeros(6)
        coefs[0] = float(np.mean(y[start:])) if len(y) > start else 0.0
        return coefs, 0.0, True, 0, [0.0]

    z = y / scale
    n_eff = len(z) - start
    mean = float(np.mean(z[start:]))

    def objective(theta):
        psi = _innovations_numba(z, _unpack(theta, with_weekly, mean), start)
        return float(psi[start:] @ psi[start:]) / n_eff

    theta0 = np.zeros(6 if with_weekly else 5)
    trace = [objective(theta0)]

    def _record(xk):
        trace.append(objective(xk))

    # (-1, 1) maps for phi1, phi24, omega1, omega24 keep the optimiser unconstrained
    res = optimize.minimize(
        objective,
        theta0,
        method="L-BFGS-B",
        callback=_record,
        options={"maxiter": maxiter},
    )
    coefs = _unpack(res.x, with_weekly, mean)
    sigma2_z = float(res.fun)
    if not res.success:
        message = f"CSS fit stopped after {res.nit} iterations: {res.message}"
        if strict:
            raise NonConvergence(message)
        logger.warning(message + "; keeping best-so-far parameters")

    coefs[0] *= scale
    return coefs, sigma2_z * scale**2, bool(res.success), int(res.nit), trace


def fit_sarma(rc: HourlySeries, maxiter: int = 200, strict: bool = False) -> SarmaParams:
    """
    Fit the SARMA(1,1)x(1,1)_24 model to a residual component.

    Parameters
    ----------
    rc : HourlySeries
        Residual component, at least 30 days long
    maxiter : int, default=200
        Iteration cap of the optimiser
    strict : bool, default=False
        Raise NonConvergence instead of flagging it

    Returns
    -------
    SarmaParams
        Fitted coefficients; `converged` is False if the iteration cap was hit
    """
    if len(rc) < 30 * 24:
        raise TooFewDays(f"need at least 30 days of residuals, got {len(rc)} hours")
    coefs, sigma2, converged, nit, _ = css_fit(rc.values, 0, False, maxiter, strict)
    params = SarmaParams(
        phi0=coefs[0],
        phi1=coefs[1],
        phi24=coefs[2],
        omega1=coefs[4],
        omega24=coefs[5],
        sigma2=sigma2,
        converged=converged,
        iterations=nit,
    )
    logger.debug(
        f"SARMA fit: phi1={params.phi1:.3f} phi24={params.phi24:.3f} "
        f"omega1={params.omega1:.3f} omega24={params.omega24:.3f} sigma2={params.sigma2:.4g}"
    )
    return params
