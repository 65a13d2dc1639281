"""Point and probabilistic forecast scores."""

from typing import Optional, Sequence

import numpy as np
import pandas as pd

from pricex.density import pinball_loss
from pricex.errors import AlignmentError
from pricex.postproc import ProbabilisticForecast, Segment
from pricex.timeseries import HOURS_PER_DAY, HourlySeries, require_aligned

DEFAULT_N_LEVELS = 19


def _paired(actual, forecast) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(actual, HourlySeries) and isinstance(forecast, HourlySeries):
        require_aligned(actual, forecast)
        return actual.values, forecast.values
    a = np.asarray(getattr(actual, "values", actual), dtype=float)
    f = np.asarray(getattr(forecast, "values", forecast), dtype=float)
    if a.shape != f.shape:
        raise AlignmentError(f"actual has shape {a.shape}, forecast has shape {f.shape}")
    if a.size == 0:
        raise ValueError("cannot score an empty forecast")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(f))):
        raise ValueError("actuals and forecasts must be finite")
    return a.ravel(), f.ravel()


def rmse(actual, forecast) -> float:
    a, f = _paired(actual, forecast)
    return float(np.sqrt(np.mean((a - f) ** 2)))


def mae(actual, forecast) -> float:
    a, f = _paired(actual, forecast)
    return float(np.mean(np.abs(a - f)))


def pinball(actual, quantile_forecasts, q_grid) -> pd.Series:
    """
    Mean pinball loss per quantile level.

    Parameters
    ----------
    actual : array-like, shape (n,)
    quantile_forecasts : array-like, shape (n, n_levels)
    q_grid : sequence of float

    Returns
    -------
    pandas.Series
        Indexed by quantile level
    """
    y = np.asarray(actual, dtype=float).ravel()
    Q = np.atleast_2d(np.asarray(quantile_forecasts, dtype=float))
    q_grid = np.asarray(q_grid, dtype=float)
    if Q.shape != (len(y), len(q_grid)):
        raise AlignmentError(
            f"expected quantile forecasts of shape {(len(y), len(q_grid))}, got {Q.shape}"
        )
    losses = pinball_loss(y[:, None], Q, q_grid[None, :])
    return pd.Series(losses.mean(axis=0), index=pd.Index(q_grid, name="q"), name="pinball")


def _stack(actuals, forecasts: Sequence[ProbabilisticForecast], segment) -> tuple:
    """Actual prices, quantile rows and peak flags of the selected hours."""
    y = np.asarray(actuals, dtype=float).reshape(len(forecasts), HOURS_PER_DAY)
    values = np.concatenate([f.values for f in forecasts])
    peak = np.concatenate([f.peak for f in forecasts])
    keep = np.ones(len(peak), dtype=bool) if segment is None else Segment(segment).hours_of(peak)
    return y.ravel()[keep], values[keep], peak[keep]


def coverage_histogram(
    actuals,
    forecasts: Sequence[ProbabilisticForecast],
    segment: Optional[Segment] = None,
    n_levels: int = DEFAULT_N_LEVELS,
) -> np.ndarray:
    """
    Count actual prices per band between adjacent predicted quantiles.

    Bin 0 holds the prices below the lowest quantile, the last bin those at
    or above the highest one. With 19 levels there are 20 bins.

    Parameters
    ----------
    actuals : array-like, shape (n_days, 24)
        Actual prices aligned with `forecasts`
    forecasts : sequence of ProbabilisticForecast
    segment : Segment, optional
        Restrict the count to peak or off-peak hours
    n_levels : int, default=19
        Number of quantile levels when `forecasts` is empty
    """
    if len(forecasts) == 0:
        return np.zeros(n_levels + 1, dtype=int)
    y, values, _ = _stack(actuals, forecasts, segment)
    bins = (values <= y[:, None]).sum(axis=1)
    return np.bincount(bins, minlength=values.shape[1] + 1)


def interval_widths(forecasts: Sequence[ProbabilisticForecast]) -> np.ndarray:
    """(n_days, 24) widths of the outermost predicted interval."""
    if len(forecasts) == 0:
        return np.zeros((0, HOURS_PER_DAY))
    return np.array([f.interval_width() for f in forecasts])
