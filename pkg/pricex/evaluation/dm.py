"""
Multivariate Diebold-Mariano test on daily loss differentials

The 24 hourly errors of a day are reduced to one loss per model (mean
absolute error for norm 1, mean squared error for norm 2); the test
statistic is the standardised mean of the daily differences and the
one-sided p-value tests whether model b is more accurate than model a.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from loguru import logger
from scipy import stats

from pricex.errors import AlignmentError, TooFewDays
from pricex.timeseries import HOURS_PER_DAY

logger = logger.bind(module="evaluation")

MIN_DAYS = 30


@dataclass(frozen=True)
class DmResult:
    statistic: float
    p_value: float
    n_days: int
    zero_variance: bool = False


def _daily_loss(errors: np.ndarray, norm: int) -> np.ndarray:
    if norm == 1:
        return np.abs(errors).mean(axis=1)
    if norm == 2:
        return (errors**2).mean(axis=1)
    raise ValueError(f"norm must be 1 or 2, got {norm}")


def dm_test(errors_a, errors_b, norm: int = 1) -> DmResult:
    """
    Test H0: equal accuracy against H1: forecast b is more accurate than a.

    Parameters
    ----------
    errors_a, errors_b : array-like, shape (n_days, 24)
        Forecast errors; days with a missing value in either matrix are dropped
    norm : {1, 2}, default=1

    Returns
    -------
    DmResult
        Identical losses on every day give statistic 0 and p-value 1 with
        the zero_variance flag set
    """
    a = np.asarray(errors_a, dtype=float)
    b = np.asarray(errors_b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[1] != HOURS_PER_DAY:
        raise AlignmentError(f"error matrices of shape {a.shape} and {b.shape} cannot be compared")
    common = np.all(np.isfinite(a), axis=1) & np.all(np.isfinite(b), axis=1)
    n = int(common.sum())
    if n < MIN_DAYS:
        raise TooFewDays(f"Diebold-Mariano test needs {MIN_DAYS} common days, got {n}")

    d = _daily_loss(a[common], norm) - _daily_loss(b[common], norm)
    var_d = np.var(d, ddof=0)
    if var_d == 0:
        return DmResult(statistic=0.0, p_value=1.0, n_days=n, zero_variance=True)
    statistic = float(np.mean(d) / np.sqrt(var_d / n))
    return DmResult(statistic=statistic, p_value=float(stats.norm.sf(statistic)), n_days=n)


def dm_matrix(errors: dict, norm: int = 1) -> pd.DataFrame:
    """
    p-values of dm_test for every ordered pair of models.

    Entry (row a, column b) tests whether b beats a; the diagonal is NaN.
    """
    names = list(errors)
    out = pd.DataFrame(np.nan, index=pd.Index(names, name="model_a"), columns=names)
    for a in names:
        for b in names:
            if a != b:
                out.loc[a, b] = dm_test(errors[a], errors[b], norm).p_value
    return out
