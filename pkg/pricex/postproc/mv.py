"""
Multivariate ARX model: one daily regression per hour of the day

    eps_{h,d} = phi0 + phi1 eps_{h,d-1} + phi2 eps_{h,d-7}
                + omega1 eps_min(d-1) + omega2 eps_max(d-1) + omega3 hol(d) + omega4 wind_{h,d}
                + psi_{h,d}
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from pricex.postproc.panel import DAILY_LAG, WEEKLY_LAG, PriceErrorPanel
from pricex.timeseries import HOURS_PER_DAY

logger = logger.bind(module="postproc")

MV_COEFS = ("phi0", "phi1", "phi2", "omega1", "omega2", "omega3", "omega4")


@dataclass(frozen=True, eq=False)
class MvArxParams:
    """
    Coefficients of the 24 hourly regressions.

    Attributes
    ----------
    coefs : ndarray, shape (24, 7)
        Rows per hour in MV_COEFS order
    sigma2 : ndarray, shape (24,)
    degenerate : ndarray of bool, shape (24,)
        Hour's design matrix was rank deficient; the minimum-norm solution is kept
    """

    coefs: np.ndarray
    sigma2: np.ndarray
    degenerate: np.ndarray = None

    def __post_init__(self):
        coefs = np.array(self.coefs, dtype=float)
        if coefs.shape != (HOURS_PER_DAY, len(MV_COEFS)):
            raise ValueError(f"expected one coefficient set per hour, got shape {coefs.shape}")
        if not np.all(np.isfinite(coefs)):
            raise ValueError("coefficients must be finite")
        sigma2 = np.broadcast_to(np.asarray(self.sigma2, dtype=float), (HOURS_PER_DAY,)).copy()
        degenerate = (
            np.zeros(HOURS_PER_DAY, dtype=bool)
            if self.degenerate is None
            else np.asarray(self.degenerate, dtype=bool)
        )
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "degenerate", degenerate)

    @classmethod
    def from_hour_coefficients(cls, **values) -> "MvArxParams":
        """Same coefficients for every hour, e.g. from_hour_coefficients(phi1=1.0)."""
        unknown = set(values) - set(MV_COEFS)
        if unknown:
            raise ValueError(f"unknown coefficient(s) {sorted(unknown)}")
        row = np.array([values.get(name, 0.0) for name in MV_COEFS], dtype=float)
        return cls(coefs=np.tile(row, (HOURS_PER_DAY, 1)), sigma2=0.0)


def _regressors(panel: PriceErrorPanel, rows: np.ndarray, hour: int) -> np.ndarray:
    """Design rows for 0-based hour `hour` on panel rows `rows`."""
    return np.column_stack(
        [
            np.ones(len(rows)),
            panel.eps[rows - DAILY_LAG, hour],
            panel.eps[rows - WEEKLY_LAG, hour],
            panel.eps_min_prev[rows],
            panel.eps_max_prev[rows],
            panel.holidays[rows].astype(float),
            panel.wind[rows, hour],
        ]
    )


def fit_mv(
    panel: PriceErrorPanel, window_weeks: int, last_day: Optional[int] = None
) -> MvArxParams:
    """
    Least-squares fit of the 24 hourly regressions on the window ending on `last_day`.

    Rank-deficient hours (a holiday dummy without holidays in the window, a
    constant wind forecast) are flagged and keep the minimum-norm solution,
    which leaves the coefficients of the redundant columns at zero.
    """
    days = panel.fit_days(7 * window_weeks, last_day)
    rows = np.arange(days.start, days.stop) - panel.first_day
    coefs = np.zeros((HOURS_PER_DAY, len(MV_COEFS)))
    sigma2 = np.zeros(HOURS_PER_DAY)
    degenerate = np.zeros(HOURS_PER_DAY, dtype=bool)

    for h in range(HOURS_PER_DAY):
        X = _regressors(panel, rows, h)
        y = panel.eps[rows, h]
        beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        coefs[h] = beta
        resid = y - X @ beta
        sigma2[h] = float(resid @ resid) / len(y)
        degenerate[h] = rank < X.shape[1]

    if degenerate.any():
        logger.debug(
            f"mv{window_weeks}: rank-deficient design in {int(degenerate.sum())} hour(s)"
        )
    return MvArxParams(coefs=coefs, sigma2=sigma2, degenerate=degenerate)


def forecast_mv(params: MvArxParams, panel: PriceErrorPanel, day: int) -> np.ndarray:
    """One-step error forecast of every hour of `day`."""
    panel.require_history(day)
    row = np.array([panel.row(day)])
    return np.array(
        [float(_regressors(panel, row, h)[0] @ params.coefs[h]) for h in range(HOURS_PER_DAY)]
    )
