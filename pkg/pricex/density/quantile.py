"""
Linear quantile regression solved exactly as a linear program

    min  sum_i q u+_i + (1 - q) u-_i
    s.t. X_i beta + u+_i - u-_i = y_i,   u+, u- >= 0,   beta free
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from loguru import logger

from pricex.config import SolverConfig
from pricex.errors import (
    Degenerate,
    DimensionMismatch,
    NumericalFailure,
    OutOfRange,
    TooFewDays,
)
from pricex.lp import LinearProgram, solve

logger = logger.bind(module="density")


@dataclass(frozen=True, eq=False)
class QuantileModel:
    q: float
    beta: np.ndarray
    dropped: tuple = ()
    loss: float = np.nan

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise OutOfRange(f"quantile level must lie in (0, 1), got {self.q}")
        beta = np.array(self.beta, dtype=float)
        if not np.all(np.isfinite(beta)):
            raise ValueError("quantile coefficients must be finite")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)

    @property
    def degenerate(self) -> bool:
        return len(self.dropped) > 0

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.beta):
            raise DimensionMismatch(
                f"regressors have {X.shape[1]} columns, model has {len(self.beta)} coefficients"
            )
        return X @ self.beta


def pinball_loss(y, pred, q: float) -> np.ndarray:
    """Elementwise pinball loss u * (q - 1{u < 0}) with u = y - pred."""
    u = np.asarray(y, dtype=float) - np.asarray(pred, dtype=float)
    return u * (q - (u < 0))


def independent_columns(X: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Indices of a maximal set of linearly independent columns (pivoted QR)."""
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        return np.zeros(0, dtype=int)
    rank = int((diag > rtol * diag[0]).sum())
    return np.sort(piv[:rank])


def fit_quantile_regression(
    X,
    y,
    q: float,
    solver: SolverConfig | None = None,
    strict: bool = False,
) -> QuantileModel:
    """
    Fit the q-th conditional quantile by minimising the pinball loss.

    Parameters
    ----------
    X : array-like, shape (n, k)
        Design matrix, including the intercept column if one is wanted
    y : array-like, shape (n,)
        Observations
    q : float
        Quantile level in (0, 1)
    solver : SolverConfig, optional
        LP solver settings
    strict : bool, default=False
        Raise Degenerate on a rank-deficient design instead of dropping
        the dependent columns

    Returns
    -------
    QuantileModel
        Coefficients on the original scale; dropped columns get coefficient 0
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if not 0 < q < 1:
        raise OutOfRange(f"quantile level must lie in (0, 1), got {q}")
    if len(y) != n:
        raise DimensionMismatch(f"{n} design rows but {len(y)} observations")
    if n < k + 1:
        raise TooFewDays(f"need at least {k + 1} observations for {k} regressors, got {n}")

    keep = independent_columns(X)
    dropped = tuple(int(j) for j in np.setdiff1d(np.arange(k), keep))
    if dropped:
        message = f"design matrix has rank {len(keep)} < {k}; dropping columns {list(dropped)}"
        if strict:
            raise Degenerate(message)
        logger.warning(message)

    Xk = X[:, keep]
    scale = np.abs(Xk).max(axis=0)
    scale[scale == 0] = 1.0
    Xs = Xk / scale
    m = len(keep)

    eye = sp.identity(n, format="csr")
    A_eq = sp.hstack([sp.csr_matrix(Xs), eye, -eye], format="csr")
    lp = LinearProgram(
        c=np.concatenate([np.zeros(m), np.full(n, q), np.full(n, 1 - q)]),
        A_eq=A_eq,
        b_eq=y,
        A_ub=sp.csr_matrix((0, m + 2 * n)),
        b_ub=np.zeros(0),
        lower=np.concatenate([np.full(m, -np.inf), np.zeros(2 * n)]),
        upper=np.full(m + 2 * n, np.inf),
        eq_labels=tuple(range(n)),
        ub_labels=(),
        var_labels=tuple(range(m + 2 * n)),
    )
    sol = solve(lp, solver)
    if not sol.is_optimal:
        raise NumericalFailure(f"quantile regression LP ended {sol.status.value}")

    beta = np.zeros(k)
    beta[keep] = sol.x[:m] / scale
    loss = float(pinball_loss(y, X @ beta, q).sum())
    return QuantileModel(q=float(q), beta=beta, dropped=dropped, loss=loss)


def predict_quantile(model: QuantileModel, x) -> float:
    """Inner product of one regressor row with the coefficients."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) != len(model.beta):
        raise DimensionMismatch(
            f"regressor row of length {x.size}, model has {len(model.beta)} coefficients"
        )
    return float(x @ model.beta)
