"""
Solve a LinearProgram and report duals of every row.

The engine is HiGHS' dual revised simplex through scipy.optimize.linprog, so
solutions are vertices and the duals are those of the terminal basis. Dual
values follow the convention dual = d(objective)/d(rhs): equality duals are
free, duals of <= rows are non-positive under minimisation.
"""

from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Hashable, Optional

import numpy as np
from loguru import logger
from scipy.optimize import linprog

from pricex.config import SolverConfig
from pricex.errors import NumericalFailure, UnknownLabel
from pricex.lp.program import LinearProgram

logger = logger.bind(module="lp")


class LPStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True, eq=False)
class LPSolution:
    status: LPStatus
    x: np.ndarray
    objective_value: float
    duals_eq: dict = field(default_factory=dict)
    duals_ub: dict = field(default_factory=dict)
    eq_marginals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ub_marginals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lower_marginals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    upper_marginals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    degenerate: bool = False
    iterations: int = 0
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL

    def dual(self, label: Hashable) -> float:
        if label in self.duals_eq:
            return self.duals_eq[label]
        if label in self.duals_ub:
            return self.duals_ub[label]
        raise UnknownLabel(f"no constraint row labelled {label!r}")

    def value(self, lp: LinearProgram, label: Hashable) -> float:
        try:
            return float(self.x[lp.var_labels.index(label)])
        except ValueError as e:
            raise UnknownLabel(f"no variable labelled {label!r}") from e

    def dual_objective(self, lp: LinearProgram) -> float:
        """b'y plus the bound terms; equals the primal objective at an optimum."""
        total = float(lp.b_eq @ self.eq_marginals) + float(lp.b_ub @ self.ub_marginals)
        lo = np.isfinite(lp.lower)
        hi = np.isfinite(lp.upper)
        total += float(lp.lower[lo] @ self.lower_marginals[lo])
        total += float(lp.upper[hi] @ self.upper_marginals[hi])
        return total


def _empty_rows(A) -> np.ndarray:
    return np.diff(A.indptr) == 0


def _failed(status: LPStatus, lp: LinearProgram, message: str, iterations=0) -> LPSolution:
    return LPSolution(
        status=status,
        x=np.full(lp.n_vars, np.nan),
        objective_value=np.nan if status is LPStatus.INFEASIBLE else -np.inf,
        message=message,
        iterations=iterations,
    )


def solve(lp: LinearProgram, config: Optional[SolverConfig] = None) -> LPSolution:
    """
    Solve a linear program with the dual revised simplex.

    Rows without non-zero coefficients are removed before the engine sees
    them: a consistent empty row gets dual 0, an inconsistent one makes the
    program infeasible.

    Parameters
    ----------
    lp : LinearProgram
        Program to solve
    config : SolverConfig, optional
        Tolerances and engine switches. Defaults to SolverConfig()

    Returns
    -------
    LPSolution
        Primal vector, objective, duals keyed by row label and the
        degeneracy flag of the terminal basis

    Raises
    ------
    NumericalFailure
        If the engine fails, hits its iteration or time limit, or reports
        numerical difficulties
    """
    config = config or SolverConfig()
    tol = config.primal_tolerance

    eq_empty = _empty_rows(lp.A_eq)
    ub_empty = _empty_rows(lp.A_ub)
    if np.any(np.abs(lp.b_eq[eq_empty]) > tol * max(1.0, np.abs(lp.b_eq).max(initial=0))):
        return _failed(LPStatus.INFEASIBLE, lp, "empty equality row with non-zero right-hand side")
    if np.any(lp.b_ub[ub_empty] < -tol):
        reason = "empty inequality row with negative right-hand side"
        return _failed(LPStatus.INFEASIBLE, lp, reason)

    eq_keep = np.flatnonzero(~eq_empty)
    ub_keep = np.flatnonzero(~ub_empty)
    A_eq = lp.A_eq[eq_keep] if len(eq_keep) else None
    b_eq = lp.b_eq[eq_keep] if len(eq_keep) else None
    A_ub = lp.A_ub[ub_keep] if len(ub_keep) else None
    b_ub = lp.b_ub[ub_keep] if len(ub_keep) else None

    options = {
        "primal_feasibility_tolerance": config.primal_tolerance,
        "dual_feasibility_tolerance": config.dual_tolerance,
        "presolve": config.presolve,
    }
    if config.time_limit is not None:
        options["time_limit"] = config.time_limit

    try:
        res = linprog(
            lp.c,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=np.column_stack([lp.lower, lp.upper]),
            method="highs-ds",
            options=options,
        )
    except Exception as e:
        raise NumericalFailure(
            f"simplex engine failed on a program with {lp.n_vars} variables, "
            f"{lp.n_eq} equality and {lp.n_ub} inequality rows: {e}"
        ) from e

    iterations = int(getattr(res, "nit", 0) or 0)
    if res.status == 2:
        return _failed(LPStatus.INFEASIBLE, lp, res.message, iterations)
    if res.status == 3:
        return _failed(LPStatus.UNBOUNDED, lp, res.message, iterations)
    if res.status != 0:
        raise NumericalFailure(
            f"simplex engine stopped with status {res.status} after {iterations} "
            f"iterations: {res.message}"
        )

    eq_marginals = np.zeros(lp.n_eq)
    ub_marginals = np.zeros(lp.n_ub)
    if len(eq_keep):
        eq_marginals[eq_keep] = res.eqlin.marginals
    if len(ub_keep):
        ub_marginals[ub_keep] = res.ineqlin.marginals

    x = np.asarray(res.x, dtype=float)
    degenerate = _is_degenerate(lp, x, A_ub, b_ub, eq_keep, ub_keep, tol)
    if degenerate:
        logger.debug("terminal basis is degenerate; duals are not unique")

    return LPSolution(
        status=LPStatus.OPTIMAL,
        x=x,
        objective_value=float(res.fun),
        duals_eq=dict(zip(lp.eq_labels, eq_marginals.tolist())),
        duals_ub=dict(zip(lp.ub_labels, ub_marginals.tolist())),
        eq_marginals=eq_marginals,
        ub_marginals=ub_marginals,
        lower_marginals=np.asarray(res.lower.marginals, dtype=float),
        upper_marginals=np.asarray(res.upper.marginals, dtype=float),
        degenerate=degenerate,
        iterations=iterations,
        message=res.message,
    )


def _is_degenerate(lp, x, A_ub, b_ub, eq_keep, ub_keep, tol) -> bool:
    # a vertex with fewer strictly positive basic quantities than rows
    scale = np.maximum(1.0, np.abs(x))
    between = (x - lp.lower > tol * scale) & (lp.upper - x > tol * scale)
    n_basic = int(between.sum())
    if A_ub is not None:
        slack = b_ub - A_ub @ x
        n_basic += int((slack > tol * np.maximum(1.0, np.abs(b_ub))).sum())
    n_rows = len(eq_keep) + len(ub_keep)
    return n_basic < n_rows


def sensitivity(lp: LinearProgram, sol: LPSolution, row_label: Hashable) -> float:
    """Dual value of the row labelled `row_label`."""
    if not sol.is_optimal:
        raise NumericalFailure(f"no duals for a {sol.status.value} program")
    if row_label not in lp.eq_labels and row_label not in lp.ub_labels:
        raise UnknownLabel(f"no constraint row labelled {row_label!r}")
    return sol.dual(row_label)
