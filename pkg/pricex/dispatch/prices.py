from collections import defaultdict
from dataclasses import dataclass
from dataclasses import field
from typing import Optional

import numpy as np
import pandas as pd
from loguru import logger

from pricex.config import SolverConfig
from pricex.dispatch.instance import HORIZON_HOURS, TARGET_HOURS, DispatchInstance
from pricex.dispatch.model import build_lp
from pricex.errors import SolveFailed
from pricex.lp import LinearProgram, LPSolution, solve, write_lp

logger = logger.bind(module="dispatch")


@dataclass(frozen=True, eq=False)
class DispatchResult:
    """
    Price estimators of the target day and primal summaries of one window.

    Attributes
    ----------
    target_day : int
    prices : pd.DataFrame
        24 hours (index 1..24) by zone, EUR/MWh
    generation, storage, startups : pd.DataFrame
        72 hours (index 0..71) by cluster id; d+2 values are probability-weighted
    flows : pd.DataFrame
        72 hours by "from->to"
    shed, curtailment : pd.DataFrame
        72 hours by zone; curtailment includes renewable curtailment and surplus absorption
    objective : float
    degenerate : bool
        Terminal basis degenerate, so the duals are one of several valid choices
    iterations : int
    terminal_pon : dict
        Running capacity per thermal cluster in the last hour of day d, the
        hour preceding the next rolling window
    """

    target_day: int
    prices: pd.DataFrame
    generation: pd.DataFrame
    storage: pd.DataFrame
    startups: pd.DataFrame
    flows: pd.DataFrame
    shed: pd.DataFrame
    curtailment: pd.DataFrame
    objective: float
    degenerate: bool = False
    iterations: int = 0
    terminal_pon: dict = field(default_factory=dict)

    def diagnostics(self) -> dict:
        return {
            "target_day": self.target_day,
            "objective": self.objective,
            "degenerate": self.degenerate,
            "iterations": self.iterations,
            "shed_mwh": float(self.shed.to_numpy().sum()),
            "curtailed_mwh": float(self.curtailment.to_numpy().sum()),
        }


def _weight(inst: DispatchInstance, s) -> float:
    return 1.0 if s is None else inst.probabilities[s]


def _summaries(inst: DispatchInstance, lp: LinearProgram, x: np.ndarray) -> dict:
    zone_of = {c.id: c.zone for c in inst.clusters}
    tables = defaultdict(lambda: defaultdict(lambda: np.zeros(HORIZON_HOURS)))
    for value, label in zip(x, lp.var_labels):
        family = label[0]
        t, s = label[-2], label[-1]
        if family in ("pcr", "scr_pos", "scr_neg", "short"):
            continue
        w = _weight(inst, s) * value
        if family in ("g", "gstep"):
            tables["generation"][label[1]][t] += w
        elif family == "sl":
            tables["storage"][label[1]][t] += w
        elif family == "su":
            tables["startups"][label[1]][t] += w
        elif family == "flow":
            tables["flows"][f"{label[1]}->{label[2]}"][t] += w
        elif family == "shed":
            tables["shed"][label[1]][t] += w
        elif family == "surplus":
            tables["curtailment"][label[1]][t] += w
        elif family == "curt":
            tables["curtailment"][zone_of[label[1]]][t] += w

    index = pd.RangeIndex(HORIZON_HOURS, name="t")
    return {
        name: pd.DataFrame(dict(tables[name]), index=index)
        for name in ("generation", "storage", "startups", "flows", "shed", "curtailment")
    }


def _terminal_pon(inst: DispatchInstance, lp: LinearProgram, x: np.ndarray) -> dict:
    last = TARGET_HOURS.start - 1
    pon = {}
    for value, label in zip(x, lp.var_labels):
        if label[0] == "pon" and label[2] == last and label[3] in (None, 0):
            pon[label[1]] = float(value)
    return pon


def extract_prices(inst: DispatchInstance, lp: LinearProgram, sol: LPSolution) -> DispatchResult:
    """
    Price estimators of the target day from the energy balance duals.

    With shared variables the balance row of each target-day hour exists
    once and its dual is the marginal system cost. With scenario-indexed
    variables the scenario duals already carry their probability and are
    summed.

    Raises
    ------
    SolveFailed
        If the solution is not optimal or a price is not finite
    """
    if not sol.is_optimal:
        raise SolveFailed(
            f"dispatch for target day {inst.target_day} ended {sol.status.value}: {sol.message}"
        )

    prices = {}
    for zone in inst.zones:
        hourly = []
        for t in TARGET_HOURS:
            if inst.nonanticipativity == "shared":
                hourly.append(sol.dual(("balance", zone.zone, t, None)))
            else:
                hourly.append(
                    sum(sol.dual(("balance", zone.zone, t, s)) for s in range(inst.n_scenarios))
                )
        prices[zone.zone] = hourly
    prices = pd.DataFrame(prices, index=pd.RangeIndex(1, 25, name="hour"))
    if not np.all(np.isfinite(prices.to_numpy())):
        raise SolveFailed(f"non-finite price estimator on target day {inst.target_day}")
    if sol.degenerate:
        logger.debug(f"degenerate basis on target day {inst.target_day}; duals not unique")

    return DispatchResult(
        target_day=inst.target_day,
        prices=prices,
        objective=sol.objective_value,
        degenerate=sol.degenerate,
        iterations=sol.iterations,
        terminal_pon=_terminal_pon(inst, lp, sol.x),
        **_summaries(inst, lp, sol.x),
    )


def solve_dispatch(
    inst: DispatchInstance, solver: Optional[SolverConfig] = None, lp_path=None
) -> DispatchResult:
    """Build, solve and read out one rolling window, dumping the LP to `lp_path` if given."""
    lp = build_lp(inst)
    if lp_path is not None:
        write_lp(lp, lp_path)
        logger.debug(f"dispatch LP written to {lp_path}")
    sol = solve(lp, solver)
    if not sol.is_optimal:
        raise SolveFailed(
            f"dispatch LP for target day {inst.target_day} is {sol.status.value}: {sol.message}"
        )
    return extract_prices(inst, lp, sol)
