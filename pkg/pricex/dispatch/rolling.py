import time
from pathlib import Path
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from typing import Mapping, Optional

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from pricex.config import DispatchConfig
from pricex.density import ScenarioSet, scenario_probabilities
from pricex.dispatch.instance import (
    HORIZON_DAYS,
    ClusterKind,
    DispatchInstance,
    NtcMatrix,
    TechnologyCluster,
    ZoneData,
)
from pricex.dispatch.prices import DispatchResult, solve_dispatch
from pricex.errors import AlignmentError, CoverageError, PricexError
from pricex.market import MarketData, parse_wv_steps
from pricex.timeseries import HOURS_PER_DAY, HOURS_PER_WEEK, HourlySeries, HourStamp

logger = logger.bind(module="dispatch")


@dataclass(frozen=True, eq=False)
class WindowLoad:
    """
    Focal-zone load of one rolling window.

    Parameters
    ----------
    shared : HourlySeries
        Improved load forecast of days d and d+1 (48 hours)
    scenarios : ScenarioSet
        Low, expected and high load of day d+2
    """

    shared: HourlySeries
    scenarios: ScenarioSet

    def __post_init__(self):
        if not self.shared.is_whole_days or self.shared.n_days != 2:
            raise AlignmentError("window load needs exactly the 48 hours of d and d+1")
        if self.scenarios.expected.start != self.shared.start.advance(2 * HOURS_PER_DAY):
            raise AlignmentError("d+2 scenarios must follow the shared load directly")
        if len(self.scenarios.expected) != HOURS_PER_DAY:
            raise AlignmentError("d+2 scenarios must cover 24 hours")

    @property
    def first_day(self) -> int:
        return self.shared.first_day

    @property
    def target_day(self) -> int:
        return self.first_day + 1

    def demand_matrix(self) -> np.ndarray:
        """One row of 72 hourly values per scenario (low, expected, high)."""
        return np.stack(
            [np.concatenate([self.shared.values, s.values]) for s in self.scenarios.as_list()]
        )


def _cluster(market: MarketData, cid: str, row, first_day: int) -> TechnologyCluster:
    n_days = HORIZON_DAYS
    kind = ClusterKind(row["kind"])
    vc_full, vc_min = market.variable_costs(cid, first_day, n_days)
    return TechnologyCluster(
        id=cid,
        zone=row["zone"],
        kind=kind,
        cap=float(row["cap"]),
        vc_full=vc_full,
        vc_minload=vc_min,
        g_min=float(row["g_min"]),
        startup_cost=float(row["startup_cost"]),
        availability=float(row["availability"]),
        outage=market.hourly("outages", cid, first_day, n_days, default=0.0),
        water_value=market.hourly("water_values", cid, first_day, n_days, default=0.0),
        wv_steps=parse_wv_steps(row["wv_steps"]),
        efficiency=float(row["efficiency"]),
        cer=float(row["cer"]),
        res_profile=market.hourly("res_profile", cid, first_day, n_days, default=0.0),
        chp=bool(row["chp"]),
        reserve=bool(row["reserve"]),
    )


def _naive_demand(market: MarketData, zone: str, first_day: int) -> np.ndarray:
    """TSO forecast for d and d+1, actual load one week earlier for d+2."""
    shared = market.hourly("load_tso", zone, first_day, 2)
    lag_day = first_day + 2 - HOURS_PER_WEEK // HOURS_PER_DAY
    lagged = market.hourly("load_actual", zone, lag_day, 1)
    return np.concatenate([shared, lagged])


def naive_window_load(market: MarketData, zone: str, target_day: int) -> WindowLoad:
    """
    Window load built from the raw inputs only, with three identical d+2 scenarios.

    Used when the load pre-processing and density steps are switched off.
    """
    first_day = target_day - 1
    demand = _naive_demand(market, zone, first_day)
    shared = HourlySeries(HourStamp(first_day, 1), demand[: 2 * HOURS_PER_DAY], market.calendar)
    d2 = HourlySeries(HourStamp(first_day + 2, 1), demand[2 * HOURS_PER_DAY :], market.calendar)
    return WindowLoad(shared=shared, scenarios=ScenarioSet(low=d2, expected=d2, high=d2))


def assemble_instance(
    market: MarketData,
    load: WindowLoad,
    focal_zone: str,
    config: Optional[DispatchConfig] = None,
    initial_pon: Optional[dict] = None,
) -> DispatchInstance:
    """
    Dispatch instance of the window starting on day `load.first_day`.

    The focal zone gets the improved load for d and d+1 and the three load
    scenarios for d+2. Every other zone gets its TSO forecast for d and d+1
    and its actual load of one week before d+2, identical in all scenarios.

    Raises
    ------
    CoverageError
        If the market bundle misses a value the window needs
    ModelError
        If the assembled parameters violate an instance invariant
    """
    config = config or DispatchConfig()
    first_day = load.first_day
    if not market.covers(first_day, first_day + HORIZON_DAYS - 1):
        raise CoverageError(f"market data does not cover days {first_day}..{first_day + 2}")
    if focal_zone not in market.zones:
        raise CoverageError(f"focal zone {focal_zone!r} not in market zones {market.zones}")

    probabilities = scenario_probabilities(load.scenarios.weights, config.scenario_weighting)
    n_scen = len(probabilities)

    zones = []
    for zone in market.zones:
        if zone == focal_zone:
            demand = load.demand_matrix()
        else:
            demand = np.tile(_naive_demand(market, zone, first_day), (n_scen, 1))
        primary, sec_pos, sec_neg = market.reserve_requirement(zone)
        zones.append(
            ZoneData(
                zone=zone,
                demand=demand,
                chp_mustrun=market.hourly("chp", zone, first_day, HORIZON_DAYS, default=0.0),
                reserve_primary=primary,
                reserve_sec_pos=sec_pos,
                reserve_sec_neg=sec_neg,
            )
        )

    clusters = [_cluster(market, cid, row, first_day) for cid, row in market.clusters.iterrows()]
    ntc = NtcMatrix(
        {
            (a, b): market.hourly("ntc", f"{a}->{b}", first_day, HORIZON_DAYS)
            for a, b in market.ntc_pairs()
        }
    )
    return DispatchInstance(
        first_day=first_day,
        zones=tuple(zones),
        clusters=tuple(clusters),
        ntc=ntc,
        probabilities=tuple(probabilities),
        voll=config.voll,
        curtc=config.curtc,
        block_hours=config.reserve_block_hours,
        nonanticipativity=config.nonanticipativity,
        initial_pon=initial_pon,
    )


@dataclass
class RollingRun:
    """
    Outcome of a rolling dispatch sweep.

    `prices` is indexed by hour ordinal and has one column per zone; hours
    of failed days are NaN and the reason is kept in `failures`.
    """

    prices: pd.DataFrame
    results: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    @property
    def successful_days(self) -> list[int]:
        return sorted(self.results)

    def price_series(self, zone: str, first_day: int, last_day: int, calendar) -> HourlySeries:
        """Gap-free price estimator series of one zone; raises CoverageError on failed days."""
        failed = [d for d in self.failures if first_day <= d <= last_day]
        if failed:
            raise CoverageError(f"no price estimators for day(s) {sorted(failed)}")
        start = first_day * HOURS_PER_DAY
        index = np.arange(start, (last_day + 1) * HOURS_PER_DAY)
        values = self.prices[zone].reindex(index).to_numpy(dtype=float)
        if not np.all(np.isfinite(values)):
            raise CoverageError(
                f"price estimators of zone {zone} do not cover days {first_day}..{last_day}"
            )
        return HourlySeries(HourStamp(first_day, 1), values, calendar, "EUR/MWh")


def _solve_window(args):
    market, load, focal_zone, config, initial_pon, lp_dir = args
    inst = assemble_instance(market, load, focal_zone, config, initial_pon)
    lp_path = None
    if lp_dir is not None:
        lp_path = Path(lp_dir) / f"window_{market.calendar.date(inst.target_day).isoformat()}.lp"
    return solve_dispatch(inst, config.solver, lp_path)


def rolling_run(
    market: MarketData,
    start_day: int,
    end_day: int,
    load_inputs: Mapping[int, WindowLoad],
    focal_zone: str,
    config: Optional[DispatchConfig] = None,
    workers: int = 1,
    progress: bool = False,
    initial_pon: Optional[dict] = None,
    lp_dir=None,
) -> RollingRun:
    """
    Price estimators for target days `start_day`..`end_day`.

    The window of target day T starts on day T-1. Days fail independently:
    a missing load input, a coverage gap or a failed solve leaves a NaN gap
    and a diagnostic, and the sweep continues. With a single worker the
    running capacity at the end of each window's first day seeds the
    startup tracking of the next window; parallel workers solve every
    window without that carry-over.

    Parameters
    ----------
    market : MarketData
    start_day, end_day : int
        First and last target day, inclusive
    load_inputs : mapping of target day to WindowLoad
    focal_zone : str
    config : DispatchConfig, optional
    workers : int, default=1
        Worker processes for the sweep
    progress : bool, default=False
        Show a progress bar
    initial_pon : dict, optional
        Running capacity per cluster before the first window, as carried
        over from a preceding sweep (single worker only)
    lp_dir : path, optional
        Directory receiving one LP file per solved window

    Returns
    -------
    RollingRun
    """
    config = config or DispatchConfig()
    t0 = time.time()
    days = list(range(start_day, end_day + 1))
    logger.info(f"rolling dispatch for target days {start_day}..{end_day} ({len(days)} days)")

    index = pd.RangeIndex(start_day * HOURS_PER_DAY, (end_day + 1) * HOURS_PER_DAY, name="ordinal")
    prices = pd.DataFrame(np.nan, index=index, columns=list(market.zones))
    run = RollingRun(prices=prices)

    def _record(day, result: DispatchResult):
        run.results[day] = result
        rows = np.arange(day * HOURS_PER_DAY, (day + 1) * HOURS_PER_DAY)
        for zone in market.zones:
            run.prices.loc[rows, zone] = result.prices[zone].to_numpy()

    def _fail(day, e: Exception):
        run.failures[day] = str(e)
        logger.warning(f"target day {day} failed: {e}")

    if workers > 1:
        tasks = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for day in days:
                if day not in load_inputs:
                    _fail(day, CoverageError(f"no load input for target day {day}"))
                    continue
                args = (market, load_inputs[day], focal_zone, config, None, lp_dir)
                tasks[day] = pool.submit(_solve_window, args)
            for day in tqdm(sorted(tasks), disable=not progress, desc="dispatch"):
                try:
                    _record(day, tasks[day].result())
                except PricexError as e:
                    _fail(day, e)
    else:
        for day in tqdm(days, disable=not progress, desc="dispatch"):
            try:
                if day not in load_inputs:
                    raise CoverageError(f"no load input for target day {day}")
                args = (market, load_inputs[day], focal_zone, config, initial_pon, lp_dir)
                result = _solve_window(args)
            except PricexError as e:
                _fail(day, e)
                initial_pon = None
                continue
            _record(day, result)
            initial_pon = result.terminal_pon or None

    logger.success(
        f"rolling dispatch finished in {time.time() - t0:.1f} s: "
        f"{len(run.results)} day(s) solved, {len(run.failures)} failed"
    )
    return run
