# tests/unit/test_dispatch.py

import numpy as np
import pandas as pd
import pytest

from pricex.config import DispatchConfig
from pricex.density import ScenarioSet
from pricex.dispatch import (
    HORIZON_HOURS,
    ClusterKind,
    DispatchInstance,
    NtcMatrix,
    TechnologyCluster,
    WindowLoad,
    ZoneData,
    build_lp,
    extract_prices,
    rolling_run,
    solve_dispatch,
)
from pricex.errors import ModelError, SolveFailed
from pricex.lp import LPStatus, solve
from pricex.lp.solver import LPSolution
from pricex.market import MarketData
from pricex.timeseries import HourlySeries, HourStamp


def thermal(cid, vc, cap, zone="A", **kwargs):
    return TechnologyCluster(
        id=cid, zone=zone, kind=ClusterKind.THERMAL, cap=cap, vc_full=vc, **kwargs
    )


def one_zone(demand, clusters, probabilities=(1.0,), **kwargs):
    demand = np.broadcast_to(np.asarray(demand, dtype=float), (HORIZON_HOURS,))
    rows = np.tile(demand, (len(probabilities), 1))
    return DispatchInstance(
        first_day=10,
        zones=(ZoneData("A", rows),),
        clusters=tuple(clusters),
        probabilities=probabilities,
        **kwargs,
    )


def target_prices(inst, zone="A"):
    return solve_dispatch(inst).prices[zone].to_numpy()


def test_single_cluster_sets_price():
    prices = target_prices(one_zone(60, [thermal("coal", 50, 100)]))
    assert prices.shape == (24,)
    np.testing.assert_allclose(prices, 50, atol=1e-6)


def test_scarcity_prices_at_voll():
    result = solve_dispatch(one_zone(150, [thermal("coal", 50, 100)]))
    np.testing.assert_allclose(result.prices["A"], 3000, atol=1e-6)
    np.testing.assert_allclose(result.shed["A"], 50, atol=1e-6)


def test_renewable_surplus_prices_at_minus_curtailment_cost():
    wind = TechnologyCluster(
        id="wind", zone="A", kind=ClusterKind.RENEWABLE, cap=100, res_profile=1.0
    )
    result = solve_dispatch(one_zone(50, [wind]))
    np.testing.assert_allclose(result.prices["A"], -20, atol=1e-6)
    np.testing.assert_allclose(result.curtailment["A"], 50, atol=1e-6)


def test_two_cluster_merit_order():
    demand = np.tile(np.linspace(30, 90, 24), 3)
    demand[np.isclose(demand, 50)] = 49
    inst = one_zone(demand, [thermal("base", 20, 50), thermal("peak", 70, 100)])
    prices = target_prices(inst)
    day = demand[24:48]
    np.testing.assert_allclose(prices[day < 50], 20, atol=1e-6)
    np.testing.assert_allclose(prices[day > 50], 70, atol=1e-6)


def test_startup_cost_loads_the_spike_hour():
    demand = np.full(HORIZON_HOURS, 40.0)
    demand[30] = 60  # hour 7 of the target day
    peaker = thermal("peak", 70, 100, g_min=0.4, startup_cost=10)
    result = solve_dispatch(one_zone(demand, [thermal("base", 20, 50), peaker]))
    prices = result.prices["A"].to_numpy()

    assert prices[6] == pytest.approx(80, abs=1e-6)
    np.testing.assert_allclose(np.delete(prices, 6), 20, atol=1e-6)
    # price markup over fuel cost on the marginal increment recovers the startup cost
    started = result.startups["peak"].sum()
    assert (prices[6] - 70) * result.generation["peak"][30] == pytest.approx(
        10 * started, abs=1e-4
    )


def test_storage_level_is_fixed_at_the_horizon_boundaries():
    demand = np.tile(np.r_[np.full(12, 80.0), np.full(12, 160.0)], 3)
    storage = TechnologyCluster(
        id="psp", zone="A", kind=ClusterKind.STORAGE_MID, cap=20, efficiency=0.75, cer=1 / 9
    )
    inst = one_zone(
        demand,
        [thermal("base", 10, 120), thermal("peak", 100, 200), storage],
        probabilities=(1 / 6, 2 / 3, 1 / 6),
    )
    result = solve_dispatch(inst)
    level = result.storage["psp"]
    assert level[0] == pytest.approx(0.3 * 180, abs=1e-7)
    assert level[HORIZON_HOURS - 1] == pytest.approx(0.3 * 180, abs=1e-7)
    assert level.max() <= 180 + 1e-7


def test_first_hour_has_no_net_storage_flow():
    # expensive first hour: storage would discharge if the level were free
    demand = np.full(HORIZON_HOURS, 80.0)
    demand[0] = 160
    storage = TechnologyCluster(
        id="psp", zone="A", kind=ClusterKind.STORAGE_MID, cap=20, efficiency=0.75, cer=1 / 9
    )
    inst = one_zone(demand, [thermal("base", 10, 120), thermal("peak", 100, 200), storage])
    lp = build_lp(inst)
    sol = solve(lp)
    labels = enumerate(lp.var_labels)
    first = {label[0]: sol.x[k] for k, label in labels if label[1:3] == ("psp", 0)}
    assert first["sl"] == pytest.approx(0.3 * 180, abs=1e-7)
    assert first["g"] - 0.75 * first["cm"] == pytest.approx(0.0, abs=1e-7)


def test_energy_balance_holds_at_every_node():
    demand = np.tile(np.r_[np.full(12, 80.0), np.full(12, 160.0)], 3)
    storage = TechnologyCluster(id="psp", zone="A", kind=ClusterKind.STORAGE_MID, cap=20)
    wind = TechnologyCluster(
        id="wind", zone="A", kind=ClusterKind.RENEWABLE, cap=50, res_profile=np.linspace(0, 1, 72)
    )
    inst = one_zone(demand, [thermal("base", 10, 120), thermal("peak", 100, 200), storage, wind])
    lp = build_lp(inst)
    sol = solve(lp)
    residual = lp.A_eq @ sol.x - lp.b_eq
    balance = [i for i, label in enumerate(lp.eq_labels) if label[0] == "balance"]
    assert len(balance) == HORIZON_HOURS
    assert np.abs(residual[balance]).max() <= 1e-6 * demand.max()


@pytest.mark.parametrize("seed", range(50))
def test_prices_match_sort_and_fill_oracle(seed):
    rng = np.random.default_rng(seed)
    n = rng.integers(1, 6)
    vcs = rng.choice(np.arange(5, 200), size=n, replace=False).astype(float)
    caps = rng.uniform(20, 80, n)
    clusters = [thermal(f"c{i}", vc, cap) for i, (vc, cap) in enumerate(zip(vcs, caps))]
    demand = rng.uniform(0.05, 0.95, HORIZON_HOURS) * caps.sum()

    order = np.argsort(vcs)
    stack = np.cumsum(caps[order])
    expected = []
    for load in demand[24:48]:
        expected.append(vcs[order][np.searchsorted(stack, load)])

    prices = target_prices(one_zone(demand, clusters))
    np.testing.assert_allclose(prices, expected, atol=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_prices_stay_within_curtailment_cost_and_voll(seed):
    rng = np.random.default_rng(100 + seed)
    demand = rng.uniform(0, 400, HORIZON_HOURS)
    wind = TechnologyCluster(
        id="wind", zone="A", kind=ClusterKind.RENEWABLE, cap=200, res_profile=rng.uniform(0, 1, 72)
    )
    storage = TechnologyCluster(id="psp", zone="A", kind=ClusterKind.STORAGE_MID, cap=30)
    clusters = [
        thermal("base", 15, 100, g_min=0.3, vc_minload=25, startup_cost=20),
        thermal("peak", 90, 80),
        wind,
        storage,
    ]
    prices = target_prices(one_zone(demand, clusters))
    assert np.all(prices >= -20 - 1e-6)
    assert np.all(prices <= 3000 + 1e-6)


def test_scenario_indexed_variables_give_the_same_prices():
    clusters = [thermal("base", 20, 50), thermal("peak", 70, 100)]
    demand = np.tile(np.linspace(30, 90, 24), 3)
    demand[np.isclose(demand, 50)] = 49
    probs = (1 / 6, 2 / 3, 1 / 6)
    shared = target_prices(one_zone(demand, clusters, probabilities=probs))
    indexed = target_prices(
        one_zone(demand, clusters, probabilities=probs, nonanticipativity="scenario")
    )
    np.testing.assert_allclose(indexed, shared, atol=1e-6)


def test_raising_the_high_scenario_never_lowers_target_prices():
    storage = TechnologyCluster(
        id="psp", zone="A", kind=ClusterKind.STORAGE_MID, cap=10, efficiency=0.8
    )
    clusters = [thermal("base", 10, 100), thermal("peak", 80, 200), storage]
    probs = (1 / 6, 2 / 3, 1 / 6)

    def run(high):
        demand = np.full((3, HORIZON_HOURS), 60.0)
        demand[2, 48:] = high
        inst = DispatchInstance(
            first_day=0,
            zones=(ZoneData("A", demand),),
            clusters=tuple(clusters),
            probabilities=probs,
        )
        return target_prices(inst)

    assert np.all(run(180) >= run(150) - 1e-6)


def test_chp_must_run_forces_generation():
    chp = thermal("chp", 60, 50, chp=True)
    inst = DispatchInstance(
        first_day=0,
        zones=(ZoneData("A", np.full((1, HORIZON_HOURS), 100.0), chp_mustrun=30),),
        clusters=(thermal("base", 10, 200), chp),
    )
    result = solve_dispatch(inst)
    np.testing.assert_allclose(result.generation["chp"], 30, atol=1e-6)
    np.testing.assert_allclose(result.prices["A"], 10, atol=1e-6)


def test_chp_must_run_above_capacity_is_rejected():
    with pytest.raises(ModelError):
        DispatchInstance(
            first_day=0,
            zones=(ZoneData("A", np.full((1, HORIZON_HOURS), 100.0), chp_mustrun=80),),
            clusters=(thermal("chp", 60, 50, chp=True),),
        )


@pytest.mark.parametrize("ntc, price_b", [(30, 90), (100, 10)])
def test_transfer_capacity_couples_zones(ntc, price_b):
    demand = np.full((1, HORIZON_HOURS), 50.0)
    inst = DispatchInstance(
        first_day=0,
        zones=(ZoneData("A", demand), ZoneData("B", demand)),
        clusters=(thermal("cheap", 10, 200, zone="A"), thermal("dear", 90, 200, zone="B")),
        ntc=NtcMatrix({("A", "B"): ntc}),
    )
    result = solve_dispatch(inst)
    np.testing.assert_allclose(result.prices["A"], 10, atol=1e-6)
    np.testing.assert_allclose(result.prices["B"], price_b, atol=1e-6)
    np.testing.assert_allclose(result.flows["A->B"], min(ntc, 50), atol=1e-6)


def test_reserve_is_provided_when_capacity_allows():
    inst = DispatchInstance(
        first_day=0,
        zones=(ZoneData("A", np.full((1, HORIZON_HOURS), 60.0), reserve_primary=20),),
        clusters=(thermal("coal", 50, 100, reserve=True),),
    )
    lp = build_lp(inst)
    sol = solve(lp)
    shortfalls = [
        sol.x[i] for i, label in enumerate(lp.var_labels) if label[0] == "short"
    ]
    assert len(shortfalls) == HORIZON_HOURS // 4 * 3
    np.testing.assert_allclose(shortfalls, 0, atol=1e-6)
    np.testing.assert_allclose(extract_prices(inst, lp, sol).prices["A"], 50, atol=1e-6)


def test_instance_validation():
    demand = np.full((3, HORIZON_HOURS), 60.0)
    with pytest.raises(ModelError):
        DispatchInstance(0, (ZoneData("A", demand),), (), probabilities=(0.5, 0.5, 0.5))
    with pytest.raises(ModelError):
        DispatchInstance(0, (ZoneData("A", demand),), (), probabilities=(1 / 3,) * 3, block_hours=5)
    skewed = demand.copy()
    skewed[1, 10] += 1
    with pytest.raises(ModelError):
        ZoneData("A", skewed)
    with pytest.raises(ModelError):
        thermal("x", 50, 100, g_min=1.0)
    with pytest.raises(ModelError):
        thermal("x", 50, 100, outage=120)


def test_extract_prices_rejects_failed_solutions():
    inst = one_zone(60, [thermal("coal", 50, 100)])
    failed = LPSolution(status=LPStatus.INFEASIBLE, x=np.zeros(0), objective_value=np.nan)
    with pytest.raises(SolveFailed):
        extract_prices(inst, build_lp(inst), failed)


# rolling sweep


def toy_market(calendar, daily_load):
    n_days = len(daily_load)
    load = pd.DataFrame(
        {"A": np.repeat(np.asarray(daily_load, dtype=float), 24)},
        index=pd.RangeIndex(n_days * 24, name="ordinal"),
    )
    clusters = pd.DataFrame(
        {
            "zone": ["A", "A"],
            "kind": ["thermal", "thermal"],
            "cap": [50.0, 100.0],
            "vc": [20.0, 70.0],
        },
        index=pd.Index(["base", "peak"], name="id"),
    )
    return MarketData(
        calendar=calendar,
        zones=("A",),
        clusters=clusters,
        fuel_prices=pd.DataFrame(),
        reserves=pd.DataFrame(),
        load_actual=load,
        load_tso=load.copy(),
    )


def window_loads(market, calendar, days):
    loads = {}
    actual = market.load_actual["A"].to_numpy()
    for target in days:
        d = target - 1
        shared = HourlySeries(HourStamp(d, 1), actual[d * 24 : (d + 2) * 24], calendar)
        third = HourlySeries(HourStamp(d + 2, 1), actual[(d + 2) * 24 : (d + 3) * 24], calendar)
        scenarios = ScenarioSet(
            third.with_values(third.values - 5), third, third.with_values(third.values + 5)
        )
        loads[target] = WindowLoad(shared, scenarios)
    return loads


def test_rolling_run_on_constant_system(calendar):
    market = toy_market(calendar, [40] * 10)
    run = rolling_run(market, 2, 6, window_loads(market, calendar, range(2, 7)), "A")
    assert run.successful_days == [2, 3, 4, 5, 6]
    np.testing.assert_allclose(run.prices["A"], 20, atol=1e-6)
    series = run.price_series("A", 2, 6, calendar)
    assert series.start == HourStamp(2, 1)
    assert len(series) == 5 * 24


def test_rolling_run_switches_regime_on_the_crossing_day(calendar):
    market = toy_market(calendar, [40] * 5 + [60] * 5)
    run = rolling_run(market, 2, 7, window_loads(market, calendar, range(2, 8)), "A")
    daily = run.prices["A"].to_numpy().reshape(-1, 24)
    np.testing.assert_allclose(daily[:3], 20, atol=1e-6)  # target days 2..4
    np.testing.assert_allclose(daily[3:], 70, atol=1e-6)  # target days 5..7


def test_rolling_run_isolates_failed_days(calendar):
    market = toy_market(calendar, [40, 45, 35, 60, 40, 30, 55, 45, 40, 40])
    loads = window_loads(market, calendar, range(2, 8))
    full = rolling_run(market, 2, 7, loads, "A")

    del loads[4]
    gapped = rolling_run(market, 2, 7, loads, "A")
    assert list(gapped.failures) == [4]
    day4 = gapped.prices.loc[4 * 24 : 5 * 24 - 1, "A"]
    assert day4.isna().all()
    others = gapped.prices.drop(index=day4.index)
    pd.testing.assert_frame_equal(others, full.prices.drop(index=day4.index))


def test_rolling_run_passes_configuration(calendar):
    market = toy_market(calendar, [40] * 10)
    config = DispatchConfig(voll=500)
    loads = window_loads(market, calendar, [3])
    market.clusters.loc["base", "cap"] = 10.0
    market.clusters.loc["peak", "cap"] = 10.0
    run = rolling_run(market, 3, 3, loads, "A", config)
    np.testing.assert_allclose(run.prices["A"].dropna(), 500, atol=1e-6)
