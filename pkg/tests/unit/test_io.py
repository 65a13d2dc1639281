# tests/unit/test_io.py

import numpy as np
import pandas as pd
import pytest

from pricex.density import ScenarioSet
from pricex.dispatch import WindowLoad
from pricex.errors import CoverageError, SchemaError
from pricex.io import RunManifest, ingest, merit_order_prices, parse_timestamps, simulate_bundle
from pricex.io.ingest import split_header
from pricex.io.manifest import DONE, FAILED, PENDING
from pricex.io.results import read_window, window_frame, write_frame
from pricex.timeseries import HourlySeries, HourStamp

N_DAYS = 21


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    return simulate_bundle(tmp_path_factory.mktemp("bundle"), seed=3, n_days=N_DAYS)


@pytest.fixture
def bundle_copy(bundle, tmp_path):
    out = tmp_path / "bundle"
    out.mkdir()
    for path in bundle.iterdir():
        (out / path.name).write_bytes(path.read_bytes())
    return out


def read_raw(path):
    return pd.read_csv(path, dtype=str)


def write_raw(frame, path):
    frame.to_csv(path, index=False, lineterminator="\n")


def test_split_header():
    assert split_header("load [MWh]") == ("load", "MWh")
    assert split_header("co2_factor [t/MWh_th]") == ("co2_factor", "t/MWh_th")
    assert split_header("zone") == ("zone", None)


def test_parse_timestamps_ignores_offsets():
    stamps = parse_timestamps(
        pd.Series(["2018-03-25T01:00+01:00", "2018-03-25 03:30", "not a date"])
    )
    assert stamps[0] == pd.Timestamp("2018-03-25 01:00")
    assert stamps[1] == pd.Timestamp("2018-03-25 03:00")
    assert pd.isna(stamps[2])


def test_fixture_bundle_loads_clean(bundle):
    market = ingest(bundle)
    assert market.zones == ("A", "B")
    assert market.first_day == 0
    assert market.last_day == N_DAYS - 1
    assert market.calendar.date(0).isoformat() == "2018-01-01"
    # new year's day is a holiday of the fixture calendar
    assert market.calendar.is_holiday(0)
    assert sorted(market.ntc_pairs()) == [("A", "B"), ("B", "A")]
    assert len(market.clusters) == 2 * 11
    assert np.all(np.isfinite(market.load_actual.to_numpy()))
    assert market.fuel_prices.index[0] == 0


def test_bundle_is_deterministic(bundle, tmp_path):
    again = simulate_bundle(tmp_path / "again", seed=3, n_days=N_DAYS)
    for path in bundle.iterdir():
        assert (again / path.name).read_bytes() == path.read_bytes(), path.name


def test_repeated_hour_is_averaged(bundle_copy):
    path = bundle_copy / "load_actual.csv"
    raw = read_raw(path)
    row = raw[(raw["timestamp"] == "2018-01-10T02:00") & (raw["zone"] == "A")]
    original = float(row["load [MWh]"].iloc[0])
    extra = row.copy()
    extra["load [MWh]"] = str(original + 1000.0)
    write_raw(pd.concat([raw, extra], ignore_index=True), path)

    market = ingest(bundle_copy)
    assert len(market.load_actual) == N_DAYS * 24
    assert market.load_actual.loc[9 * 24 + 2, "A"] == pytest.approx(original + 500.0)


def test_missing_hour_is_interpolated(bundle_copy):
    path = bundle_copy / "load_actual.csv"
    raw = read_raw(path)
    zone_a = raw[raw["zone"] == "A"].set_index("timestamp")["load [MWh]"].astype(float)
    before, after = zone_a["2018-01-10T01:00"], zone_a["2018-01-10T03:00"]
    drop = (raw["timestamp"] == "2018-01-10T02:00") & (raw["zone"] == "A")
    write_raw(raw[~drop], path)

    market = ingest(bundle_copy)
    assert market.load_actual.loc[9 * 24 + 2, "A"] == pytest.approx((before + after) / 2)


def test_long_gap_is_a_coverage_error(bundle_copy):
    path = bundle_copy / "load_tso_forecast.csv"
    raw = read_raw(path)
    gap = [f"2018-01-10T{h:02d}:00" for h in range(2, 6)]
    write_raw(raw[~(raw["timestamp"].isin(gap) & (raw["zone"] == "B"))], path)

    with pytest.raises(CoverageError, match="gap of 4 hours"):
        ingest(bundle_copy)


def test_missing_ntc_islands_the_zones(bundle_copy):
    (bundle_copy / "ntc.csv").unlink()
    market = ingest(bundle_copy)
    assert market.ntc.empty
    assert market.ntc_pairs() == []


def test_schema_violations_are_reported_together(bundle_copy):
    path = bundle_copy / "load_tso_forecast.csv"
    write_raw(read_raw(path).rename(columns={"load [MWh]": "load [GWh]"}), path)
    path = bundle_copy / "wind_forecast.csv"
    write_raw(read_raw(path).drop(columns="zone"), path)
    (bundle_copy / "holidays.csv").unlink()

    with pytest.raises(SchemaError) as info:
        ingest(bundle_copy)
    violations = info.value.violations
    assert len(violations) == 3
    assert any("[GWh]" in v for v in violations)
    assert any("wind_forecast" in v and "'zone'" in v for v in violations)
    assert any("holidays.csv" in v for v in violations)


def test_unknown_cluster_kind(bundle_copy):
    path = bundle_copy / "clusters.csv"
    raw = read_raw(path)
    raw.loc[0, "kind"] = "fusion"
    write_raw(raw, path)
    with pytest.raises(SchemaError, match="fusion"):
        ingest(bundle_copy)


def test_merit_order_prices():
    costs = np.array([[30.0, 10.0]] * 5)
    available = np.array([[50.0, 50.0]] * 5)
    residual = np.array([40.0, 60.0, 100.0, 120.0, -5.0])
    prices = merit_order_prices(costs, available, residual, voll=3000, curtc=20)
    np.testing.assert_allclose(prices, [10.0, 30.0, 30.0, 3000.0, -20.0])


def test_manifest_round_trip(tmp_path):
    manifest = RunManifest(config_hash="abc")
    manifest.register("2018-01-05", ["preprocess", "dispatch"])
    assert manifest.status("2018-01-05", "dispatch") == PENDING

    output = tmp_path / "dispatch" / "prices_2018-01-05.csv"
    output.parent.mkdir()
    output.write_text("hour,A\n")
    manifest.mark("2018-01-05", "dispatch", DONE, output="dispatch/prices_2018-01-05.csv")
    manifest.mark("2018-01-05", "preprocess", FAILED, error="did not converge")
    manifest.save(tmp_path)

    loaded = RunManifest.open(tmp_path, "abc")
    assert loaded.to_dict() == manifest.to_dict()
    assert loaded.is_done("2018-01-05", "dispatch", tmp_path)
    assert loaded.failure_share(["2018-01-05"], ["preprocess"]) == 1.0

    output.unlink()
    assert not loaded.is_done("2018-01-05", "dispatch", tmp_path)


def test_manifest_restarts_on_new_config(tmp_path):
    manifest = RunManifest(config_hash="abc")
    manifest.mark("2018-01-05", "dispatch", DONE)
    manifest.save(tmp_path)
    fresh = RunManifest.open(tmp_path, "def")
    assert fresh.config_hash == "def"
    assert fresh.days == {}


def test_window_file_round_trip(calendar, tmp_path):
    shared = HourlySeries(HourStamp(4, 1), np.linspace(100, 147, 48), calendar, "MWh")
    d2 = HourStamp(6, 1)
    expected = np.linspace(200, 223, 24)
    crossed = np.zeros(24, dtype=bool)
    crossed[5] = True
    load = WindowLoad(
        shared=shared,
        scenarios=ScenarioSet(
            low=HourlySeries(d2, expected - 10, calendar, "MWh"),
            expected=HourlySeries(d2, expected, calendar, "MWh"),
            high=HourlySeries(d2, expected + 15, calendar, "MWh"),
            crossed=crossed,
        ),
    )
    path = write_frame(tmp_path / "load" / "window.csv", window_frame(load))
    back = read_window(path, 5, calendar, (1 / 6, 2 / 3, 1 / 6))
    np.testing.assert_allclose(back.demand_matrix(), load.demand_matrix())
    np.testing.assert_array_equal(back.scenarios.crossed, crossed)
    assert back.target_day == 5
