# tests/integration/test_pipeline.py

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from pricex.cli import main
from pricex.config import PipelineConfig
from pricex.core import STAGES, Pipeline
from pricex.errors import ConfigError
from pricex.io import ingest, simulate_bundle
from pricex.io.manifest import DONE, SKIPPED

N_DAYS = 90
# day 78 of the fixture
START, END = "2018-03-20", "2018-03-29"


def small_config(bundle, run_dir, start=START, end=END, **kwargs) -> PipelineConfig:
    """Short calibration windows so that a 90-day bundle holds the warm-up."""
    config = PipelineConfig(
        bundle_dir=str(bundle),
        run_dir=str(run_dir),
        focal_zone="A",
        start=start,
        end=end,
        **kwargs,
    )
    config.load.window_days = 42
    config.density.window_days = 28
    config.postproc.window_weeks = (2, 3)
    config.postproc.qra_window_days = 14
    config.postproc.qra_min_days = 7
    return config


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    return simulate_bundle(tmp_path_factory.mktemp("bundle"), seed=7, n_days=N_DAYS, zones=("A",))


@pytest.fixture(scope="module")
def market(bundle):
    return ingest(bundle)


@pytest.fixture(scope="module")
def run_dir(bundle, market, tmp_path_factory):
    run_dir = tmp_path_factory.mktemp("run")
    Pipeline(small_config(bundle, run_dir), market=market).run()
    return run_dir


def csv_files(run_dir: Path, directory: str) -> dict:
    return {p.name: p for p in sorted((run_dir / directory).glob("*.csv"))}


def test_run_writes_one_forecast_per_day(run_dir):
    prices = [p for p in csv_files(run_dir, "forecasts") if p.startswith("prices_")]
    quantiles = [p for p in csv_files(run_dir, "forecasts") if p.startswith("quantiles_")]
    assert len(prices) == 10
    assert len(quantiles) == 10
    assert prices[0] == f"prices_{START}.csv"
    assert prices[-1] == f"prices_{END}.csv"
    assert (run_dir / "evaluation" / "accuracy.csv").exists()
    assert (run_dir / "evaluation" / "summary.json").exists()
    assert (run_dir / "manifest.json").exists()
    assert (run_dir / "config.toml").exists()


def test_quantile_files_are_sorted(run_dir):
    for path in csv_files(run_dir, "forecasts").values():
        if path.name.startswith("quantiles_"):
            frame = pd.read_csv(path, index_col=0)
            levels = frame[[c for c in frame.columns if c.startswith("q")]].to_numpy()
            assert levels.shape == (24, 19)
            assert np.all(np.diff(levels, axis=1) >= 0)


def test_manifest_marks_every_forecast_day_done(bundle, market, run_dir):
    pipeline = Pipeline(small_config(bundle, run_dir), market=market)
    manifest = pipeline.manifest
    for day in pipeline.eval_days:
        key = pipeline.key(day)
        for stage in STAGES:
            assert manifest.status(key, stage) == DONE, (key, stage)
        assert manifest.status(key, "quantiles") == DONE
    assert pipeline.failure_share() == 0.0
    assert set(manifest.timings) == {"preprocess", "density", "dispatch", "postprocess", "evaluate"}
    assert "sarmax" in manifest.diagnostics[pipeline.key(pipeline.eval_days.start)]["preprocess"]


def test_post_processing_improves_the_estimator(run_dir):
    prices = pd.read_csv(run_dir / "evaluation" / "submodel_rmse_by_hour.csv", index_col=0)
    accuracy = pd.read_csv(run_dir / "evaluation" / "accuracy.csv", index_col=0)
    assert accuracy.loc["base", "n_hours"] == 240
    assert prices.shape == (24, 6)
    combined = np.sqrt((prices["combined"] ** 2).mean())
    base = np.sqrt((prices["estimator"] ** 2).mean())
    assert combined <= 0.85 * base
    assert accuracy.loc["base", "rmse"] == pytest.approx(combined, rel=1e-6)


def test_load_improvement_table(run_dir):
    table = pd.read_csv(run_dir / "evaluation" / "load_improvement.csv", index_col=0)
    assert "all" in table.index.astype(str)
    assert table.loc[table.index.astype(str) == "all", "rmse_tso"].iloc[0] > 0


def test_rerun_recomputes_only_the_deleted_day(bundle, market, run_dir):
    files = csv_files(run_dir, "forecasts")
    victim = files["prices_2018-03-24.csv"]
    content = victim.read_bytes()
    stamps = {name: p.stat().st_mtime_ns for name, p in files.items() if p != victim}
    victim.unlink()

    Pipeline(small_config(bundle, run_dir), market=market).run()

    assert victim.read_bytes() == content
    for name, path in csv_files(run_dir, "forecasts").items():
        if name in stamps and name != "quantiles_2018-03-24.csv":
            assert path.stat().st_mtime_ns == stamps[name], name


def test_identical_runs_are_byte_identical(bundle, market, run_dir, tmp_path):
    Pipeline(small_config(bundle, tmp_path), market=market).run()
    for directory in ("load", "dispatch", "postproc", "forecasts"):
        first, second = csv_files(run_dir, directory), csv_files(tmp_path, directory)
        assert first.keys() == second.keys()
        for name in first:
            assert first[name].read_bytes() == second[name].read_bytes(), name


def test_dispatch_only_skips_the_load_stages(bundle, market, tmp_path):
    config = small_config(bundle, tmp_path, start="2018-03-22", end="2018-03-23")
    config.dispatch_only = True
    config.postproc.window_weeks = (1,)
    config.dispatch.write_lp = True
    config.postproc.qra_window_days = 7
    pipeline = Pipeline(config, market=market)
    manifest = pipeline.run()

    for day in pipeline.eval_days:
        key = pipeline.key(day)
        assert manifest.status(key, "preprocess") == SKIPPED
        assert manifest.status(key, "postprocess") == DONE
    assert not list((tmp_path / "load").glob("preprocess_*.csv"))
    assert len(list((tmp_path / "load").glob("window_*.csv"))) == len(pipeline.dispatch_days)
    assert not (tmp_path / "evaluation" / "load_improvement.csv").exists()
    dumps = sorted((tmp_path / "dispatch" / "lp").glob("window_*.lp"))
    assert len(dumps) == len(pipeline.dispatch_days)
    assert dumps[-1].name == "window_2018-03-23.lp"
    assert dumps[-1].read_text().startswith("\\")


def test_range_outside_the_bundle_is_a_config_error(bundle, market, tmp_path):
    config = small_config(bundle, tmp_path, start="2018-02-01", end="2018-02-05")
    pipeline = Pipeline(config, market=market)
    with pytest.raises(ConfigError, match="needs data from"):
        pipeline.run()


def test_cli_exit_codes(bundle, tmp_path):
    assert main(["ingest-check", "--bundle-dir", str(bundle)]) == 0
    assert main(["ingest-check", "--bundle-dir", str(tmp_path / "missing")]) == 3
    args = ["run", "--bundle-dir", str(bundle), "--run-dir", str(tmp_path), "--focal-zone", "A"]
    assert main(args + ["--start", "2018-03-29", "--end", "2018-03-20"]) == 3
    assert main(args + ["--start", "2018-01-10", "--end", "2018-01-12"]) == 3


def test_cli_simulate_fixture(tmp_path):
    out = tmp_path / "bundle"
    code = main(["simulate-fixture", "--out", str(out), "--days", "14", "--zones", "X"])
    assert code == 0
    assert (out / "load_actual.csv").exists()
    assert ingest(out).zones == ("X",)
