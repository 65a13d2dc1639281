"""Core workflow for the hybrid day-ahead price forecast."""

import time
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import numpy as np
from loguru import logger
from tqdm import tqdm

from pricex.config import PipelineConfig
from pricex.density import build_scenarios, fit_scenario_models
from pricex.dispatch import WindowLoad, naive_window_load, rolling_run
from pricex.errors import ConfigError, CoverageError, MissingSubModel, PricexError, TooFewDays
from pricex.evaluation import (
    EvalReport,
    dm_matrix,
    error_correlations,
    improvement_table,
    load_improvement_table,
    slice_report,
    submodel_rmse_by_hour,
)
from pricex.io.ingest import ingest
from pricex.io.manifest import DONE, FAILED, SKIPPED, RunManifest
from pricex.io.results import (
    artifact_path,
    dispatch_frame,
    point_frame,
    preprocess_frame,
    quantile_frame,
    read_frame,
    read_preprocess,
    read_quantiles,
    read_submodels,
    read_window,
    submodels_frame,
    window_frame,
    write_frame,
)
from pricex.load import SarmaxParams, backcast_2da, preprocess_load
from pricex.market import MarketData
from pricex.postproc import (
    PriceErrorPanel,
    combine_point,
    fit_qra_models,
    forecast_submodels,
    predict_probabilistic,
    submodel_names,
)
from pricex.timeseries import HOURS_PER_DAY, HOURS_PER_WEEK, HourlySeries, concat

logger = logger.bind(module="core")

STAGES = ("preprocess", "density", "dispatch", "submodels", "postprocess")
# days of load history before the first pre-processed day
MIN_LOAD_HISTORY_DAYS = 35
MIN_DENSITY_DAYS = 14
# the first two-day-ahead backcast needs a week of TSO forecasts before its origin
BACKCAST_OFFSET_DAYS = HOURS_PER_WEEK // HOURS_PER_DAY + 2
FAILURE_LIMIT = 0.5


def format_time_duration(seconds):
    """
    Format seconds into a human-readable time string.
    For longer durations, shows hours and minutes; for shorter ones, shows minutes and seconds.
    """

    hours, remainder = divmod(int(seconds), 3600)
    minutes, whole_seconds = divmod(remainder, 60)

    if hours > 0:
        return f"{hours}h {minutes}m {whole_seconds}s"
    elif minutes > 0:
        return f"{minutes}m {whole_seconds}s"
    else:
        return f"{seconds:.2f}s"


def _plain(obj):
    """Nested diagnostics with numpy scalars and arrays turned into JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _contiguous(days) -> list[list[int]]:
    blocks = []
    for day in sorted(days):
        if blocks and day == blocks[-1][-1] + 1:
            blocks[-1].append(day)
        else:
            blocks.append([day])
    return blocks


class Pipeline:
    """
    Rolling day-ahead price forecast over the configured date range.

    Every stage writes one artifact per day under the run directory and
    records it in the run manifest. A stage skips the days the manifest
    marks as done whose artifact still exists, so an interrupted or partly
    deleted run resumes where it is incomplete.

    Parameters
    ----------
    config : PipelineConfig
        Run configuration. Run help(PipelineConfig) for details
    market : MarketData, optional
        Already ingested bundle; read from `config.bundle_dir` otherwise
    progress : bool, default=False
        Show progress bars for the day loops

    Examples
    --------
    >>> pipeline = Pipeline(PipelineConfig(bundle_dir="bundle", run_dir="run", focal_zone="A",
    ...                                    start="2018-03-20", end="2018-03-29"))
    >>> manifest = pipeline.run()
    """

    def __init__(
        self,
        config: PipelineConfig,
        market: Optional[MarketData] = None,
        progress: bool = False,
    ):
        self.config = config.validate()
        self.run_dir = Path(config.run_dir)
        self.progress = progress
        self._market = market
        self._prepared = False
        self._six_cache = {}
        self.manifest = RunManifest.open(self.run_dir, config.config_hash())

    @property
    def market(self) -> MarketData:
        if self._market is None:
            self._market = ingest(self.config.bundle_dir)
        return self._market

    @property
    def calendar(self):
        return self.market.calendar

    @property
    def focal_zone(self) -> str:
        return self.config.focal_zone

    @property
    def eval_days(self) -> range:
        first = self.calendar.day_index(self.config.start_date)
        last = self.calendar.day_index(self.config.end_date)
        return range(first, last + 1)

    @property
    def dispatch_days(self) -> range:
        return range(self.eval_days.start - self.config.warmup_days, self.eval_days.stop)

    @property
    def preprocess_days(self) -> range:
        return range(self.dispatch_days.start - 1, self.eval_days.stop)

    @property
    def submodel_days(self) -> range:
        first = self.eval_days.start - self.config.postproc.qra_window_days
        return range(first, self.eval_days.stop)

    def key(self, day: int) -> str:
        return self.calendar.date(day).isoformat()

    def _path(self, kind: str, day: int) -> Path:
        return artifact_path(self.run_dir, kind, self.calendar.date(day))

    def _relative(self, path: Path) -> str:
        return path.relative_to(self.run_dir).as_posix()

    def _done(self, day: int, stage: str) -> bool:
        return self.manifest.is_done(self.key(day), stage, self.run_dir)

    def _pending(self, days, stage: str) -> list[int]:
        return [d for d in days if not self._done(d, stage)]

    def _fail(self, day: int, stage: str, error: Exception):
        logger.warning(f"{stage} failed for {self.key(day)}: {error}")
        self.manifest.mark(self.key(day), stage, FAILED, error=str(error))

    def check_coverage(self):
        """
        Raise ConfigError if the bundle cannot serve the configured range.

        The load steps need MIN_LOAD_HISTORY_DAYS of history before the
        first pre-processed day and every window reaches one day past the
        last forecast day.
        """
        market = self.market
        if self.focal_zone not in market.zones:
            raise ConfigError(f"focal zone {self.focal_zone!r} not in bundle zones {market.zones}")
        if self.config.dispatch_only:
            first_needed = self.dispatch_days.start + 1 - HOURS_PER_WEEK // HOURS_PER_DAY
        else:
            first_needed = self.preprocess_days.start - MIN_LOAD_HISTORY_DAYS
        last_needed = self.eval_days.stop
        if not market.covers(first_needed, last_needed):
            raise ConfigError(
                f"forecasting {self.config.start} to {self.config.end} needs data from "
                f"{self.key(first_needed)} to {self.key(last_needed)}, the bundle covers "
                f"{self.key(market.first_day)} to {self.key(market.last_day)}"
            )

    def _prepare(self):
        if self._prepared:
            return
        self.check_coverage()
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.config.to_toml(self.run_dir / "config.toml")
        for day in self.preprocess_days:
            stages = ["preprocess"]
            if day in self.dispatch_days:
                stages += ["density", "dispatch"]
            if day in self.submodel_days:
                stages.append("submodels")
            if day in self.eval_days:
                stages.append("postprocess")
            self.manifest.register(self.key(day), stages)
        self._prepared = True

    def _loop(self, days, desc: str):
        return tqdm(days, disable=not self.progress, desc=desc)

    # load pre-processing

    def preprocess(self):
        """Improved and two-day-ahead load forecasts of the focal zone."""
        self._prepare()
        days = self._pending(self.preprocess_days, "preprocess")
        if self.config.dispatch_only:
            for day in days:
                self.manifest.mark(self.key(day), "preprocess", SKIPPED)
            self.manifest.save(self.run_dir)
            return
        logger.info(f"Running load pre-processing for {len(days)} day(s)")
        market = self.market
        for day in self._loop(days, "preprocess"):
            try:
                actual = market.series("load_actual", self.focal_zone, market.first_day, day - 2)
                tso = market.series("load_tso", self.focal_zone, market.first_day, day)
                forecast = preprocess_load(actual, tso, day, self.config.load)
            except PricexError as e:
                self._fail(day, "preprocess", e)
                continue
            path = write_frame(
                self._path("preprocess", day),
                preprocess_frame(forecast.improved, forecast.two_day_ahead),
            )
            diagnostics = {"sarma": asdict(forecast.sarma), "sarmax": asdict(forecast.sarmax)}
            self.manifest.mark(
                self.key(day),
                "preprocess",
                DONE,
                output=self._relative(path),
                diagnostics=_plain(diagnostics),
            )
        self.manifest.save(self.run_dir)

    # load density

    def _preprocessed(self, day: int) -> tuple[HourlySeries, HourlySeries]:
        if not self._done(day, "preprocess"):
            raise CoverageError(f"no load pre-processing for {self.key(day)}")
        return read_preprocess(self._path("preprocess", day), day, self.calendar)

    def window_load(self, day: int) -> tuple[WindowLoad, dict]:
        """Load input of the dispatch window whose target day is `day`, with fit diagnostics."""
        if self.config.dispatch_only:
            return naive_window_load(self.market, self.focal_zone, day), {}
        market, density = self.market, self.config.density
        previous, _ = self._preprocessed(day - 1)
        improved, two_day_ahead = self._preprocessed(day)
        sarmax = SarmaxParams(**self.manifest.diagnostics[self.key(day)]["preprocess"]["sarmax"])

        last = day - 2
        first = max(last - density.window_days + 1, market.first_day + BACKCAST_OFFSET_DAYS)
        if last - first + 1 < MIN_DENSITY_DAYS:
            raise TooFewDays(
                f"{max(last - first + 1, 0)} days of load history for the density step, "
                f"need {MIN_DENSITY_DAYS}"
            )
        tso = market.series("load_tso", self.focal_zone, market.first_day, last)
        actual = market.series("load_actual", self.focal_zone, first, last)
        backcast = backcast_2da(sarmax, tso, first, last)
        low, high = fit_scenario_models(backcast, actual, density, self.config.dispatch.solver)
        scenarios = build_scenarios(two_day_ahead, low, high, density.weights)
        diagnostics = {
            "low_beta": low.beta,
            "high_beta": high.beta,
            "training_days": last - first + 1,
            "crossed_hours": int(scenarios.crossed.sum()),
        }
        return WindowLoad(shared=concat([previous, improved]), scenarios=scenarios), diagnostics

    def density(self):
        """Three-scenario load input of every dispatch window."""
        self._prepare()
        days = self._pending(self.dispatch_days, "density")
        logger.info(f"Running load density step for {len(days)} day(s)")
        for day in self._loop(days, "density"):
            try:
                load, diagnostics = self.window_load(day)
            except PricexError as e:
                self._fail(day, "density", e)
                continue
            path = write_frame(self._path("density", day), window_frame(load))
            self.manifest.mark(
                self.key(day),
                "density",
                DONE,
                output=self._relative(path),
                diagnostics=_plain(diagnostics),
            )
        self.manifest.save(self.run_dir)

    # dispatch

    def _carry_over(self, day: int) -> Optional[dict]:
        """Running capacity left by the window of the previous day, if it was solved."""
        if self.config.workers > 1:
            return None
        diagnostics = self.manifest.diagnostics.get(self.key(day - 1), {}).get("dispatch", {})
        return diagnostics.get("terminal_pon") or None

    def dispatch(self):
        """Price estimators of every dispatch day from the rolling dispatch model."""
        self._prepare()
        days = self._pending(self.dispatch_days, "dispatch")
        logger.info(f"Running rolling dispatch for {len(days)} day(s)")
        weights = self.config.density.weights
        for block in _contiguous(days):
            inputs = {}
            for day in block:
                if self._done(day, "density"):
                    path = self._path("density", day)
                    inputs[day] = read_window(path, day, self.calendar, weights)
            run = rolling_run(
                self.market,
                block[0],
                block[-1],
                inputs,
                self.focal_zone,
                self.config.dispatch,
                workers=self.config.workers,
                progress=self.progress,
                initial_pon=self._carry_over(block[0]),
                lp_dir=self.run_dir / "dispatch" / "lp" if self.config.dispatch.write_lp else None,
            )
            for day, result in sorted(run.results.items()):
                path = write_frame(self._path("dispatch", day), dispatch_frame(result.prices))
                diagnostics = {**result.diagnostics(), "terminal_pon": result.terminal_pon}
                self.manifest.mark(
                    self.key(day),
                    "dispatch",
                    DONE,
                    output=self._relative(path),
                    diagnostics=_plain(diagnostics),
                )
            for day, reason in sorted(run.failures.items()):
                self.manifest.mark(self.key(day), "dispatch", FAILED, error=reason)
            self.manifest.save(self.run_dir)

    # post-processing

    def _estimators(self) -> np.ndarray:
        """(n_dispatch_days, 24) focal-zone price estimators, NaN on missing days."""
        out = np.full((len(self.dispatch_days), HOURS_PER_DAY), np.nan)
        for k, day in enumerate(self.dispatch_days):
            if self._done(day, "dispatch"):
                out[k] = read_frame(self._path("dispatch", day))[self.focal_zone].to_numpy()
        return out

    def _actual_matrix(self, days: range) -> np.ndarray:
        if self.focal_zone not in self.market.prices_actual.columns:
            return np.full((len(days), HOURS_PER_DAY), np.nan)
        index = np.arange(days.start * HOURS_PER_DAY, days.stop * HOURS_PER_DAY)
        values = self.market.prices_actual[self.focal_zone].reindex(index)
        return values.to_numpy(dtype=float).reshape(len(days), HOURS_PER_DAY)

    def error_panel(self) -> PriceErrorPanel:
        """Price estimator errors over the dispatch days; NaN where either side is missing."""
        days = self.dispatch_days
        market = self.market
        if self.focal_zone in market.wind.columns:
            wind = market.hourly("wind", self.focal_zone, days.start, len(days))
        else:
            logger.warning(f"no wind forecast for zone {self.focal_zone}; wind regressor is zero")
            wind = np.zeros(len(days) * HOURS_PER_DAY)
        return PriceErrorPanel(
            first_day=days.start,
            eps=self._actual_matrix(days) - self._estimators(),
            wind=wind.reshape(len(days), HOURS_PER_DAY),
            holidays=self.calendar.holiday_mask(np.arange(days.start, days.stop)),
            calendar=self.calendar,
        )

    def submodels(self):
        """Sub-model price forecasts of the forecast days and the QRA history before them."""
        self._prepare()
        days = self._pending(self.submodel_days, "submodels")
        logger.info(f"Running sub-model forecasts for {len(days)} day(s)")
        if not days:
            return
        panel = self.error_panel()
        names = submodel_names(self.config.postproc.window_weeks)
        for day in self._loop(days, "submodels"):
            base = self._estimators_row(day)
            try:
                if base is None:
                    raise CoverageError(f"no price estimator for {self.key(day)}")
                six = forecast_submodels(panel, day, base, self.config.postproc)
                missing = six.missing(names)
                if missing:
                    raise MissingSubModel(f"sub-model(s) {', '.join(missing)} failed")
            except PricexError as e:
                self._fail(day, "submodels", e)
                continue
            path = write_frame(self._path("submodels", day), submodels_frame(six))
            self.manifest.mark(self.key(day), "submodels", DONE, output=self._relative(path))
        self.manifest.save(self.run_dir)

    def _estimators_row(self, day: int) -> Optional[np.ndarray]:
        if not self._done(day, "dispatch"):
            return None
        return read_frame(self._path("dispatch", day))[self.focal_zone].to_numpy(dtype=float)

    def _six(self, day: int):
        if day not in self._six_cache:
            if not self._done(day, "submodels"):
                return None
            self._six_cache[day] = read_submodels(self._path("submodels", day), day)
        return self._six_cache[day]

    def actual_prices(self) -> Optional[HourlySeries]:
        """Whole days of published focal-zone prices, or None if there are none."""
        prices = self.market.prices_actual
        if self.focal_zone not in prices.columns:
            return None
        known = prices[self.focal_zone].dropna().index
        if len(known) == 0:
            return None
        first = -(-int(known.min()) // HOURS_PER_DAY)
        last = (int(known.max()) + 1) // HOURS_PER_DAY - 1
        if last < first:
            return None
        try:
            return self.market.series("prices_actual", self.focal_zone, first, last, unit="EUR/MWh")
        except CoverageError as e:
            logger.warning(f"published prices of zone {self.focal_zone} have gaps: {e}")
            return None

    def postprocess(self):
        """Combined point forecast and QRA quantiles of every forecast day."""
        self.submodels()
        days = self._pending(self.eval_days, "postprocess")
        logger.info(f"Running price post-processing for {len(days)} day(s)")
        postproc = self.config.postproc
        names = submodel_names(postproc.window_weeks)
        actual = self.actual_prices()
        for day in self._loop(days, "postprocess"):
            key = self.key(day)
            six = self._six(day)
            if six is None:
                self._fail(day, "postprocess", CoverageError(f"no sub-model forecasts for {key}"))
                continue
            try:
                point = combine_point(six, names)
            except PricexError as e:
                self._fail(day, "postprocess", e)
                continue
            window = range(day - postproc.qra_window_days, day)
            history = [six_d for d in window if (six_d := self._six(d)) is not None]
            if actual is None or len(history) < postproc.qra_min_days:
                logger.warning(
                    f"{key}: {len(history)} day(s) of sub-model history, "
                    f"probabilistic forecast needs {postproc.qra_min_days}"
                )
                self.manifest.mark(key, "quantiles", SKIPPED)
            else:
                try:
                    models = fit_qra_models(
                        history, actual, postproc.quantiles, self.config.dispatch.solver, names
                    )
                    forecast = predict_probabilistic(models, six, self.calendar, names)
                    path = write_frame(self._path("quantiles", day), quantile_frame(forecast))
                    self.manifest.mark(key, "quantiles", DONE, output=self._relative(path))
                except PricexError as e:
                    logger.warning(f"{key}: no probabilistic forecast: {e}")
                    self.manifest.mark(key, "quantiles", FAILED, error=str(e))
            path = write_frame(self._path("postprocess", day), point_frame(six, point))
            self.manifest.mark(key, "postprocess", DONE, output=self._relative(path))
        self.manifest.save(self.run_dir)

    # evaluation

    def _evaluation_days(self) -> list[int]:
        actual = self.actual_prices()
        if actual is None:
            return []
        covered = range(actual.first_day, actual.first_day + actual.n_days)
        days = [d for d in self.eval_days if d in covered and self._done(d, "postprocess")]
        blocks = _contiguous(days)
        if not blocks:
            return []
        longest = max(blocks, key=len)
        if len(longest) < len(self.eval_days):
            logger.warning(
                f"evaluating {len(longest)} of {len(self.eval_days)} day(s): "
                f"{self.key(longest[0])} to {self.key(longest[-1])}"
            )
        return longest

    def _day_series(self, days, read) -> HourlySeries:
        matrix = np.stack([read(day) for day in days])
        return HourlySeries.from_days(days[0], matrix, self.calendar, "EUR/MWh")

    def evaluate(self) -> EvalReport:
        """Score the forecasts of the forecast days and write the report tables."""
        self._prepare()
        logger.info("Running evaluation")
        days = self._evaluation_days()
        if not days:
            raise TooFewDays("no forecast day has both a forecast and published prices")
        first, last = days[0], days[-1]
        market, calendar, focal = self.market, self.calendar, self.focal_zone
        actual = market.series("prices_actual", focal, first, last, unit="EUR/MWh")
        points = {d: read_frame(self._path("postprocess", d)) for d in days}
        point = self._day_series(days, lambda d: points[d]["point"].to_numpy())
        base = self._day_series(days, lambda d: points[d]["estimator"].to_numpy())

        probs = None
        if all(self._done(d, "quantiles") for d in days):
            probs = [read_quantiles(self._path("quantiles", d), d, calendar) for d in days]
        report = slice_report(actual, point, probs, calendar, self.config.evaluation.n_price_groups)

        names = submodel_names(self.config.postproc.window_weeks)
        forecasts = {"estimator": base}
        for name in names:
            forecasts[name] = self._day_series(days, lambda d: self._six(d).prices[name])
        forecasts["combined"] = point
        report.tables["submodel_rmse_by_hour"] = submodel_rmse_by_hour(actual, forecasts)
        report.tables["improvement_by_hour"] = improvement_table(actual, base, point, "hour")
        report.tables["improvement_by_weekday"] = improvement_table(actual, base, point, "weekday")

        errors = {name: actual.as_days() - f.as_days() for name, f in forecasts.items()}
        try:
            report.tables["dm_pvalues"] = dm_matrix(errors, self.config.evaluation.dm_norm)
        except TooFewDays as e:
            logger.warning(f"Diebold-Mariano tests skipped: {e}")

        load_actual = market.series("load_actual", focal, first, last)
        if not self.config.dispatch_only:
            improved = concat([self._preprocessed(d)[0] for d in days])
            tso = market.series("load_tso", focal, first, last)
            report.tables["load_improvement"] = load_improvement_table(load_actual, tso, improved)
        exog = {"load": load_actual}
        if focal in market.wind.columns:
            exog["wind"] = market.series("wind", focal, first, last)
        price_errors = actual.with_values(actual.values - point.values)
        report.tables["error_correlations"] = error_correlations(price_errors, exog).to_frame()

        paths = report.write(self.run_dir / "evaluation")
        self.manifest.reports = [self._relative(p) for p in paths]
        self.manifest.save(self.run_dir)
        logger.success(
            f"Evaluation over {len(days)} day(s): RMSE {report.rmse['base']:.2f}, "
            f"MAE {report.mae['base']:.2f} EUR/MWh"
        )
        return report

    # whole run

    def failure_share(self) -> float:
        """Share of forecast days with a failed stage."""
        return self.manifest.failure_share([self.key(d) for d in self.eval_days], STAGES)

    def run(self) -> RunManifest:
        """
        Execute every stage over the configured range, then evaluate.

        Returns
        -------
        RunManifest
            Per-day stage status, artifacts, diagnostics and stage timings
        """
        t0 = time.time()
        self._prepare()
        logger.info(
            f"Running price forecast for zone {self.focal_zone}, "
            f"{self.config.start} to {self.config.end} "
            f"({len(self.dispatch_days)} dispatch day(s) including warm-up)"
        )
        for stage in ("preprocess", "density", "dispatch", "postprocess", "evaluate"):
            t_stage = time.time()
            try:
                getattr(self, stage)()
            except TooFewDays as e:
                logger.warning(f"{stage} produced no output: {e}")
            elapsed = time.time() - t_stage
            self.manifest.timings[stage] = elapsed
            logger.info(f"{stage} finished in {format_time_duration(elapsed)}")
        self.manifest.save(self.run_dir)

        failed = self.manifest.failed_days([self.key(d) for d in self.eval_days], STAGES)
        if failed:
            logger.warning(f"{len(failed)} of {len(self.eval_days)} forecast day(s) failed")
        logger.success(f"Run finished in {format_time_duration(time.time() - t0)}")
        return self.manifest
