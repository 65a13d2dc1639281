import datetime as dt
import hashlib
import json

from dataclasses import dataclass
from dataclasses import field
from dataclasses import asdict
from dataclasses import fields
from typing import Optional

import numpy as np
import toml

from pricex.errors import ConfigError


def default_quantile_grid():
    return tuple(round(0.05 * k, 2) for k in range(1, 20))


@dataclass
class LoadConfig:
    """Parameters for the Load Pre-Processing Step

    Parameters
    ----------
    window_days : int, default=365
        Calibration window of the seasonal profile, the SARMA error model and
        the two-day-ahead SARMAX model
    maxiter : int, default=200
        Iteration cap of the conditional sum-of-squares optimiser
    """

    window_days: int = 365  # days
    maxiter: int = 200


@dataclass
class DensityConfig:
    """Parameters for the Load Density Forecast Step

    Parameters
    ----------
    window_days : int, default=365
        Length of the (two-day-ahead forecast, actual load) training history
    low_quantile : float, default=0.05
        Quantile level of the low load scenario
    high_quantile : float, default=0.95
        Quantile level of the high load scenario
    weights : tuple of float, default=(1/6, 2/3, 1/6)
        Weights of the (low, expected, high) scenarios
    """

    window_days: int = 365  # days
    low_quantile: float = 0.05
    high_quantile: float = 0.95
    weights: tuple = (1 / 6, 2 / 3, 1 / 6)


@dataclass
class SolverConfig:
    """Parameters for the Linear Program Solver

    Parameters
    ----------
    primal_tolerance : float, default=1e-7
        Primal feasibility tolerance
    dual_tolerance : float, default=1e-7
        Optimality tolerance on reduced costs
    presolve : bool, default=True
        Let the engine presolve; empty rows are always removed beforehand
    time_limit : float, optional
        Wall-clock limit per solve in seconds
    """

    primal_tolerance: float = 1e-7
    dual_tolerance: float = 1e-7
    presolve: bool = True
    time_limit: Optional[float] = None  # seconds


@dataclass
class DispatchConfig:
    """Parameters for the Dispatch Model

    Parameters
    ----------
    voll : float, default=3000
        Value of lost load in EUR/MWh
    curtc : float, default=20
        Curtailment cost of renewables in EUR/MWh
    scenario_weighting : str, default="density"
        "density" weights the d+2 load scenarios with the density weights,
        "equal" treats the three scenarios as equally likely
    nonanticipativity : str, default="shared"
        "shared" uses one set of variables for the first two days,
        "scenario" indexes every variable by scenario and prices are the sum
        of the scenario duals
    reserve_block_hours : int, default=4
        Length of the primary and secondary control power bidding blocks
    write_lp : bool, default=False
        Dump the LP of every solved window to run_dir/dispatch/lp for
        inspection with an external solver
    solver : SolverConfig
        Configuration of the LP solver. Run help(SolverConfig) for details
    """

    voll: float = 3000  # EUR/MWh
    curtc: float = 20  # EUR/MWh
    scenario_weighting: str = "density"
    nonanticipativity: str = "shared"
    reserve_block_hours: int = 4  # hours
    write_lp: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)


@dataclass
class PostprocConfig:
    """Parameters for the Price Post-Processing Step

    Parameters
    ----------
    window_weeks : tuple of int, default=(44, 48, 52)
        Calibration windows of the univariate and multivariate ARX sub-models
    qra_window_days : int, default=365
        Calibration window of the quantile regression averaging
    qra_min_days : int, default=28
        Minimum number of days of sub-model history before probabilistic
        forecasts are produced
    quantiles : tuple of float, default=(0.05, 0.10, ..., 0.95)
        Quantile grid of the probabilistic forecast
    maxiter : int, default=200
        Iteration cap of the univariate conditional sum-of-squares fit
    """

    window_weeks: tuple = (44, 48, 52)  # weeks
    qra_window_days: int = 365  # days
    qra_min_days: int = 28  # days
    quantiles: tuple = field(default_factory=default_quantile_grid)
    maxiter: int = 200


@dataclass
class EvaluationConfig:
    """Parameters for the Evaluation

    Parameters
    ----------
    dm_norm : int, default=1
        Norm of the Diebold-Mariano loss differential (1 or 2)
    n_price_groups : int, default=5
        Number of actual price quantile groups for the error breakdown
    """

    dm_norm: int = 1
    n_price_groups: int = 5


@dataclass
class PipelineConfig:
    """Complete Configuration for the Hybrid Price Forecast

    Parameters
    ----------
    bundle_dir : str
        Directory holding the CSV bundle
    run_dir : str
        Directory receiving every artifact of a run
    focal_zone : str
        Zone whose prices are forecast
    start : str
        First forecast day (ISO date)
    end : str
        Last forecast day (ISO date, inclusive)
    workers : int, default=1
        Number of worker processes for the day loop
    seed : int, default=0
        Seed of the synthetic fixtures
    dispatch_only : bool, default=False
        Skip load pre-processing and the density step, feeding the raw TSO
        forecasts to the dispatch model
    load : LoadConfig
    density : DensityConfig
    dispatch : DispatchConfig
    postproc : PostprocConfig
    evaluation : EvaluationConfig

    Examples
    --------
    >>> config = PipelineConfig(bundle_dir="bundle", run_dir="run",
    ...                         focal_zone="DE", start="2019-01-01", end="2019-01-31")
    >>> config.dispatch.voll = 4000
    """

    bundle_dir: str = "bundle"
    run_dir: str = "run"
    focal_zone: str = "DE"
    start: str = ""
    end: str = ""
    workers: int = 1
    seed: int = 0
    dispatch_only: bool = False
    load: LoadConfig = field(default_factory=LoadConfig)
    density: DensityConfig = field(default_factory=DensityConfig)
    dispatch: DispatchConfig = field(default_factory=DispatchConfig)
    postproc: PostprocConfig = field(default_factory=PostprocConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)

    @property
    def start_date(self) -> dt.date:
        return dt.date.fromisoformat(self.start)

    @property
    def end_date(self) -> dt.date:
        return dt.date.fromisoformat(self.end)

    @property
    def warmup_days(self) -> int:
        """Days of dispatch history needed before the first forecast day."""
        arx = 7 * max(self.postproc.window_weeks) + 7
        return arx + self.postproc.qra_window_days

    def validate(self):
        problems = []
        if not np.isclose(sum(self.density.weights), 1.0):
            problems.append(f"scenario weights sum to {sum(self.density.weights)}, not 1")
        if len(self.density.weights) != 3:
            problems.append("scenario weights need exactly three entries")
        try:
            if self.end_date < self.start_date:
                problems.append(f"end {self.end} precedes start {self.start}")
        except ValueError as e:
            problems.append(f"invalid date range: {e}")
        for name, value in [
            ("load.window_days", self.load.window_days),
            ("density.window_days", self.density.window_days),
            ("postproc.qra_window_days", self.postproc.qra_window_days),
            ("workers", self.workers),
        ]:
            if value < 1:
                problems.append(f"{name} must be positive, got {value}")
        if any(w < 1 for w in self.postproc.window_weeks):
            problems.append("post-processing windows must be positive")
        grid = np.asarray(self.postproc.quantiles, dtype=float)
        if grid.size == 0 or np.any(grid <= 0) or np.any(grid >= 1) or np.any(np.diff(grid) <= 0):
            problems.append("quantile grid must be strictly increasing inside (0, 1)")
        if self.dispatch.scenario_weighting not in ("density", "equal"):
            problems.append(f"unknown scenario weighting {self.dispatch.scenario_weighting!r}")
        if self.dispatch.nonanticipativity not in ("shared", "scenario"):
            problems.append(f"unknown non-anticipativity {self.dispatch.nonanticipativity!r}")
        if self.evaluation.dm_norm not in (1, 2):
            problems.append("dm_norm must be 1 or 2")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def to_dict(self):
        """Convert the entire config to a nested dictionary"""

        def _convert_to_dict(obj):
            if hasattr(obj, "__dataclass_fields__"):
                return {key: _convert_to_dict(value) for key, value in asdict(obj).items()}
            elif isinstance(obj, (list, tuple)):
                return [_convert_to_dict(item) for item in obj]
            elif isinstance(obj, dict):
                return {k: _convert_to_dict(v) for k, v in obj.items()}
            else:
                return obj

        return _convert_to_dict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        def _build(klass, values):
            kwargs = {}
            known = {f.name: f for f in fields(klass)}
            for key, value in values.items():
                if key not in known:
                    raise ConfigError(f"unknown configuration key {klass.__name__}.{key}")
                default = getattr(klass(), key) if key in known else None
                if hasattr(default, "__dataclass_fields__"):
                    kwargs[key] = _build(type(default), value)
                elif isinstance(default, tuple):
                    kwargs[key] = tuple(value)
                else:
                    kwargs[key] = value
            return klass(**kwargs)

        return _build(cls, data)

    @classmethod
    def from_toml(cls, path) -> "PipelineConfig":
        with open(path) as f:
            return cls.from_dict(toml.load(f))

    def to_toml(self, path):
        data = self.to_dict()
        # toml has no null
        data["dispatch"]["solver"] = {
            k: v for k, v in data["dispatch"]["solver"].items() if v is not None
        }
        with open(path, "w") as f:
            toml.dump(data, f)

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def __str__(self) -> str:
        """Convert the config to a string"""
        return json.dumps(self.to_dict(), indent=4)
