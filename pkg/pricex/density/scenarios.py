from dataclasses import dataclass

import numpy as np
from loguru import logger

from pricex.config import DensityConfig, SolverConfig
from pricex.density.quantile import QuantileModel, fit_quantile_regression
from pricex.errors import ConfigError
from pricex.timeseries import HourlySeries, require_aligned

logger = logger.bind(module="density")

DEFAULT_WEIGHTS = (1 / 6, 2 / 3, 1 / 6)


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """Three d+2 load scenarios and their weights (low, expected, high)."""

    low: HourlySeries
    expected: HourlySeries
    high: HourlySeries
    weights: tuple = DEFAULT_WEIGHTS
    crossed: np.ndarray = None

    def __post_init__(self):
        require_aligned(self.low, self.expected)
        require_aligned(self.low, self.high)
        if len(self.weights) != 3 or not np.isclose(sum(self.weights), 1.0):
            raise ConfigError(f"scenario weights {self.weights} must be three values summing to 1")
        if np.any(self.low.values > self.high.values):
            raise ValueError("low scenario exceeds high scenario")
        crossed = (
            np.zeros(len(self.low), dtype=bool)
            if self.crossed is None
            else np.asarray(self.crossed, dtype=bool)
        )
        object.__setattr__(self, "crossed", crossed)

    @property
    def any_crossed(self) -> bool:
        return bool(self.crossed.any())

    def as_list(self) -> list[HourlySeries]:
        return [self.low, self.expected, self.high]


def design(point: np.ndarray) -> np.ndarray:
    """Regressor rows [1, point]."""
    point = np.asarray(point, dtype=float)
    return np.column_stack([np.ones_like(point), point])


def fit_scenario_models(
    forecasts_2da: HourlySeries,
    actual: HourlySeries,
    config: DensityConfig | None = None,
    solver: SolverConfig | None = None,
) -> tuple[QuantileModel, QuantileModel]:
    """Fit the low and high quantile models on aligned (forecast, actual) history."""
    config = config or DensityConfig()
    require_aligned(forecasts_2da, actual)
    X = design(forecasts_2da.values)
    low = fit_quantile_regression(X, actual.values, config.low_quantile, solver)
    high = fit_quantile_regression(X, actual.values, config.high_quantile, solver)
    logger.debug(f"scenario models: low beta={low.beta}, high beta={high.beta}")
    return low, high


def build_scenarios(
    point2da: HourlySeries,
    low_model: QuantileModel,
    high_model: QuantileModel,
    weights: tuple = DEFAULT_WEIGHTS,
) -> ScenarioSet:
    """
    Low, expected and high d+2 load scenarios.

    The expected scenario is the point forecast itself and is not forced
    between the other two. Hours where the low prediction exceeds the high
    one are swapped and flagged.
    """
    X = design(point2da.values)
    low = low_model.predict(X)
    high = high_model.predict(X)
    crossed = low > high
    if crossed.any():
        logger.warning(f"quantile crossing in {int(crossed.sum())} hour(s); swapping low and high")
        low, high = np.where(crossed, high, low), np.where(crossed, low, high)
    return ScenarioSet(
        low=point2da.with_values(low),
        expected=point2da,
        high=point2da.with_values(high),
        weights=tuple(weights),
        crossed=crossed,
    )


def scenario_probabilities(weights: tuple, weighting: str = "density") -> np.ndarray:
    """Probabilities of the (low, expected, high) scenarios in the dispatch model."""
    if weighting == "density":
        probs = np.asarray(weights, dtype=float)
    elif weighting == "equal":
        probs = np.full(3, 1 / 3)
    else:
        raise ConfigError(f"unknown scenario weighting {weighting!r}")
    if not np.isclose(probs.sum(), 1.0):
        raise ConfigError(f"scenario probabilities {probs} do not sum to 1")
    return probs
