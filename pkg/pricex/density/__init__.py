from pricex.density.quantile import (
    QuantileModel,
    fit_quantile_regression,
    pinball_loss,
    predict_quantile,
)
from pricex.density.scenarios import (
    ScenarioSet,
    build_scenarios,
    fit_scenario_models,
    scenario_probabilities,
)

__all__ = [
    "QuantileModel",
    "ScenarioSet",
    "build_scenarios",
    "fit_quantile_regression",
    "fit_scenario_models",
    "pinball_loss",
    "predict_quantile",
    "scenario_probabilities",
]
