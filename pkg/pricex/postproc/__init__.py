from pricex.postproc.combine import (
    SUBMODEL_NAMES,
    SubModelForecasts,
    combine_point,
    forecast_submodels,
    submodel_names,
)
from pricex.postproc.mv import MvArxParams, fit_mv, forecast_mv
from pricex.postproc.panel import PriceErrorPanel, build_panel
from pricex.postproc.qra import (
    ProbabilisticForecast,
    Segment,
    fit_price_qra,
    fit_qra_models,
    negative_price_probability,
    predict_probabilistic,
)
from pricex.postproc.uv import UvArxParams, fit_uv, forecast_uv, simulate_uv, uv_innovations

__all__ = [
    "SUBMODEL_NAMES",
    "MvArxParams",
    "PriceErrorPanel",
    "ProbabilisticForecast",
    "Segment",
    "SubModelForecasts",
    "UvArxParams",
    "build_panel",
    "combine_point",
    "fit_mv",
    "fit_price_qra",
    "fit_qra_models",
    "fit_uv",
    "forecast_mv",
    "forecast_submodels",
    "forecast_uv",
    "negative_price_probability",
    "predict_probabilistic",
    "simulate_uv",
    "submodel_names",
    "uv_innovations",
]
