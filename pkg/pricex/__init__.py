# pricex/__init__.py
"""
PriceX: Hybrid day-ahead electricity price forecasting

This package combines statistical load and price models with a
fundamental dispatch model of an interconnected power system.

Main Functions
-------------
preprocess_load : Improve the TSO load forecast and forecast the day after
build_scenarios : Low, expected and high load scenarios of the third window day
rolling_run : Price estimators from the rolling dispatch model
forecast_submodels : Error-corrected price forecasts of the six ARX sub-models
predict_probabilistic : Quantile forecasts by quantile regression averaging
Pipeline : Resumable day-by-day run over a date range

"""

from .config import PipelineConfig
from .config import LoadConfig
from .config import DensityConfig
from .config import DispatchConfig
from .config import SolverConfig
from .config import PostprocConfig
from .config import EvaluationConfig
from .market import MarketData
from .load import preprocess_load
from .density import build_scenarios
from .dispatch import rolling_run
from .postproc import forecast_submodels
from .postproc import predict_probabilistic
from .evaluation import slice_report
from .io import ingest
from .io import simulate_bundle
from .core import Pipeline

__all__ = [
    # main
    "Pipeline",
    # Configuration
    "PipelineConfig",
    "LoadConfig",
    "DensityConfig",
    "DispatchConfig",
    "SolverConfig",
    "PostprocConfig",
    "EvaluationConfig",
    # Core data structure
    "MarketData",
    # Main analytical functions
    "preprocess_load",
    "build_scenarios",
    "rolling_run",
    "forecast_submodels",
    "predict_probabilistic",
    "slice_report",
    # Data
    "ingest",
    "simulate_bundle",
]

__version__ = "0.1.0"
