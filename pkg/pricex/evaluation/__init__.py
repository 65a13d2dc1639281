from pricex.evaluation.dm import DmResult, dm_matrix, dm_test
from pricex.evaluation.metrics import coverage_histogram, interval_widths, mae, pinball, rmse
from pricex.evaluation.report import (
    EvalReport,
    error_correlations,
    improvement_table,
    load_improvement_table,
    price_groups,
    slice_report,
    submodel_rmse_by_hour,
)

__all__ = [
    "DmResult",
    "EvalReport",
    "coverage_histogram",
    "dm_matrix",
    "dm_test",
    "error_correlations",
    "improvement_table",
    "interval_widths",
    "load_improvement_table",
    "mae",
    "pinball",
    "price_groups",
    "rmse",
    "slice_report",
    "submodel_rmse_by_hour",
]
