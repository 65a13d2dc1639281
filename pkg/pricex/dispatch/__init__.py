from pricex.dispatch.instance import (
    HORIZON_HOURS,
    TARGET_HOURS,
    ClusterKind,
    DispatchInstance,
    NtcMatrix,
    TechnologyCluster,
    ZoneData,
)
from pricex.dispatch.model import DispatchModelBuilder, build_lp
from pricex.dispatch.prices import DispatchResult, extract_prices, solve_dispatch
from pricex.dispatch.rolling import (
    RollingRun,
    WindowLoad,
    assemble_instance,
    naive_window_load,
    rolling_run,
)

__all__ = [
    "HORIZON_HOURS",
    "TARGET_HOURS",
    "ClusterKind",
    "DispatchInstance",
    "DispatchModelBuilder",
    "DispatchResult",
    "NtcMatrix",
    "RollingRun",
    "TechnologyCluster",
    "WindowLoad",
    "ZoneData",
    "assemble_instance",
    "build_lp",
    "extract_prices",
    "naive_window_load",
    "rolling_run",
    "solve_dispatch",
]
