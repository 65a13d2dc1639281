from pricex.lp.program import LinearProgram, LPBuilder
from pricex.lp.solver import LPSolution, LPStatus, sensitivity, solve
from pricex.lp.lpfile import format_lp, write_lp

__all__ = [
    "LinearProgram",
    "LPBuilder",
    "LPSolution",
    "LPStatus",
    "format_lp",
    "sensitivity",
    "solve",
    "write_lp",
]
