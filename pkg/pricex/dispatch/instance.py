"""
Parameter bundle of one three-day rolling dispatch window.

Hourly parameters are arrays over the 72 hours of the horizon (day d hours
0..23, target day d+1 hours 24..47, day d+2 hours 48..71). Scalars are
broadcast on construction.
"""

from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Optional

import numpy as np

from pricex.errors import ModelError

HORIZON_DAYS = 3
HORIZON_HOURS = 72
TARGET_HOURS = range(24, 48)
SHARED_HOURS = 48  # hours of d and d+1


class ClusterKind(str, Enum):
    THERMAL = "thermal"
    RENEWABLE = "res"
    STORAGE_MID = "stm"
    STORAGE_LONG = "stl"
    HYDRO = "hr"
    BASELOAD = "base"


def _hourly(value, name) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(HORIZON_HOURS, float(arr))
    if arr.shape != (HORIZON_HOURS,):
        raise ModelError(f"{name} must be a scalar or have {HORIZON_HOURS} hourly values")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TechnologyCluster:
    """
    A capacity cluster of one technology in one zone.

    Parameters
    ----------
    id : str
    zone : str
    kind : ClusterKind
    cap : float or array
        Installed capacity in MW per hour
    vc_full : float or array
        Variable cost at full load in EUR/MWh
    vc_minload : float or array, optional
        Variable cost at minimum load in EUR/MWh; defaults to vc_full
    g_min : float, default=0
        Minimum load as a share of running capacity, in [0, 1)
    startup_cost : float, default=0
        EUR per MW started
    availability : float or array, default=1
        Availability factor
    outage : float or array, default=0
        Unavailable capacity in MW
    water_value : float or array, default=0
        Opportunity cost of stored water in EUR/MWh (stl and hr)
    wv_steps : tuple of (share, markup), default=((1.0, 0.0),)
        Step-wise merit order of stl/hr generation: each step offers
        share * available capacity at water_value + markup
    efficiency : float, default=1
        Full-cycle efficiency of mid-term storage, applied to charging
    cer : float, default=1/9
        Capacity-to-energy ratio of mid-term storage; energy capacity is cap / cer
    res_profile : float or array, default=0
        Feed-in profile of renewables as a share of capacity
    chp : bool, default=False
        Cluster covers the zone's CHP must-run obligation
    reserve : bool, default=False
        Cluster may provide primary and secondary control power
    """

    id: str
    zone: str
    kind: ClusterKind
    cap: np.ndarray
    vc_full: np.ndarray = 0.0
    vc_minload: Optional[np.ndarray] = None
    g_min: float = 0.0
    startup_cost: float = 0.0
    availability: np.ndarray = 1.0
    outage: np.ndarray = 0.0
    water_value: np.ndarray = 0.0
    wv_steps: tuple = ((1.0, 0.0),)
    efficiency: float = 1.0
    cer: float = 1 / 9
    res_profile: np.ndarray = 0.0
    chp: bool = False
    reserve: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ClusterKind(self.kind))
        for name in ("cap", "vc_full", "availability", "outage", "water_value", "res_profile"):
            object.__setattr__(self, name, _hourly(getattr(self, name), f"{self.id}.{name}"))
        vc_minload = self.vc_full if self.vc_minload is None else self.vc_minload
        object.__setattr__(self, "vc_minload", _hourly(vc_minload, f"{self.id}.vc_minload"))
        object.__setattr__(self, "wv_steps", tuple((float(s), float(m)) for s, m in self.wv_steps))

        if not 0 <= self.g_min < 1:
            raise ModelError(f"cluster {self.id}: g_min must lie in [0, 1), got {self.g_min}")
        if np.any(self.cap < 0):
            raise ModelError(f"cluster {self.id}: negative capacity")
        if np.any(self.outage > self.cap + 1e-9):
            raise ModelError(f"cluster {self.id}: outage exceeds capacity")
        if self.kind is ClusterKind.STORAGE_MID:
            if not 0 < self.efficiency <= 1:
                raise ModelError(f"cluster {self.id}: efficiency must lie in (0, 1]")
            if self.cer <= 0:
                raise ModelError(f"cluster {self.id}: cer must be positive")
        if self.startup_cost < 0:
            raise ModelError(f"cluster {self.id}: negative startup cost")
        if not np.isclose(sum(s for s, _ in self.wv_steps), 1.0):
            raise ModelError(f"cluster {self.id}: water value step shares must sum to 1")

    @property
    def available(self) -> np.ndarray:
        """cap * af - out, floored at zero."""
        return np.maximum(self.cap * self.availability - self.outage, 0.0)

    @property
    def partload_adder(self) -> np.ndarray:
        """(vc_ML - vc_FL) * g_min / (1 - g_min), charged on running but unused capacity."""
        return (self.vc_minload - self.vc_full) * self.g_min / (1 - self.g_min)

    @property
    def energy_capacity(self) -> np.ndarray:
        return self.cap / self.cer


@dataclass(frozen=True, eq=False)
class ZoneData:
    """
    Demand and obligations of one zone.

    `demand` has one row of 72 hourly values per scenario; the first 48
    hours must agree across scenarios.
    """

    zone: str
    demand: np.ndarray
    chp_mustrun: np.ndarray = 0.0
    reserve_primary: float = 0.0
    reserve_sec_pos: float = 0.0
    reserve_sec_neg: float = 0.0

    def __post_init__(self):
        demand = np.atleast_2d(np.asarray(self.demand, dtype=float))
        if demand.shape[1] != HORIZON_HOURS:
            raise ModelError(f"zone {self.zone}: demand needs {HORIZON_HOURS} hours per scenario")
        if np.any(demand < 0) or not np.all(np.isfinite(demand)):
            raise ModelError(f"zone {self.zone}: demand must be finite and non-negative")
        if np.any(np.abs(demand[:, :SHARED_HOURS] - demand[0, :SHARED_HOURS]) > 1e-9):
            raise ModelError(f"zone {self.zone}: demand of d and d+1 differs across scenarios")
        demand.setflags(write=False)
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "chp_mustrun", _hourly(self.chp_mustrun, f"{self.zone}.chp"))
        if min(self.reserve_primary, self.reserve_sec_pos, self.reserve_sec_neg) < 0:
            raise ModelError(f"zone {self.zone}: reserve requirements must be non-negative")

    @property
    def n_scenarios(self) -> int:
        return self.demand.shape[0]


@dataclass(frozen=True, eq=False)
class NtcMatrix:
    """Net transfer capacities per ordered zone pair; absent pairs have no line."""

    ntc: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for (a, b), values in self.ntc.items():
            if a == b:
                raise ModelError(f"ntc from zone {a} to itself")
            values = _hourly(values, f"ntc {a}->{b}")
            if np.any(values < 0):
                raise ModelError(f"ntc {a}->{b} is negative")
            cleaned[(a, b)] = values
        object.__setattr__(self, "ntc", cleaned)

    def capacity(self, a: str, b: str) -> np.ndarray:
        return self.ntc.get((a, b), np.zeros(HORIZON_HOURS))

    def pairs(self) -> list:
        return sorted(self.ntc)


@dataclass(frozen=True, eq=False)
class DispatchInstance:
    """
    Full parameter bundle of one rolling window starting on day `first_day`.

    Parameters
    ----------
    first_day : int
        Day index of d; the target day is first_day + 1
    zones : tuple of ZoneData
    clusters : tuple of TechnologyCluster
    ntc : NtcMatrix
    probabilities : tuple of float
        Scenario probabilities, one per demand row
    voll : float, default=3000
    curtc : float, default=20
    block_hours : int, default=4
        Hours per primary and secondary control power block
    nonanticipativity : str, default="shared"
        "shared": one set of variables for d and d+1; "scenario": every
        variable indexed by scenario
    initial_pon : dict, optional
        Running capacity per cluster id in the hour before the window
    """

    first_day: int
    zones: tuple
    clusters: tuple
    ntc: NtcMatrix = field(default_factory=NtcMatrix)
    probabilities: tuple = (1.0,)
    voll: float = 3000.0
    curtc: float = 20.0
    block_hours: int = 4
    nonanticipativity: str = "shared"
    initial_pon: Optional[dict] = None

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(self.zones))
        object.__setattr__(self, "clusters", tuple(self.clusters))
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))
        self.validate()

    def validate(self):
        if not np.isclose(sum(self.probabilities), 1.0) or min(self.probabilities) < 0:
            raise ModelError(f"scenario probabilities {self.probabilities} must sum to 1")
        names = [z.zone for z in self.zones]
        if len(set(names)) != len(names):
            raise ModelError("duplicate zone ids")
        for zone in self.zones:
            if zone.n_scenarios != len(self.probabilities):
                raise ModelError(
                    f"zone {zone.zone} has {zone.n_scenarios} demand scenarios, "
                    f"expected {len(self.probabilities)}"
                )
        ids = [c.id for c in self.clusters]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate cluster ids")
        for cluster in self.clusters:
            if cluster.zone not in names:
                raise ModelError(f"cluster {cluster.id} sits in unknown zone {cluster.zone}")
        for a, b in self.ntc.pairs():
            if a not in names or b not in names:
                raise ModelError(f"ntc {a}->{b} references an unknown zone")
        if self.block_hours < 1 or 24 % self.block_hours != 0:
            raise ModelError(f"block length {self.block_hours} h must divide 24")
        if self.nonanticipativity not in ("shared", "scenario"):
            raise ModelError(f"unknown non-anticipativity {self.nonanticipativity!r}")
        if self.voll <= 0 or self.curtc < 0:
            raise ModelError("voll must be positive and curtc non-negative")
        for zone in self.zones:
            chp_cap = sum(
                (c.available for c in self.clusters if c.zone == zone.zone and c.chp),
                np.zeros(HORIZON_HOURS),
            )
            if np.any(zone.chp_mustrun > chp_cap + 1e-9):
                raise ModelError(f"zone {zone.zone}: CHP must-run exceeds available CHP capacity")

    @property
    def n_scenarios(self) -> int:
        return len(self.probabilities)

    @property
    def target_day(self) -> int:
        return self.first_day + 1

    def zone(self, name: str) -> ZoneData:
        for zone in self.zones:
            if zone.zone == name:
                return zone
        raise KeyError(name)
