"""
In-memory market data bundle read from the normalised CSV directory.

Hourly frames are indexed by the hour ordinal (hours since hour 1 of day 0
of the calendar epoch); daily frames by day index.
"""

from dataclasses import dataclass
from dataclasses import field

import numpy as np
import pandas as pd

from pricex.errors import CoverageError, ModelError
from pricex.timeseries import HOURS_PER_DAY, Calendar, HourlySeries, HourStamp

# columns of the cluster table, with defaults for the optional ones
CLUSTER_COLUMNS = {
    "zone": None,
    "kind": None,
    "cap": None,
    "vc": 0.0,
    "fuel": "",
    "eta_full": 1.0,
    "eta_min": np.nan,
    "co2_factor": 0.0,
    "g_min": 0.0,
    "startup_cost": 0.0,
    "availability": 1.0,
    "efficiency": 1.0,
    "cer": 1 / 9,
    "chp": False,
    "reserve": False,
    "wv_steps": "1:0",
}

HOURLY_FRAMES = (
    "load_actual",
    "load_tso",
    "res_profile",
    "outages",
    "chp",
    "water_values",
    "ntc",
    "wind",
    "prices_actual",
)


def parse_wv_steps(text) -> tuple:
    """'0.5:0;0.5:15' -> ((0.5, 0.0), (0.5, 15.0))"""
    if text is None or (isinstance(text, float) and np.isnan(text)) or str(text).strip() == "":
        return ((1.0, 0.0),)
    steps = []
    for part in str(text).split(";"):
        share, markup = part.split(":")
        steps.append((float(share), float(markup)))
    return tuple(steps)


@dataclass
class MarketData:
    calendar: Calendar
    zones: tuple
    clusters: pd.DataFrame
    fuel_prices: pd.DataFrame
    reserves: pd.DataFrame

    load_actual: pd.DataFrame
    load_tso: pd.DataFrame
    res_profile: pd.DataFrame = field(default_factory=pd.DataFrame)
    outages: pd.DataFrame = field(default_factory=pd.DataFrame)
    chp: pd.DataFrame = field(default_factory=pd.DataFrame)
    water_values: pd.DataFrame = field(default_factory=pd.DataFrame)
    ntc: pd.DataFrame = field(default_factory=pd.DataFrame)
    wind: pd.DataFrame = field(default_factory=pd.DataFrame)
    prices_actual: pd.DataFrame = field(default_factory=pd.DataFrame)

    def __post_init__(self):
        self.zones = tuple(self.zones)
        for name in ("load_actual", "load_tso"):
            frame = getattr(self, name)
            missing = [z for z in self.zones if z not in frame.columns]
            if missing:
                raise CoverageError(f"{name} has no column for zone(s) {missing}")
        for column, default in CLUSTER_COLUMNS.items():
            if column not in self.clusters.columns:
                if default is None:
                    raise ModelError(f"cluster table lacks column {column!r}")
                self.clusters[column] = default

    @property
    def first_day(self) -> int:
        return int(self.load_actual.index.min()) // HOURS_PER_DAY

    @property
    def last_day(self) -> int:
        return int(self.load_actual.index.max()) // HOURS_PER_DAY

    @property
    def days(self) -> range:
        return range(self.first_day, self.last_day + 1)

    def covers(self, first_day: int, last_day: int) -> bool:
        return self.first_day <= first_day and last_day <= self.last_day

    def hourly(
        self, frame: str, column: str, first_day: int, n_days: int, default=None
    ) -> np.ndarray:
        """
        Values of one column for whole days.

        A missing column yields `default` when one is given; missing or
        non-finite rows raise CoverageError.
        """
        data = getattr(self, frame)
        if column not in data.columns:
            if default is None:
                raise CoverageError(f"{frame} has no column {column!r}")
            return np.full(n_days * HOURS_PER_DAY, float(default))
        start = first_day * HOURS_PER_DAY
        index = np.arange(start, start + n_days * HOURS_PER_DAY)
        values = data[column].reindex(index).to_numpy(dtype=float)
        if not np.all(np.isfinite(values)):
            n_bad = int((~np.isfinite(values)).sum())
            raise CoverageError(
                f"{frame}[{column}] lacks {n_bad} hour(s) between day {first_day} "
                f"and day {first_day + n_days - 1}"
            )
        return values

    def series(
        self, frame: str, column: str, first_day: int = None, last_day: int = None, unit="MWh"
    ) -> HourlySeries:
        first_day = self.first_day if first_day is None else first_day
        last_day = self.last_day if last_day is None else last_day
        values = self.hourly(frame, column, first_day, last_day - first_day + 1)
        return HourlySeries(HourStamp(first_day, 1), values, self.calendar, unit)

    def daily_fuel_price(self, fuel: str, first_day: int, n_days: int) -> np.ndarray:
        if fuel not in self.fuel_prices.columns:
            raise CoverageError(f"no price series for fuel {fuel!r}")
        prices = self.fuel_prices[fuel].reindex(range(first_day, first_day + n_days))
        prices = prices.to_numpy(dtype=float)
        if not np.all(np.isfinite(prices)):
            raise CoverageError(
                f"fuel price {fuel!r} missing between day {first_day} and {first_day + n_days - 1}"
            )
        return np.repeat(prices, HOURS_PER_DAY)

    def variable_costs(
        self, cluster_id: str, first_day: int, n_days: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        Hourly full-load and minimum-load variable cost of a cluster.

        Thermal clusters with a fuel pay (fuel + co2_factor * co2) / eta at
        full-load efficiency eta_full and minimum-load efficiency eta_min.
        Other clusters use the constant `vc` column.
        """
        row = self.clusters.loc[cluster_id]
        n_hours = n_days * HOURS_PER_DAY
        if not row["fuel"]:
            vc = np.full(n_hours, float(row["vc"]))
            return vc, vc
        fuel = self.daily_fuel_price(row["fuel"], first_day, n_days)
        co2 = self.daily_fuel_price("co2", first_day, n_days) if row["co2_factor"] else 0.0
        base = fuel + float(row["co2_factor"]) * co2
        vc_full = base / float(row["eta_full"]) + float(row["vc"])
        eta_min = row["eta_min"]
        if eta_min is None or np.isnan(eta_min):
            return vc_full, vc_full
        return vc_full, base / float(eta_min) + float(row["vc"])

    def reserve_requirement(self, zone: str) -> tuple[float, float, float]:
        if zone not in self.reserves.index:
            return 0.0, 0.0, 0.0
        row = self.reserves.loc[zone]
        return tuple(float(row.get(k, 0.0)) for k in ("primary", "sec_pos", "sec_neg"))

    def ntc_pairs(self) -> list[tuple[str, str]]:
        pairs = []
        for column in self.ntc.columns:
            a, b = column.split("->")
            pairs.append((a, b))
        return pairs
