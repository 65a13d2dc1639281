"""
Reader of the CSV market bundle

Every file carries a header row; numeric columns state their unit in
brackets, e.g. ``load [MWh]``. Hourly files hold one row per local
wall-clock hour (hour-beginning ISO 8601 timestamps) and key column(s)
naming the zone, cluster or zone pair the value belongs to. Daylight
saving days are normalised to 24 hours: the repeated hour of a 25-hour day
is averaged, the missing hour of a 23-hour day is interpolated.
"""

import datetime as dt
import re
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from pricex.dispatch.instance import ClusterKind
from pricex.errors import CoverageError, SchemaError
from pricex.market import CLUSTER_COLUMNS, MarketData, parse_wv_steps
from pricex.timeseries import HOURS_PER_DAY, Calendar

logger = logger.bind(module="io")

INTERPOLATION_LIMIT = 3  # hours
CO2 = "co2"
FUEL_UNIT = "EUR/MWh_th"
CO2_UNIT = "EUR/t"

_HEADER = re.compile(r"^\s*(?P<name>[^\[\]]+?)\s*(?:\[(?P<unit>[^\]]*)\])?\s*$")
_TRUE = {"true", "1", "yes", "y", "t"}


@dataclass(frozen=True)
class HourlySchema:
    """Long-format hourly file: timestamp, key column(s) and one value column."""

    keys: tuple
    value: str
    unit: str
    frame: str  # MarketData attribute
    required: bool = True


HOURLY_FILES = {
    "load_actual": HourlySchema(("zone",), "load", "MWh", "load_actual"),
    "load_tso_forecast": HourlySchema(("zone",), "load", "MWh", "load_tso"),
    "res_forecast": HourlySchema(("cluster",), "profile", "p.u.", "res_profile"),
    "outages": HourlySchema(("cluster",), "outage", "MW", "outages"),
    "chp_mustrun": HourlySchema(("zone",), "mustrun", "MW", "chp"),
    "water_values": HourlySchema(("cluster",), "water_value", "EUR/MWh", "water_values"),
    "ntc": HourlySchema(("from_zone", "to_zone"), "ntc", "MW", "ntc", required=False),
    "wind_forecast": HourlySchema(("zone",), "wind", "MWh", "wind"),
    "prices_actual": HourlySchema(("zone",), "price", "EUR/MWh", "prices_actual"),
}

CLUSTER_UNITS = {
    "cap": "MW",
    "vc": "EUR/MWh",
    "co2_factor": "t/MWh_th",
    "startup_cost": "EUR/MW",
}
RESERVE_UNITS = {"primary": "MW", "sec_pos": "MW", "sec_neg": "MW"}

STATIC_FILES = ("clusters", "fuel_co2_prices", "reserves", "holidays")
BUNDLE_FILES = tuple(HOURLY_FILES) + STATIC_FILES


@dataclass
class _Audit:
    """Collects schema violations and coverage gaps of one bundle."""

    schema: list = field(default_factory=list)
    coverage: list = field(default_factory=list)

    def check(self):
        if self.schema:
            raise SchemaError(self.schema)
        if self.coverage:
            raise CoverageError("; ".join(self.coverage))


def split_header(column: str) -> tuple[str, str | None]:
    """'load [MWh]' -> ('load', 'MWh'); 'zone' -> ('zone', None)"""
    match = _HEADER.match(str(column))
    if match is None:
        return str(column).strip(), None
    return match.group("name"), match.group("unit")


def _read(path: Path, audit: _Audit) -> tuple[pd.DataFrame, dict] | tuple[None, None]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        audit.schema.append(f"{path.name}: unreadable ({e})")
        return None, None
    names, units = [], {}
    for column in frame.columns:
        name, unit = split_header(column)
        names.append(name)
        units[name] = unit
    frame.columns = names
    return frame, units


def _require_columns(file: str, frame, units, expected: dict, audit: _Audit) -> bool:
    """`expected` maps column name to its unit (None for unitless columns)."""
    ok = True
    for column, unit in expected.items():
        if column not in frame.columns:
            audit.schema.append(f"{file}: missing column {column!r}")
            ok = False
        elif unit is not None and units[column] != unit:
            audit.schema.append(
                f"{file}: column {column!r} has unit [{units[column]}], expected [{unit}]"
            )
            ok = False
    return ok


def _numeric(file: str, column: str, values: pd.Series, audit: _Audit) -> pd.Series:
    out = pd.to_numeric(values, errors="coerce")
    bad = out.isna() & values.notna()
    if bad.any():
        audit.schema.append(
            f"{file}: {int(bad.sum())} non-numeric value(s) in column {column!r}, "
            f"first {values[bad].iloc[0]!r}"
        )
    return out


def parse_timestamps(values: pd.Series) -> pd.Series:
    """Local wall-clock hour of ISO 8601 timestamps; offsets are ignored, bad text gives NaT."""
    text = values.astype(str).str.strip().str.slice(0, 16).str.replace("T", " ", regex=False)
    stamps = pd.to_datetime(text, format="%Y-%m-%d %H:%M", errors="coerce")
    return stamps.dt.floor("h")


def _ordinals(stamps: pd.Series, epoch: dt.date) -> np.ndarray:
    days = (stamps.dt.normalize() - pd.Timestamp(epoch)).dt.days.to_numpy()
    return days * HOURS_PER_DAY + stamps.dt.hour.to_numpy()


def _gap_runs(missing: pd.Series) -> int:
    """Length of the longest run of True values."""
    if not missing.any():
        return 0
    runs = (missing != missing.shift()).cumsum()[missing]
    return int(runs.value_counts().max())


def normalise_hourly(wide: pd.DataFrame, file: str, audit: _Audit) -> pd.DataFrame:
    """
    Reindex to every hour between the first and last stamp and fill short gaps.

    Interior gaps up to INTERPOLATION_LIMIT hours are interpolated linearly;
    longer gaps are reported as coverage problems. Leading and trailing
    missing hours of a column are left as NaN.
    """
    if wide.empty:
        return wide
    index = pd.RangeIndex(int(wide.index.min()), int(wide.index.max()) + 1, name="ordinal")
    full = wide.reindex(index)
    for column in full.columns:
        values = full[column]
        interior = values.isna() & values.ffill().notna() & values.bfill().notna()
        longest = _gap_runs(interior)
        if longest > INTERPOLATION_LIMIT:
            audit.coverage.append(
                f"{file}[{column}]: gap of {longest} hours exceeds the "
                f"interpolation limit of {INTERPOLATION_LIMIT}"
            )
    return full.interpolate(limit=INTERPOLATION_LIMIT, limit_area="inside")


def _long_to_wide(
    file: str, frame: pd.DataFrame, schema: HourlySchema, epoch: dt.date, audit: _Audit
) -> pd.DataFrame:
    stamps = parse_timestamps(frame["timestamp"])
    if stamps.isna().any():
        audit.schema.append(f"{file}: {int(stamps.isna().sum())} unparsable timestamp(s)")
    values = _numeric(file, schema.value, frame[schema.value], audit)
    keys = frame[schema.keys[0]].astype(str).str.strip()
    for column in schema.keys[1:]:
        keys = keys + "->" + frame[column].astype(str).str.strip()
    ok = stamps.notna()
    long = pd.DataFrame(
        {
            "ordinal": _ordinals(stamps[ok], epoch),
            "key": keys[ok].to_numpy(),
            "value": values[ok].to_numpy(),
        }
    )
    # repeated local hours of a 25-hour day are averaged
    wide = long.groupby(["ordinal", "key"])["value"].mean().unstack("key")
    wide.columns.name = None
    return normalise_hourly(wide.sort_index(), file, audit)


def _read_hourly(bundle: Path, audit: _Audit) -> dict:
    raw = {}
    for file, schema in HOURLY_FILES.items():
        path = bundle / f"{file}.csv"
        if not path.exists():
            if schema.required:
                audit.schema.append(f"missing required file {file}.csv")
            else:
                logger.warning(f"{file}.csv not found; zones are treated as islanded")
            continue
        frame, units = _read(path, audit)
        if frame is None:
            continue
        expected = {"timestamp": None, **{k: None for k in schema.keys}, schema.value: schema.unit}
        if _require_columns(file, frame, units, expected, audit):
            raw[file] = frame
    return raw


def _epoch(raw: dict) -> dt.date | None:
    if "load_actual" not in raw:
        return None
    stamps = parse_timestamps(raw["load_actual"]["timestamp"]).dropna()
    if stamps.empty:
        return None
    return stamps.min().date()


def read_clusters(path: Path, audit: _Audit) -> pd.DataFrame:
    frame, units = _read(path, audit)
    if frame is None:
        return pd.DataFrame()
    expected = {"id": None, "zone": None, "kind": None, "cap": "MW"}
    expected.update({c: u for c, u in CLUSTER_UNITS.items() if c in frame.columns})
    if not _require_columns("clusters", frame, units, expected, audit):
        return pd.DataFrame()

    if frame["id"].duplicated().any():
        duplicated = sorted(frame["id"][frame["id"].duplicated()])
        audit.schema.append(f"clusters: duplicate id(s) {duplicated}")
    kinds = {k.value for k in ClusterKind}
    unknown = sorted(set(frame["kind"]) - kinds)
    if unknown:
        audit.schema.append(f"clusters: unknown kind(s) {unknown}, expected one of {sorted(kinds)}")

    out = frame.set_index("id")
    for column, default in CLUSTER_COLUMNS.items():
        if column in ("zone", "kind"):
            continue
        if column not in out.columns:
            out[column] = default
        elif column in ("chp", "reserve"):
            out[column] = out[column].astype(str).str.strip().str.lower().isin(_TRUE)
        elif column == "fuel":
            out[column] = out[column].fillna("").astype(str).str.strip()
        elif column == "wv_steps":
            out[column] = out[column].fillna("1:0")
            for cid, text in out[column].items():
                try:
                    steps = parse_wv_steps(text)
                except ValueError:
                    audit.schema.append(f"clusters: cannot parse wv_steps {text!r} of {cid}")
                    continue
                if not np.isclose(sum(s for s, _ in steps), 1.0):
                    audit.schema.append(f"clusters: wv_steps shares of {cid} do not sum to 1")
        else:
            values = _numeric("clusters", column, out[column], audit)
            out[column] = values if column == "eta_min" or default is None else values.fillna(default)
    if (out["cap"] < 0).any():
        audit.schema.append(f"clusters: negative capacity for {list(out.index[out['cap'] < 0])}")
    return out


def read_fuel_prices(path: Path, epoch: dt.date, audit: _Audit) -> pd.DataFrame:
    """Wide daily table: date plus one column per fuel in EUR/MWh_th and co2 in EUR/t."""
    frame, units = _read(path, audit)
    if frame is None:
        return pd.DataFrame()
    if not _require_columns("fuel_co2_prices", frame, units, {"date": None}, audit):
        return pd.DataFrame()
    dates = pd.to_datetime(frame["date"], format="%Y-%m-%d", errors="coerce")
    if dates.isna().any():
        audit.schema.append(f"fuel_co2_prices: {int(dates.isna().sum())} unparsable date(s)")
    out = pd.DataFrame(index=pd.Index((dates - pd.Timestamp(epoch)).dt.days, name="day"))
    for column in frame.columns:
        if column == "date":
            continue
        unit = CO2_UNIT if column == CO2 else FUEL_UNIT
        if units[column] != unit:
            audit.schema.append(
                f"fuel_co2_prices: column {column!r} has unit [{units[column]}], expected [{unit}]"
            )
        out[column] = _numeric("fuel_co2_prices", column, frame[column], audit).to_numpy()
    out = out[out.index.notna()]
    out.index = out.index.astype(int)
    return out.sort_index()


def read_reserves(path: Path, audit: _Audit) -> pd.DataFrame:
    frame, units = _read(path, audit)
    expected = {"zone": None, **RESERVE_UNITS}
    if frame is None or not _require_columns("reserves", frame, units, expected, audit):
        return pd.DataFrame(columns=list(RESERVE_UNITS))
    out = frame.set_index("zone")
    for column in RESERVE_UNITS:
        out[column] = _numeric("reserves", column, out[column], audit)
    return out


def read_holidays(path: Path, epoch: dt.date, audit: _Audit) -> frozenset:
    frame, units = _read(path, audit)
    if frame is None or not _require_columns("holidays", frame, units, {"date": None}, audit):
        return frozenset()
    dates = pd.to_datetime(frame["date"], format="%Y-%m-%d", errors="coerce")
    if dates.isna().any():
        audit.schema.append(f"holidays: {int(dates.isna().sum())} unparsable date(s)")
    days = (dates.dropna() - pd.Timestamp(epoch)).dt.days
    return frozenset(int(d) for d in days)


def _check_references(zones, clusters, frames, fuel_prices, audit: _Audit):
    zone_set = set(zones)
    for file, schema in HOURLY_FILES.items():
        if file not in frames or schema.keys == ("cluster",):
            continue
        if schema.keys == ("zone",):
            unknown = set(frames[file].columns) - zone_set
        else:
            unknown = {z for pair in frames[file].columns for z in pair.split("->")} - zone_set
        if unknown:
            audit.schema.append(f"{file}: unknown zone(s) {sorted(unknown)}")
    if clusters.empty:
        return
    unknown = set(clusters["zone"]) - zone_set
    if unknown:
        audit.schema.append(f"clusters: unknown zone(s) {sorted(unknown)}")
    for file in ("res_forecast", "outages", "water_values"):
        if file in frames:
            unknown = set(frames[file].columns) - set(clusters.index)
            if unknown:
                audit.schema.append(f"{file}: unknown cluster(s) {sorted(unknown)}")
    fuels = set(clusters["fuel"]) - {""}
    if (clusters["co2_factor"] > 0).any():
        fuels.add(CO2)
    missing = sorted(fuels - set(fuel_prices.columns))
    if missing:
        audit.schema.append(f"fuel_co2_prices: no price column for {missing}")


def ingest(bundle_dir) -> MarketData:
    """
    Read and validate a CSV bundle.

    Parameters
    ----------
    bundle_dir : str or Path
        Directory holding one CSV file per parameter class

    Returns
    -------
    MarketData
        Hourly frames indexed by hour ordinal relative to the first day of
        the actual load

    Raises
    ------
    SchemaError
        Listing every missing file, missing column, wrong unit, unparsable
        value and unknown reference found in the bundle
    CoverageError
        If an hourly series has an interior gap longer than three hours
    """
    bundle = Path(bundle_dir)
    if not bundle.is_dir():
        raise SchemaError([f"bundle directory {bundle} does not exist"])
    logger.info(f"Reading market bundle from {bundle}")
    audit = _Audit()

    for file in STATIC_FILES:
        if not (bundle / f"{file}.csv").exists():
            audit.schema.append(f"missing required file {file}.csv")
    raw = _read_hourly(bundle, audit)
    epoch = _epoch(raw)
    if epoch is None:
        audit.schema.append("load_actual: no parsable timestamps")
        audit.check()

    frames = {
        file: _long_to_wide(file, frame, HOURLY_FILES[file], epoch, audit)
        for file, frame in raw.items()
    }
    clusters = pd.DataFrame()
    fuel_prices = pd.DataFrame()
    reserves = pd.DataFrame(columns=list(RESERVE_UNITS))
    holidays = frozenset()
    if (bundle / "clusters.csv").exists():
        clusters = read_clusters(bundle / "clusters.csv", audit)
    if (bundle / "fuel_co2_prices.csv").exists():
        fuel_prices = read_fuel_prices(bundle / "fuel_co2_prices.csv", epoch, audit)
    if (bundle / "reserves.csv").exists():
        reserves = read_reserves(bundle / "reserves.csv", audit)
    if (bundle / "holidays.csv").exists():
        holidays = read_holidays(bundle / "holidays.csv", epoch, audit)

    zones = tuple(sorted(frames["load_actual"].columns)) if "load_actual" in frames else ()
    _check_references(zones, clusters, frames, fuel_prices, audit)
    audit.check()

    market = MarketData(
        calendar=Calendar(epoch, holidays),
        zones=zones,
        clusters=clusters,
        fuel_prices=fuel_prices,
        reserves=reserves,
        **{HOURLY_FILES[file].frame: frame for file, frame in frames.items()},
    )
    logger.success(
        f"Bundle loaded: {len(zones)} zone(s), {len(clusters)} cluster(s), "
        f"{epoch + dt.timedelta(days=market.first_day)} to "
        f"{epoch + dt.timedelta(days=market.last_day)}"
    )
    return market
