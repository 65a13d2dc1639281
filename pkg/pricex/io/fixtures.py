"""
Synthetic market bundles

`simulate_bundle` writes a complete CSV bundle drawn from the generative
models below, so that every stage can be exercised without external data.

Load
    Actual load of a zone is scale * daily(h) * weekly(wd) * annual(doy)
    plus AR(1) noise (coefficient 0.9, 1 % of scale); Saturdays are 12 %,
    Sundays and holidays 18 % below working days.
TSO forecast
    The TSO error (actual minus forecast) is a weekly (hour, weekday)
    pattern of 1 % of scale plus a SARMA(1,1)x(1,1)_24 process with
    coefficients phi1 0.8, phi24 0.3, omega1 0.2, omega24 -0.2 and
    innovations of 0.8 % of scale.
Renewables
    Wind feed-in is a logistic transform of a Gaussian AR(1) (0.97 per
    hour); solar follows a daylight bell scaled by season and daily cloud
    cover. The zone's wind forecast is wind capacity times the wind profile.
Fuels
    Daily log prices of uranium, lignite, coal, gas and CO2 follow
    mean-reverting AR(1) processes around fixed levels.
Outages
    Each thermal cluster starts an outage with probability 3 % per day,
    removing 10-25 % of its capacity for 2-8 days.
Prices
    The reference price of every hour is the merit-order clearing price of
    the residual load (load net of renewable and base load feed-in) over
    the available thermal capacity and the hydro reservoirs offered at
    their water value. The actual price adds an hourly univariate ARX
    error with phi (0.5, 0.7, 0, 0.15, 0.05, 0.2), holiday effect
    -4 EUR/MWh and wind effect -1 EUR/MWh per 10 GWh, driven by Gaussian
    innovations of `price_noise` EUR/MWh.
"""

import datetime as dt
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from pricex.load import SarmaParams, simulate
from pricex.market import CLUSTER_COLUMNS
from pricex.postproc import UvArxParams, simulate_uv
from pricex.timeseries import HOURS_PER_DAY, HOURS_PER_WEEK, Calendar

logger = logger.bind(module="io")

FLOAT_FORMAT = "%.10g"
DEFAULT_SCALE = 20000.0  # MWh
ZONE_SCALE = {"A": 60000.0, "B": 15000.0}
HOLIDAYS_MMDD = ("01-01", "05-01", "10-03", "12-25", "12-26")

VOLL = 3000.0
CURTC = 20.0

FUEL_LEVELS = {"uranium": 3.0, "lignite": 5.0, "coal": 9.0, "gas": 20.0, "co2": 15.0}
FUEL_VOLATILITY = {"uranium": 0.002, "lignite": 0.005, "coal": 0.01, "gas": 0.03, "co2": 0.02}

# id suffix: kind, capacity per 60 GWh of peak scale, further cluster columns
CLUSTER_TEMPLATE = {
    "nuclear": ("thermal", 8000, dict(fuel="uranium", eta_full=0.33, g_min=0.5, startup_cost=80)),
    "lignite": (
        "thermal",
        15000,
        dict(
            fuel="lignite",
            eta_full=0.38,
            eta_min=0.33,
            co2_factor=0.36,
            g_min=0.4,
            startup_cost=50,
            reserve=True,
        ),
    ),
    "coal": (
        "thermal",
        18000,
        dict(
            fuel="coal",
            eta_full=0.42,
            eta_min=0.37,
            co2_factor=0.34,
            g_min=0.35,
            startup_cost=40,
            reserve=True,
            chp=True,
        ),
    ),
    "ccgt": (
        "thermal",
        20000,
        dict(
            fuel="gas",
            eta_full=0.55,
            eta_min=0.48,
            co2_factor=0.2,
            g_min=0.3,
            startup_cost=30,
            reserve=True,
            chp=True,
        ),
    ),
    "ocgt": ("thermal", 20000, dict(fuel="gas", eta_full=0.36, co2_factor=0.2, startup_cost=10)),
    "oil": ("thermal", 3000, dict(vc=180.0)),
    "wind": ("res", 30000, dict()),
    "solar": ("res", 25000, dict()),
    "ror": ("base", 2000, dict(availability=0.8)),
    "psp": ("stm", 5000, dict(efficiency=0.75, cer=1 / 9)),
    "hydro": ("hr", 2000, dict(wv_steps="0.5:0;0.5:15")),
}


def _timestamps(epoch: dt.date, n_days: int) -> np.ndarray:
    index = pd.date_range(pd.Timestamp(epoch), periods=n_days * HOURS_PER_DAY, freq="h")
    return index.strftime("%Y-%m-%dT%H:%M").to_numpy()


def _ar1(rng, n, phi, sigma, size=None) -> np.ndarray:
    shape = (n,) if size is None else (n, size)
    shocks = rng.normal(0.0, sigma, shape)
    out = np.zeros(shape)
    for t in range(1, n):
        out[t] = phi * out[t - 1] + shocks[t]
    return out


def _clock(n_days: int, calendar: Calendar):
    days = np.repeat(np.arange(n_days), HOURS_PER_DAY)
    hours = np.tile(np.arange(1, HOURS_PER_DAY + 1), n_days)
    weekdays = calendar.weekdays(days)
    holidays = calendar.holiday_mask(days)
    doy = np.array([calendar.date(d).timetuple().tm_yday for d in days])
    return days, hours, weekdays, holidays, doy


def simulate_load(rng, scale: float, calendar: Calendar, n_days: int) -> tuple:
    """Actual load and TSO day-ahead forecast of one zone."""
    _, hours, weekdays, holidays, doy = _clock(n_days, calendar)
    daily = 1 + 0.15 * np.sin(2 * np.pi * (hours - 9) / HOURS_PER_DAY)
    weekly = np.where(weekdays == 6, 0.88, 1.0)
    weekly = np.where((weekdays == 7) | holidays, 0.82, weekly)
    annual = 1 + 0.1 * np.cos(2 * np.pi * doy / 365.25)
    actual = scale * daily * weekly * annual + _ar1(rng, len(hours), 0.9, 0.01 * scale)

    pattern = 0.01 * scale * np.cos(2 * np.pi * (hours + 3 * weekdays) / HOURS_PER_DAY)
    params = SarmaParams(phi1=0.8, phi24=0.3, omega1=0.2, omega24=-0.2, sigma2=1.0)
    psi = rng.normal(0.0, 0.008 * scale, len(hours) + HOURS_PER_WEEK)
    error = pattern + simulate(psi, params)[HOURS_PER_WEEK:]
    return actual, actual - error


def simulate_profiles(rng, calendar: Calendar, n_days: int) -> tuple:
    """Wind and solar capacity factors of one zone."""
    _, hours, _, _, doy = _clock(n_days, calendar)
    latent = _ar1(rng, len(hours), 0.97, 0.25) - 0.8
    wind = 0.02 + 0.93 / (1 + np.exp(-latent))
    daylight = np.clip(np.sin(np.pi * (hours - 6) / 14), 0.0, None)
    season = 0.6 - 0.3 * np.cos(2 * np.pi * doy / 365.25)
    clouds = np.repeat(rng.uniform(0.4, 1.0, n_days), HOURS_PER_DAY)
    return wind, daylight * season * clouds


def simulate_fuel_prices(rng, n_days: int) -> pd.DataFrame:
    out = {}
    for fuel, level in FUEL_LEVELS.items():
        log_dev = _ar1(rng, n_days, 0.98, FUEL_VOLATILITY[fuel])
        out[fuel] = level * np.exp(log_dev)
    return pd.DataFrame(out)


def simulate_outages(rng, cap: float, n_days: int) -> np.ndarray:
    out = np.zeros(n_days)
    day = 0
    while day < n_days:
        if rng.random() < 0.03:
            length = int(rng.integers(2, 9))
            out[day : day + length] = rng.uniform(0.10, 0.25) * cap
            day += length
        else:
            day += 1
    return np.repeat(out, HOURS_PER_DAY)


def merit_order_prices(costs, available, residual, voll=VOLL, curtc=CURTC) -> np.ndarray:
    """
    Clearing price of every hour by sort and fill.

    Parameters
    ----------
    costs, available : ndarray, shape (n_hours, n_units)
        Marginal cost in EUR/MWh and available capacity in MW
    residual : ndarray, shape (n_hours,)
        Demand left for the dispatchable units

    Returns
    -------
    ndarray
        Cost of the marginal unit; -curtc when nothing is needed and voll
        when the capacity falls short
    """
    order = np.argsort(costs, axis=1, kind="stable")
    costs = np.take_along_axis(costs, order, axis=1)
    filled = np.cumsum(np.take_along_axis(available, order, axis=1), axis=1)
    marginal = (filled < residual[:, None]).sum(axis=1)
    padded = np.column_stack([costs, np.full(len(residual), voll)])
    prices = np.take_along_axis(padded, marginal[:, None], axis=1)[:, 0]
    return np.where(residual <= 0, -curtc, prices)


def _cluster_table(zones, scales) -> pd.DataFrame:
    rows = []
    for zone in zones:
        share = scales[zone] / ZONE_SCALE["A"]
        for name, (kind, cap, extra) in CLUSTER_TEMPLATE.items():
            row = {"id": f"{zone}_{name}", "zone": zone, "kind": kind, "cap": cap * share}
            row.update(extra)
            rows.append(row)
    table = pd.DataFrame(rows)
    for column, default in CLUSTER_COLUMNS.items():
        if default is None:
            continue
        if column not in table.columns:
            table[column] = default
        elif column != "eta_min":
            table[column] = table[column].fillna(default)
    return table.set_index("id")


def _unit_costs(clusters: pd.DataFrame, fuels: pd.DataFrame, water: dict, n_days: int) -> dict:
    """Hourly full-load marginal cost of each dispatchable cluster."""
    out = {}
    for cid, row in clusters.iterrows():
        if row["kind"] == "thermal":
            if row["fuel"]:
                base = fuels[row["fuel"]].to_numpy() + row["co2_factor"] * fuels["co2"].to_numpy()
                daily = base / row["eta_full"] + row["vc"]
            else:
                daily = np.full(n_days, row["vc"])
            out[cid] = np.repeat(daily, HOURS_PER_DAY)
        elif row["kind"] == "hr":
            out[cid] = water[cid]
    return out


def _write_hourly(path: Path, stamps, keys: tuple, column: str, values: dict):
    frames = []
    for key, series in values.items():
        key = key if isinstance(key, tuple) else (key,)
        frame = pd.DataFrame({"timestamp": stamps})
        for name, k in zip(keys, key):
            frame[name] = k
        frame[column] = series
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def simulate_bundle(
    out_dir,
    seed: int = 0,
    start: str = "2018-01-01",
    n_days: int = 120,
    zones: tuple = ("A", "B"),
    price_noise: float = 3.0,
) -> Path:
    """
    Write a synthetic CSV bundle.

    Parameters
    ----------
    out_dir : str or Path
        Target directory, created if needed
    seed : int, default=0
        Seed of every random draw; the same seed gives identical files
    start : str, default="2018-01-01"
        First day (ISO date)
    n_days : int, default=120
        Number of days
    zones : tuple of str, default=("A", "B")
        Zone ids; consecutive zones are coupled by 3 GW in both directions
    price_noise : float, default=3.0
        Standard deviation of the price error innovations in EUR/MWh

    Returns
    -------
    Path
        The bundle directory
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    epoch = dt.date.fromisoformat(start)
    dates = [epoch + dt.timedelta(days=d) for d in range(n_days)]
    holiday_days = [d for d, date in enumerate(dates) if date.strftime("%m-%d") in HOLIDAYS_MMDD]
    calendar = Calendar(epoch, frozenset(holiday_days))
    stamps = _timestamps(epoch, n_days)
    n_hours = n_days * HOURS_PER_DAY
    scales = {z: ZONE_SCALE.get(z, DEFAULT_SCALE) for z in zones}
    logger.info(f"Simulating a {n_days}-day bundle for zones {list(zones)} (seed {seed})")

    clusters = _cluster_table(zones, scales)
    fuels = simulate_fuel_prices(rng, n_days)

    load_actual, load_tso, profiles, wind_mwh, chp = {}, {}, {}, {}, {}
    _, _, _, holidays, doy = _clock(n_days, calendar)
    for zone in zones:
        load_actual[zone], load_tso[zone] = simulate_load(rng, scales[zone], calendar, n_days)
        wind, solar = simulate_profiles(rng, calendar, n_days)
        profiles[f"{zone}_wind"] = wind
        profiles[f"{zone}_solar"] = solar
        wind_mwh[zone] = clusters.loc[f"{zone}_wind", "cap"] * wind
        chp[zone] = 0.08 * scales[zone] * (1.2 + np.cos(2 * np.pi * doy / 365.25)) / 2.2

    thermal = clusters.index[clusters["kind"] == "thermal"]
    outages = {cid: simulate_outages(rng, clusters.loc[cid, "cap"], n_days) for cid in thermal}
    gas_ccgt = np.repeat(fuels["gas"].to_numpy() / 0.55, HOURS_PER_DAY)
    water = {
        cid: 0.9 * gas_ccgt + rng.normal(0.0, 1.0, n_hours)
        for cid in clusters.index[clusters["kind"] == "hr"]
    }

    costs = _unit_costs(clusters, fuels, water, n_days)
    error_params = UvArxParams(
        phi=(0.5, 0.7, 0.0, 0.15, 0.05, 0.2), omega=(0.0, 0.0, -4.0, -1e-4), sigma2=price_noise**2
    )
    prices = {}
    for zone in zones:
        in_zone = clusters[clusters["zone"] == zone]
        feed_in = np.zeros(n_hours)
        for cid, row in in_zone.iterrows():
            if row["kind"] == "res":
                feed_in += row["cap"] * profiles[cid]
            elif row["kind"] == "base":
                feed_in += row["cap"] * row["availability"]
        units = [cid for cid in in_zone.index if cid in costs]
        available = np.column_stack(
            [
                in_zone.loc[cid, "cap"] * in_zone.loc[cid, "availability"]
                - outages.get(cid, np.zeros(n_hours))
                for cid in units
            ]
        )
        reference = merit_order_prices(
            np.column_stack([costs[cid] for cid in units]),
            np.maximum(available, 0.0),
            load_actual[zone] - feed_in,
        )
        exog = np.column_stack(
            [np.zeros(n_hours), np.zeros(n_hours), holidays.astype(float), wind_mwh[zone]]
        )
        error = simulate_uv(rng.normal(0.0, price_noise, n_hours), exog, error_params)
        prices[zone] = reference + error

    _write_hourly(out / "load_actual.csv", stamps, ("zone",), "load [MWh]", load_actual)
    _write_hourly(out / "load_tso_forecast.csv", stamps, ("zone",), "load [MWh]", load_tso)
    _write_hourly(out / "res_forecast.csv", stamps, ("cluster",), "profile [p.u.]", profiles)
    _write_hourly(out / "outages.csv", stamps, ("cluster",), "outage [MW]", outages)
    _write_hourly(out / "chp_mustrun.csv", stamps, ("zone",), "mustrun [MW]", chp)
    _write_hourly(out / "water_values.csv", stamps, ("cluster",), "water_value [EUR/MWh]", water)
    _write_hourly(out / "wind_forecast.csv", stamps, ("zone",), "wind [MWh]", wind_mwh)
    _write_hourly(out / "prices_actual.csv", stamps, ("zone",), "price [EUR/MWh]", prices)
    ntc = {}
    for a, b in zip(zones[:-1], zones[1:]):
        ntc[(a, b)] = np.full(n_hours, 3000.0)
        ntc[(b, a)] = np.full(n_hours, 3000.0)
    if ntc:
        _write_hourly(out / "ntc.csv", stamps, ("from_zone", "to_zone"), "ntc [MW]", ntc)

    table = clusters.reset_index().rename(
        columns={
            "cap": "cap [MW]",
            "vc": "vc [EUR/MWh]",
            "co2_factor": "co2_factor [t/MWh_th]",
            "startup_cost": "startup_cost [EUR/MW]",
        }
    )
    table.to_csv(out / "clusters.csv", index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    fuel_table = fuels.rename(
        columns={f: f"{f} [EUR/t]" if f == "co2" else f"{f} [EUR/MWh_th]" for f in fuels.columns}
    )
    fuel_table.insert(0, "date", [date.isoformat() for date in dates])
    fuel_table.to_csv(
        out / "fuel_co2_prices.csv", index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )

    reserves = pd.DataFrame(
        {
            "zone": list(zones),
            "primary [MW]": [0.01 * scales[z] for z in zones],
            "sec_pos [MW]": [0.033 * scales[z] for z in zones],
            "sec_neg [MW]": [0.03 * scales[z] for z in zones],
        }
    )
    reserves.to_csv(
        out / "reserves.csv", index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    pd.DataFrame(
        {"date": [calendar.date(d).isoformat() for d in holiday_days], "name": "holiday"}
    ).to_csv(out / "holidays.csv", index=False, lineterminator="\n")

    logger.success(f"Synthetic bundle written to {out}")
    return out
