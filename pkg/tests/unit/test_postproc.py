# tests/unit/test_postproc.py

import itertools

import numpy as np
import pytest

from pricex.config import PostprocConfig
from pricex.density import QuantileModel
from pricex.errors import MissingSubModel, NonConvergence, OutOfRange, TooFewDays
from pricex.postproc import (
    SUBMODEL_NAMES,
    MvArxParams,
    PriceErrorPanel,
    ProbabilisticForecast,
    Segment,
    SubModelForecasts,
    UvArxParams,
    build_panel,
    combine_point,
    fit_mv,
    fit_price_qra,
    fit_qra_models,
    fit_uv,
    forecast_mv,
    forecast_submodels,
    forecast_uv,
    negative_price_probability,
    predict_probabilistic,
    simulate_uv,
)
from pricex.postproc.qra import peak_hours
from pricex.timeseries import HourlySeries

GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))


def make_panel(eps, calendar, holidays=None, wind=None, first_day=0):
    eps = np.asarray(eps, dtype=float)
    n_days = eps.shape[0]
    return PriceErrorPanel(
        first_day=first_day,
        eps=eps,
        wind=np.zeros_like(eps) if wind is None else wind,
        holidays=np.zeros(n_days, dtype=bool) if holidays is None else holidays,
        calendar=calendar,
    )


def simulated_uv_panel(params, n_days, rng, calendar, holiday_rate=0.05, burn=50):
    total = n_days + burn
    holidays = rng.random(total) < holiday_rate
    wind = rng.normal(0, 10, (total, 24))
    exog = np.zeros((total * 24, 4))
    exog[:, 2] = np.repeat(holidays, 24)
    exog[:, 3] = wind.ravel()
    y = simulate_uv(rng.normal(size=total * 24), exog, params)
    return make_panel(y.reshape(total, 24)[burn:], calendar, holidays[burn:], wind[burn:])


def simulated_mv_panel(coefs, n_days, rng, calendar, holiday_rate=0.1, burn=50):
    c0, phi1, phi2, w1, w2, w3, w4 = coefs
    total = n_days + burn
    holidays = rng.random(total) < holiday_rate
    wind = rng.normal(0, 5, (total, 24))
    eps = np.zeros((total, 24))
    for d in range(7, total):
        prev = eps[d - 1]
        eps[d] = (
            c0
            + phi1 * prev
            + phi2 * eps[d - 7]
            + w1 * prev.min()
            + w2 * prev.max()
            + w3 * holidays[d]
            + w4 * wind[d]
            + rng.normal(size=24)
        )
    return make_panel(eps[burn:], calendar, holidays[burn:], wind[burn:])


def reference_uv_forecast(params, panel, day):
    """Plain-python recursion: filter the innovations, then 24 steps ahead"""
    c = params.coefficients()
    origin = (day - panel.first_day) * 24
    y = list(panel.hourly_errors()[:origin]) + [0.0] * 24
    exog = panel.hourly_exog()

    def mean(t):
        value = c[0] + c[1] * y[t - 1] + c[2] * y[t - 2] + c[3] * y[t - 24] + c[4] * y[t - 168]
        for k in range(4):
            value += c[6 + k] * exog[t, k]
        return value

    psi = [0.0] * origin
    for t in range(168, origin):
        psi[t] = y[t] - mean(t) - c[5] * psi[t - 1]
    for k in range(24):
        t = origin + k
        y[t] = mean(t) + (c[5] * psi[t - 1] if k == 0 else 0.0)
    return np.array(y[origin:])


# univariate model


def test_uv_constant(calendar, rng):
    panel = make_panel(rng.normal(size=(10, 24)), calendar)
    params = UvArxParams(phi=(4.2, 0, 0, 0, 0, 0))
    np.testing.assert_allclose(forecast_uv(params, panel, 9), 4.2)


def test_uv_weekly_copy(calendar, rng):
    eps = rng.normal(size=(12, 24))
    panel = make_panel(eps, calendar)
    params = UvArxParams(phi=(0, 0, 0, 0, 1.0, 0))
    np.testing.assert_allclose(forecast_uv(params, panel, 11), eps[4])


def test_uv_forecast_matches_reference(calendar, rng):
    eps = rng.normal(size=(30, 24))
    wind = rng.normal(0, 10, (30, 24))
    holidays = np.zeros(30, dtype=bool)
    holidays[29] = True
    panel = make_panel(eps, calendar, holidays, wind)
    params = UvArxParams(
        phi=(0.3, 0.4, -0.1, 0.2, 0.1, 0.5), omega=(0.05, -0.05, 1.5, 0.02)
    )
    np.testing.assert_allclose(
        forecast_uv(params, panel, 29), reference_uv_forecast(params, panel, 29), atol=1e-8
    )


def test_uv_parameter_recovery(calendar):
    true = UvArxParams(phi=(0.2, 0.3, 0.1, 0.1, 0.1, 0.3), omega=(0.1, 0.1, 1.5, 0.02))
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        fitted = fit_uv(simulated_uv_panel(true, 400, rng, calendar), 52)
        # intercept and holiday dummy see few effective observations
        close = np.r_[
            np.abs(np.subtract(fitted.phi[1:], true.phi[1:])),
            np.abs(np.subtract(fitted.omega[:2], true.omega[:2])),
            abs(fitted.omega[3] - true.omega[3]),
        ]
        hits += fitted.converged and bool(np.all(close <= 0.1))
    assert hits >= 18


def test_uv_window_length_only_selects_rows(calendar, rng):
    panel = make_panel(rng.normal(size=(40, 24)), calendar)
    short, long = fit_uv(panel, 44), fit_uv(panel, 52)
    np.testing.assert_array_equal(short.coefficients(), long.coefficients())


def test_uv_strict_nonconvergence(calendar, rng):
    true = UvArxParams(phi=(0.0, 0.5, 0.0, 0.0, 0.0, 0.6))
    panel = simulated_uv_panel(true, 60, rng, calendar, holiday_rate=0.0)
    with pytest.raises(NonConvergence):
        fit_uv(panel, 8, maxiter=1, strict=True)
    assert not fit_uv(panel, 8, maxiter=1).converged


def test_uv_needs_a_week_of_history(calendar, rng):
    eps = rng.normal(size=(21, 24))
    eps[12] = np.nan
    panel = make_panel(eps, calendar)
    with pytest.raises(OutOfRange):
        forecast_uv(UvArxParams(), panel, 5)
    with pytest.raises(OutOfRange):
        forecast_uv(UvArxParams(), panel, 15)
    assert np.all(np.isfinite(forecast_uv(UvArxParams(phi=(1, 0, 0, 0, 0, 0.5)), panel, 20)))


def test_uv_filter_skips_unknown_days(calendar, rng):
    eps = rng.normal(size=(30, 24))
    eps[3] = np.nan
    panel = make_panel(eps, calendar)
    params = UvArxParams(phi=(0.1, 0.2, 0.0, 0.0, 0.3, 0.5))
    assert np.all(np.isfinite(forecast_uv(params, panel, 29)))


def test_uv_params_validation():
    with pytest.raises(ValueError):
        UvArxParams(phi=(0, 0, 0))
    with pytest.raises(ValueError):
        UvArxParams(sigma2=-1.0)
    coefs = np.arange(10, dtype=float)
    assert UvArxParams.from_coefficients(coefs).omega == (6.0, 7.0, 8.0, 9.0)


# multivariate model


def test_mv_holiday_dummy(calendar, rng):
    holidays = np.zeros(10, dtype=bool)
    holidays[9] = True
    panel = make_panel(rng.normal(size=(10, 24)), calendar, holidays)
    params = MvArxParams.from_hour_coefficients(omega3=10.0)
    np.testing.assert_allclose(forecast_mv(params, panel, 9), 10.0)
    np.testing.assert_allclose(forecast_mv(params, panel, 8), 0.0)


def test_mv_daily_copy(calendar, rng):
    eps = rng.normal(size=(10, 24))
    panel = make_panel(eps, calendar)
    params = MvArxParams.from_hour_coefficients(phi1=1.0)
    np.testing.assert_allclose(forecast_mv(params, panel, 9), eps[8])


def test_mv_parameter_recovery(calendar):
    true = np.array([0.5, 0.4, 0.2, 0.1, 0.1, 2.0, 0.05])
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        fitted = fit_mv(simulated_mv_panel(true, 400, rng, calendar), 52)
        means = fitted.coefs[:, 1:].mean(axis=0)
        hits += not fitted.degenerate.any() and bool(np.all(np.abs(means - true[1:]) <= 0.1))
    assert hits >= 18


def test_mv_flags_rank_deficient_hours(calendar, rng):
    panel = make_panel(rng.normal(size=(40, 24)), calendar)
    fitted = fit_mv(panel, 4)
    # no holidays and no wind in the window
    assert fitted.degenerate.all()
    np.testing.assert_allclose(fitted.coefs[:, 5:], 0.0, atol=1e-12)


def test_mv_window_length_only_selects_rows(calendar, rng):
    panel = make_panel(rng.normal(size=(40, 24)), calendar)
    np.testing.assert_array_equal(fit_mv(panel, 44).coefs, fit_mv(panel, 52).coefs)


def test_mv_params_validation():
    with pytest.raises(ValueError):
        MvArxParams(coefs=np.zeros((23, 7)), sigma2=0.0)
    with pytest.raises(ValueError):
        MvArxParams.from_hour_coefficients(phi9=1.0)


# panel


def test_build_panel_marks_unpublished_days(calendar, make_series, rng):
    estimated = make_series(rng.normal(50, 5, 5 * 24), day=10)
    actual = make_series(rng.normal(50, 5, 3 * 24), day=10)
    panel = build_panel(actual, estimated)

    assert panel.first_day == 10
    assert panel.last_known_day == 12
    assert np.all(np.isnan(panel.eps[3:]))
    np.testing.assert_allclose(
        panel.eps[:3].ravel(), actual.values - estimated.values[: 3 * 24]
    )
    np.testing.assert_array_equal(panel.wind, 0.0)


def test_panel_lagged_extremes(calendar):
    eps = np.tile(np.arange(24, dtype=float), (3, 1))
    eps[1] *= 2
    panel = make_panel(eps, calendar)
    assert np.isnan(panel.eps_min_prev[0])
    np.testing.assert_array_equal(panel.eps_max_prev[1:], [23.0, 46.0])
    assert panel.hourly_exog().shape == (72, 4)


def test_panel_fit_days(calendar, rng):
    panel = make_panel(rng.normal(size=(30, 24)), calendar, first_day=100)
    assert panel.fit_days(10) == range(120, 130)
    assert panel.fit_days(365) == range(107, 130)
    with pytest.raises(OutOfRange):
        panel.fit_days(10, last_day=105)


# combination


def six_forecasts(values_by_name, day=0):
    return SubModelForecasts(
        day=day, base=np.zeros(24), prices={k: np.full(24, v) for k, v in values_by_name.items()}
    )


def test_combine_identical():
    v = np.linspace(10, 40, 24)
    six = SubModelForecasts(day=0, base=np.zeros(24), prices={n: v for n in SUBMODEL_NAMES})
    np.testing.assert_allclose(combine_point(six), v)


def test_combine_mean_and_symmetry():
    values = [0, 0, 0, 6, 6, 6]
    np.testing.assert_allclose(combine_point(six_forecasts(dict(zip(SUBMODEL_NAMES, values)))), 3)

    rng = np.random.default_rng(3)
    raw = rng.normal(size=6)
    reference = combine_point(six_forecasts(dict(zip(SUBMODEL_NAMES, raw))))
    for perm in itertools.islice(itertools.permutations(raw), 0, 720, 97):
        out = combine_point(six_forecasts(dict(zip(SUBMODEL_NAMES, perm))))
        np.testing.assert_allclose(out, reference, rtol=1e-12)
        assert raw.min() <= out[0] <= raw.max()


def test_combine_missing_submodel():
    five = six_forecasts({n: 1.0 for n in SUBMODEL_NAMES[:5]}, day=7)
    assert five.missing() == ["mv52"]
    with pytest.raises(MissingSubModel):
        combine_point(five)


def test_forecast_submodels(calendar, rng):
    panel = make_panel(rng.normal(size=(60, 24)), calendar)
    base = np.full(24, 50.0)
    six = forecast_submodels(panel, 59, base, PostprocConfig(maxiter=50))

    assert six.names == SUBMODEL_NAMES
    assert combine_point(six).shape == (24,)
    np.testing.assert_array_equal(six.base, base)


def test_post_processing_reduces_rmse(calendar, rng):
    true = UvArxParams(phi=(3.0, 0.5, 0.1, 0.1, 0.1, 0.2))
    panel = simulated_uv_panel(true, 380, rng, calendar, holiday_rate=0.0)
    base = np.full(24, 40.0)
    config = PostprocConfig(window_weeks=(44, 48, 52), maxiter=100)

    raw_err, post_err = [], []
    for day in range(370, 380):
        six = forecast_submodels(panel, day, base, config)
        actual = base + panel.eps[day]
        raw_err.append(actual - base)
        post_err.append(actual - combine_point(six))
    rmse_raw = np.sqrt(np.mean(np.square(raw_err)))
    rmse_post = np.sqrt(np.mean(np.square(post_err)))
    assert rmse_post < 0.85 * rmse_raw


# quantile regression averaging


def qra_history(rng, n_days, first_day=0, spread=10.0):
    history = []
    for day in range(first_day, first_day + n_days):
        level = rng.normal(0, spread, 24)
        prices = {name: level + rng.normal(0, 1, 24) for name in SUBMODEL_NAMES}
        history.append(SubModelForecasts(day=day, base=level, prices=prices))
    return history


def actual_prices(history, calendar, noise=None):
    matrix = np.array([combine_point(f) for f in history])
    if noise is not None:
        matrix = matrix + noise(matrix.shape)
    return HourlySeries.from_days(history[0].day, matrix, calendar, unit="EUR/MWh")


def test_qra_perfect_regressor(calendar, rng):
    history = qra_history(rng, 60)
    actual = HourlySeries.from_days(
        0, np.array([f.prices["uv44"] for f in history]), calendar, unit="EUR/MWh"
    )
    for q in (0.1, 0.5, 0.9):
        for segment in Segment:
            model = fit_price_qra(history, actual, q, segment)
            np.testing.assert_allclose(model.beta, [0, 1, 0, 0, 0, 0, 0], atol=1e-6)
            assert model.loss < 1e-5


def test_qra_median(calendar, rng):
    history = qra_history(rng, 120)
    actual = actual_prices(history, calendar, noise=lambda shape: rng.uniform(-1, 1, shape))
    model = fit_price_qra(history, actual, 0.5, Segment.OFFPEAK)

    X = np.vstack([np.column_stack([np.ones(24), f.matrix()]) for f in history])
    mean = np.concatenate([combine_point(f) for f in history])
    assert np.quantile(np.abs(model.predict(X) - mean), 0.95) < 0.2


def test_qra_segments(calendar, rng):
    history = qra_history(rng, 140)
    shift = 5.0
    peak = np.array([peak_hours(calendar, f.day) for f in history])
    actual = actual_prices(
        history, calendar, noise=lambda shape: shift * peak + rng.uniform(-1, 1, shape)
    )
    peak_model = fit_price_qra(history, actual, 0.5, Segment.PEAK)
    off_model = fit_price_qra(history, actual, 0.5, Segment.OFFPEAK)
    assert peak_model.beta[0] - off_model.beta[0] == pytest.approx(shift, abs=0.3)


def test_qra_needs_history(calendar, rng):
    actual = actual_prices(qra_history(rng, 3), calendar)
    with pytest.raises(TooFewDays):
        fit_price_qra([], actual, 0.5, Segment.PEAK)


def constant_models(intercepts, levels):
    models = {}
    for q, b in zip(levels, intercepts):
        for segment in Segment:
            models[(q, segment)] = QuantileModel(q=q, beta=np.r_[b, np.zeros(6)])
    return models


def test_predict_rearranges_crossing_quantiles(calendar, rng):
    six = qra_history(rng, 1, first_day=3)[0]
    forecast = predict_probabilistic(constant_models([5.0, 3.0], (0.4, 0.6)), six, calendar)

    assert forecast.rearranged.all()
    np.testing.assert_array_equal(forecast.quantile(0.4), 3.0)
    np.testing.assert_array_equal(forecast.quantile(0.6), 5.0)
    np.testing.assert_allclose(forecast.point, combine_point(six))


def test_predict_identity_models(calendar, rng):
    six = qra_history(rng, 1)[0]
    models = {
        (q, s): QuantileModel(q=q, beta=[0, 1, 0, 0, 0, 0, 0]) for q in GRID for s in Segment
    }
    forecast = predict_probabilistic(models, six, calendar)

    assert not forecast.rearranged.any()
    np.testing.assert_allclose(forecast.values, np.tile(six.prices["uv44"][:, None], (1, 19)))
    np.testing.assert_allclose(forecast.interval_width(), 0.0)
    # day 0 is a Monday
    assert forecast.peak.sum() == 12


def test_qra_interval_coverage(calendar, rng):
    def noise(shape):
        return rng.normal(0, 2, shape)

    train = qra_history(rng, 200)
    models = fit_qra_models(train, actual_prices(train, calendar, noise), (0.05, 0.95))
    assert set(models) == {(q, s) for q in (0.05, 0.95) for s in Segment}

    test = qra_history(rng, 210, first_day=200)
    actual = actual_prices(test, calendar, noise).as_days()
    inside = []
    for f, y in zip(test, actual):
        forecast = predict_probabilistic(models, f, calendar)
        inside.append((y >= forecast.quantile(0.05)) & (y <= forecast.quantile(0.95)))
    assert np.size(inside) >= 5000
    assert np.mean(inside) == pytest.approx(0.90, abs=0.03)


def grid_forecast(row):
    return ProbabilisticForecast(
        day=0,
        levels=GRID,
        values=np.tile(row, (24, 1)),
        point=np.zeros(24),
        peak=np.zeros(24, dtype=bool),
        rearranged=np.zeros(24, dtype=bool),
    )


def test_negative_price_probability():
    levels = np.asarray(GRID)

    # q45 = -1 and q50 = +1
    f = grid_forecast((levels - 0.475) * 40)
    assert negative_price_probability(f, 1) == pytest.approx(0.475)

    for row in (levels * 10 + 1, 0.2 + (levels - 0.05) * 10):
        p = negative_price_probability(grid_forecast(row), 5)
        assert 0.0 <= p <= 0.05
    assert negative_price_probability(grid_forecast(0.2 + (levels - 0.05) * 10), 5) == (
        pytest.approx(0.03)
    )

    p = negative_price_probability(grid_forecast(levels * 10 - 100), 24)
    assert 0.95 <= p <= 1.0

    with pytest.raises(OutOfRange):
        negative_price_probability(f, 25)


def test_probabilistic_forecast_validation():
    with pytest.raises(ValueError):
        grid_forecast(-np.asarray(GRID))
    with pytest.raises(OutOfRange):
        grid_forecast(np.asarray(GRID)).quantile(0.33)
