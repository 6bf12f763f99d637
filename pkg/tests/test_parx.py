import numpy as np
import pytest

from meterflow import timeutil
from meterflow.analytics.exogenous import exogenous_transform
from meterflow.analytics.parx import ParxModel, disaggregate, parx_fit, parx_predict, predict_day
from meterflow.errors import (
    DependencyError,
    InsufficientDataError,
    SingularFitError,
    ValidationError,
)
from meterflow.ingest.synthetic import generate_series
from meterflow.model import series_from_values
from meterflow.store import ReadingStore

H0 = timeutil.parse_hour_timestamp("2014-01-06T00:00:00Z")  # a Monday


def make_model(order=3, intercept=0.0, ar=(0.0, 0.0, 0.0), exo=(0.0, 0.0, 0.0)):
    return ParxModel(
        meter_id="m",
        order=order,
        intercepts=np.full(24, float(intercept)),
        ar=np.tile(np.asarray(ar, dtype=float), (24, 1)),
        exo=np.tile(np.asarray(exo, dtype=float), (24, 1)),
        fitted=np.ones(24, dtype=bool),
        diagnostics=tuple([None] * 24),
        train_start_hour=0,
        train_days=0,
    )


# ---------------------------------------------------------------------------
# fitting


def test_noisy_recovery_within_tolerance(strong_spec):
    series, labels = next(generate_series(strong_spec(days=400, noise=0.05, seed=21)))
    model = parx_fit(series)
    assert np.abs(model.ar - np.asarray(labels.ar_coeffs)).max() < 0.05
    assert np.abs(model.exo - np.asarray(labels.temp_coeffs)).max() < 0.05
    assert np.abs(model.intercepts - np.asarray(labels.weekday_intercepts)).max() < 0.05
    assert model.fitted.all()
    assert all(d is not None for d in model.diagnostics)


def test_noise_free_recovery_is_exact(strong_spec):
    series, labels = next(generate_series(strong_spec(days=400, noise=0.0, seed=3)))
    model = parx_fit(series)
    assert np.abs(model.ar - np.asarray(labels.ar_coeffs)).max() < 1e-6
    assert np.abs(model.exo - np.asarray(labels.temp_coeffs)).max() < 1e-6
    assert np.abs(model.intercepts - np.asarray(labels.weekday_intercepts)).max() < 1e-6


def test_constant_series_dead_band_fixed_point():
    c = 1.8
    n = 40 * 24
    series = series_from_values("m", H0, np.full(n, c), np.full(n, 18.0))
    model = parx_fit(series)
    # any exact solution satisfies intercept = c * (1 - sum(ar)); prediction
    # returns the constant
    for s in range(24):
        assert model.intercepts[s] == pytest.approx(c * (1 - model.ar[s].sum()), abs=1e-9)
        assert parx_predict(model, np.full(3, c), exogenous_transform(18.0), s) == pytest.approx(c)


def test_insufficient_days_rejected():
    series = series_from_values("m", H0, np.ones(10 * 24), np.full(10 * 24, 18.0))
    with pytest.raises(InsufficientDataError):
        parx_fit(series)


def test_constant_temperature_with_varying_load_is_singular():
    rng = np.random.default_rng(0)
    n = 60 * 24
    values = rng.uniform(0.5, 2.0, n)
    series = series_from_values("m", H0, values, np.full(n, 25.0))  # cooling pinned at 5
    with pytest.raises(SingularFitError) as err:
        parx_fit(series)
    assert err.value.season is not None
    # non-strict mode leaves seasons unfitted instead
    model = parx_fit(series, strict=False)
    assert not model.fitted.any()


def test_gap_rows_are_excluded():
    rng = np.random.default_rng(1)
    n = 60 * 24
    values = rng.uniform(0.5, 2.0, n)
    temps = 10 + 5 * np.sin(np.arange(n) / 24)
    gaps = np.zeros(n, dtype=bool)
    gaps[24 * 30 : 24 * 30 + 6] = True
    clean = series_from_values("m", H0, values, temps)
    gappy = series_from_values("m", H0, values, temps, gap_mask=gaps)
    m_clean = parx_fit(clean, diagnostics=True)
    m_gappy = parx_fit(gappy, diagnostics=True)
    for s in range(6):
        # the gapped hours' rows disappear from those seasons' training sets
        assert m_gappy.diagnostics[s].n < m_clean.diagnostics[s].n


# ---------------------------------------------------------------------------
# prediction


def test_prediction_is_intercept_when_all_coefficients_zero():
    model = make_model(intercept=1.2)
    out = parx_predict(model, np.array([9.0, 5.0, 4.4]), exogenous_transform(25.0), season=7)
    assert out == 1.2


def test_copy_last_day_model():
    model = make_model(ar=(1.0, 0.0, 0.0))
    out = parx_predict(model, np.array([2.0, 7.7, 1.1]), exogenous_transform(0.0), season=0)
    assert out == 2.0


def test_hand_evaluated_prediction():
    # realistic residential fitted magnitudes: intercept 0.504,
    # lags (0.316, 0.108, 0.133), drivers (0.194, -0.029, 0.052)
    model = make_model(intercept=0.504, ar=(0.316, 0.108, 0.133), exo=(0.194, -0.029, 0.052))
    out = parx_predict(model, np.ones(3), exogenous_transform(25.0), season=12)
    expected = 0.504 + 0.316 + 0.108 + 0.133 + 5 * 0.194
    assert out == pytest.approx(expected, abs=1e-12)


def test_prediction_clamped_at_zero():
    model = make_model(intercept=-5.0)
    assert parx_predict(model, np.zeros(3), exogenous_transform(18.0), 0) == 0.0


def test_wrong_history_length_rejected():
    model = make_model()
    with pytest.raises(ValidationError):
        parx_predict(model, np.ones(2), exogenous_transform(18.0), 0)


def test_unfitted_season_rejected():
    model = make_model()
    model.fitted.setflags(write=True)
    model.fitted[5] = False
    with pytest.raises(DependencyError):
        parx_predict(model, np.ones(3), exogenous_transform(18.0), 5)


def test_predict_day_matches_scalar_predictions():
    rng = np.random.default_rng(2)
    model = make_model(intercept=0.4, ar=(0.2, 0.1, 0.05), exo=(0.1, 0.05, 0.02))
    history = rng.uniform(0.5, 2.0, (3, 24))
    temps = rng.uniform(-5, 30, 24)
    vector = predict_day(model, history, temps)
    for s in range(24):
        scalar = parx_predict(model, history[:, s], exogenous_transform(float(temps[s])), s)
        assert vector[s] == pytest.approx(scalar, abs=1e-12)


# ---------------------------------------------------------------------------
# disaggregation


def test_dead_band_everything_is_activity_load():
    rng = np.random.default_rng(3)
    n = 40 * 24
    values = rng.uniform(0.5, 2.0, n)
    temps = np.full(n, 18.0)
    series = series_from_values("m", H0, values, temps)
    model = make_model(intercept=1.0, ar=(0.1, 0.0, 0.0), exo=(0.2, 0.1, 0.05))
    result = disaggregate(model, series)
    assert result.temp_dependent == pytest.approx(np.zeros(n))
    assert result.temp_independent == pytest.approx(values)


def test_known_driver_share():
    n = 20 * 24
    values = np.full(n, 3.0)
    temps = np.full(n, 25.0)
    series = series_from_values("m", H0, values, temps)
    model = make_model(exo=(0.2, 0.0, 0.0))
    result = disaggregate(model, series)
    assert result.temp_dependent == pytest.approx(np.full(n, 1.0))  # 5 degrees * 0.2
    assert result.temp_independent == pytest.approx(np.full(n, 2.0))


def test_conservation_when_no_clamp(strong_spec):
    series, _ = next(generate_series(strong_spec(days=150, noise=0.05, seed=5)))
    model = parx_fit(series.slice_hours(series.start_hour, series.start_hour + 120 * 24))
    result = disaggregate(model, series)
    ok = result.available & ~result.clamped
    assert ok.sum() > 0.9 * len(series)
    total = result.temp_independent[ok] + result.temp_dependent[ok]
    assert total == pytest.approx(series.consumption[ok], abs=1e-9)


def test_unfitted_seasons_flagged_unavailable():
    n = 30 * 24
    series = series_from_values("m", H0, np.ones(n), np.full(n, 18.0))
    model = make_model()
    model.fitted.setflags(write=True)
    model.fitted[4] = False
    result = disaggregate(model, series)
    by_hour = result.available.reshape(-1, 24)
    assert not by_hour[:, 4].any()
    assert by_hour[:, 5].all()


def test_write_back_to_store():
    store = ReadingStore()
    n = 30 * 24
    rng = np.random.default_rng(4)
    values = rng.uniform(1.0, 2.0, n)
    series = series_from_values("m", H0, values, np.full(n, 25.0))
    store.insert_series(series)
    model = make_model(exo=(0.1, 0.0, 0.0))
    disaggregate(model, store.query_series("m", H0, H0 + n), store=store)
    stored = store.query_series("m", H0, H0 + n)
    assert stored.temp_independent == pytest.approx(values - 0.5)
