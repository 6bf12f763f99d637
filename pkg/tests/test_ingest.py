import numpy as np
import pytest

from meterflow import timeutil
from meterflow.errors import ConfigError, ParseError, ValidationError
from meterflow.ingest import (
    GeneratorSpec,
    SeedProfile,
    anonymize_readings,
    generate_series,
    generate_synthetic,
    join_weather,
    parse_meter_csv,
    parse_weather_csv,
    pseudonym,
)
from meterflow.ingest.synthetic import generate_labels
from meterflow.store import ReadingStore
from meterflow.analytics.exogenous import exogenous_matrix

H0 = timeutil.parse_hour_timestamp("2014-01-01T00:00:00Z")


# ---------------------------------------------------------------------------
# CSV parsing


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_meter_csv(tmp_path):
    path = write(
        tmp_path,
        "m.csv",
        "meter_id,timestamp,kwh\n"
        "m1,2014-01-01T00:00:00Z,1.5\n"
        "m1,2014-01-01T01:00:00Z,2.0\n"
        "m2,2014-01-01T00:00:00Z,0.25\n",
    )
    rows = parse_meter_csv(path)
    assert len(rows) == 3
    assert rows[0].meter_id == "m1" and rows[0].consumption == 1.5
    assert rows[0].temperature is None


def test_sub_hour_timestamp_names_line(tmp_path):
    path = write(
        tmp_path,
        "m.csv",
        "meter_id,timestamp,kwh\nm1,2014-01-01T00:30:00Z,1.0\n",
    )
    with pytest.raises(ParseError) as err:
        parse_meter_csv(path)
    assert err.value.line == 2


def test_skip_errors_mode_drops_bad_rows(tmp_path):
    path = write(
        tmp_path,
        "m.csv",
        "meter_id,timestamp,kwh\n"
        "m1,2014-01-01T00:00:00Z,1.0\n"
        "m1,not-a-time,1.0\n"
        "m1,2014-01-01T02:00:00Z,oops\n"
        "m1,2014-01-01T03:00:00Z,2.0\n",
    )
    rows = parse_meter_csv(path, skip_errors=True)
    assert [r.consumption for r in rows] == [1.0, 2.0]


def test_bad_header_rejected(tmp_path):
    path = write(tmp_path, "m.csv", "a,b,c\n1,2,3\n")
    with pytest.raises(ParseError):
        parse_meter_csv(path)


def test_weather_duplicate_timestamp_last_wins(tmp_path):
    path = write(
        tmp_path,
        "w.csv",
        "timestamp,temp_c\n"
        "2014-01-01T00:00:00Z,5.0\n"
        "2014-01-01T00:00:00Z,6.0\n"
        "2014-01-01T01:00:00Z,7.0\n",
    )
    pairs = parse_weather_csv(path)
    assert pairs == [(H0, 6.0), (H0 + 1, 7.0)]


def test_round_trip_through_store(tmp_path):
    lines = ["meter_id,timestamp,kwh"]
    rng = np.random.default_rng(0)
    values = rng.uniform(0, 4, 10_000)
    for i, v in enumerate(values):
        lines.append(f"mX,{timeutil.format_hour(H0 + i)},{float(v)!r}")
    path = write(tmp_path, "big.csv", "\n".join(lines) + "\n")
    rows = parse_meter_csv(path)
    store = ReadingStore()
    assert store.insert_readings(rows) == 10_000
    series = store.query_series("mX", H0, H0 + 10_000)
    assert series.consumption == pytest.approx(values)


# ---------------------------------------------------------------------------
# weather join


def _readings(n):
    from meterflow.model import HourlyReading

    return [
        HourlyReading("m1", timeutil.from_epoch_hours(H0 + i), 1.0) for i in range(n)
    ]


def test_join_fills_exact_hours():
    joined = join_weather(_readings(3), [(H0, 1.0), (H0 + 1, 2.0), (H0 + 2, 3.0)])
    assert [r.temperature for r in joined] == [1.0, 2.0, 3.0]


def test_join_interpolates_single_missing_hour():
    joined = join_weather(_readings(3), [(H0, 10.0), (H0 + 2, 12.0)])
    assert joined[1].temperature == pytest.approx(11.0)


def test_join_leaves_long_gaps_absent():
    joined = join_weather(_readings(7), [(H0, 10.0), (H0 + 6, 16.0)])
    assert [r.temperature for r in joined[1:6]] == [None] * 5


def test_join_requires_overlap():
    with pytest.raises(ValidationError):
        join_weather(_readings(2), [(H0 + 100, 5.0)])


# ---------------------------------------------------------------------------
# anonymization


def test_pseudonym_deterministic_per_salt():
    assert pseudonym("m1", "salt-a") == pseudonym("m1", "salt-a")
    assert pseudonym("m1", "salt-a") != pseudonym("m1", "salt-b")
    assert pseudonym("m1", "salt-a") != pseudonym("m2", "salt-a")


def test_empty_salt_rejected():
    with pytest.raises(ValidationError):
        pseudonym("m1", "")


def test_anonymized_readings_keep_grouping():
    rows = _readings(4) + [
        r for r in anonymize_readings(_readings(2), "other")  # distinct ids stay distinct
    ]
    out = anonymize_readings(rows, "salt")
    sizes = {}
    for r in out:
        sizes[r.meter_id] = sizes.get(r.meter_id, 0) + 1
    assert sorted(sizes.values()) == [2, 4]


# ---------------------------------------------------------------------------
# synthetic generator


def test_same_spec_is_bit_identical():
    spec = GeneratorSpec(n_series=2, span_hours=24 * 40, rng_seed=99)
    a = list(generate_series(spec))
    b = list(generate_series(spec))
    for (sa, la), (sb, lb) in zip(a, b):
        assert la == lb
        assert (sa.consumption == sb.consumption).all()
        assert (sa.temperature == sb.temperature).all()


def test_noise_free_series_satisfies_the_recurrence():
    spec = GeneratorSpec(n_series=1, span_hours=24 * 30, noise_sigma=0.0, rng_seed=4)
    series, labels = next(generate_series(spec))
    p = len(labels.ar_coeffs)
    days = series.consumption.reshape(-1, 24)
    drivers = exogenous_matrix(series.temperature).reshape(-1, 24, 3)
    start_day = series.start_hour // 24
    for d in range(p, days.shape[0]):
        intercept = np.array(
            labels.weekend_intercepts
            if timeutil.is_weekend_day(start_day + d)
            else labels.weekday_intercepts
        )
        expected = intercept + drivers[d] @ np.array(labels.temp_coeffs)
        for i, a in enumerate(labels.ar_coeffs):
            expected += a * days[d - 1 - i]
        assert days[d] == pytest.approx(np.maximum(expected, 0.0), abs=1e-12)


def test_labels_match_streamed_rows():
    spec = GeneratorSpec(n_series=2, span_hours=48, rng_seed=1)
    stream, labels = generate_synthetic(spec)
    rows = list(stream)
    assert len(rows) == 2 * 48
    assert {r.meter_id for r in rows} == {l.meter_id for l in labels}
    assert generate_labels(spec) == labels


def test_anomaly_injection_recorded_and_applied():
    spec = GeneratorSpec(
        n_series=1,
        span_hours=24 * 60,
        noise_sigma=0.0,
        rng_seed=8,
        anomalies_per_series=2,
        anomaly_factor=3.0,
        anomaly_start_day=20,
    )
    series, labels = next(generate_series(spec))
    assert len(labels.anomalies) == 2
    clean_spec = GeneratorSpec(
        n_series=1, span_hours=24 * 60, noise_sigma=0.0, rng_seed=8, anomaly_start_day=20
    )
    clean, _ = next(generate_series(clean_spec))
    days = series.consumption.reshape(-1, 24)
    clean_days = clean.consumption.reshape(-1, 24)
    for injection in labels.anomalies:
        assert injection.day >= 20
        assert days[injection.day] == pytest.approx(clean_days[injection.day] * 3.0)


def test_weekend_factor_shapes_weekends():
    profile = SeedProfile(
        "weekender", tuple([1.0] * 24), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), weekend_factor=2.0
    )
    spec = GeneratorSpec(
        n_series=1, span_hours=24 * 28, noise_sigma=0.0, rng_seed=0, seed_profiles=(profile,)
    )
    series, labels = next(generate_series(spec))
    days = series.consumption.reshape(-1, 24)
    start_day = series.start_hour // 24
    for d in range(days.shape[0]):
        expected = 2.0 if timeutil.is_weekend_day(start_day + d) else 1.0
        assert days[d] == pytest.approx(np.full(24, expected))


def test_spec_validation():
    with pytest.raises(ConfigError):
        GeneratorSpec(n_series=0)
    with pytest.raises(ConfigError):
        GeneratorSpec(span_hours=5)
    with pytest.raises(ConfigError):
        SeedProfile("bad", tuple([1.0] * 23))
    with pytest.raises(ConfigError):
        SeedProfile("bad", tuple([1.0] * 24), ar_coeffs=(0.9, 0.2))
