import numpy as np
import pytest

from meterflow import timeutil
from meterflow.analytics.anomaly import detect_range, train_detector
from meterflow.errors import ValidationError
from meterflow.ingest.synthetic import GeneratorSpec, generate_series
from meterflow.model import HourlyReading
from meterflow.store import ReadingStore
from meterflow.workflow.streaming import StreamProcessor, WindowSpec, stream_process

from conftest import heating_only_profiles

TRAIN_DAYS = 60


def build_fixture(n_meters=3, test_days=10, seed=0, anomalies=0):
    # spring start: a short training span still mixes temperatures on both
    # sides of the overheating break at every hour of day
    spec = GeneratorSpec(
        n_series=n_meters,
        span_hours=(TRAIN_DAYS + test_days) * 24,
        noise_sigma=0.05,
        rng_seed=seed,
        seed_profiles=heating_only_profiles(),
        anomalies_per_series=anomalies,
        anomaly_start_day=TRAIN_DAYS,
        start_hour=timeutil.parse_hour_timestamp("2014-04-01T00:00:00Z"),
    )
    detectors = {}
    tails = {}
    labels_by_meter = {}
    for series, labels in generate_series(spec):
        detectors[series.meter_id] = train_detector(
            series.slice_hours(series.start_hour, series.start_hour + TRAIN_DAYS * 24),
            epsilon=0.01,
            train_days=TRAIN_DAYS,
        )
        # stream includes the last p training days so the window has history
        tails[series.meter_id] = series.slice_hours(
            series.start_hour + (TRAIN_DAYS - 3) * 24, series.end_hour
        )
        labels_by_meter[series.meter_id] = labels
    return detectors, tails, labels_by_meter


def interleave(tails):
    readings = [r for series in tails.values() for r in series.iter_readings()]
    readings.sort(key=lambda r: (r.epoch_hour, r.meter_id))
    return readings


def test_each_day_scored_with_exactly_previous_three_days():
    detectors, tails, _ = build_fixture(n_meters=1, test_days=10, seed=1)
    meter = next(iter(tails))
    captured = []

    from meterflow.workflow import streaming

    original = streaming.detect_day

    def spy(detector, day, actual, history, temperatures, epsilon=None):
        captured.append((day, history.copy()))
        return original(detector, day, actual, history, temperatures, epsilon=epsilon)

    streaming.detect_day, saved = spy, streaming.detect_day
    try:
        reports = stream_process(interleave(tails), WindowSpec(), detectors)
    finally:
        streaming.detect_day = saved

    assert len(reports) == 10
    days = tails[meter].consumption.reshape(-1, 24)
    first_day = tails[meter].start_hour // 24
    for day, history in captured:
        offset = day - first_day
        assert history == pytest.approx(days[offset - 3 : offset][::-1])


def test_stream_equals_batch_detection():
    detectors, tails, _ = build_fixture(n_meters=3, test_days=15, seed=2)
    stream_reports = stream_process(interleave(tails), WindowSpec(), detectors)
    batch_reports = []
    for meter_id, series in tails.items():
        batch_reports.extend(detect_range(detectors[meter_id], series))
    key = lambda r: (r.meter_id, r.day)
    stream_sorted = sorted(stream_reports, key=key)
    batch_sorted = sorted(batch_reports, key=key)
    assert [r.to_doc() for r in stream_sorted] == [r.to_doc() for r in batch_sorted]


def test_injected_day_flagged_only_there():
    detectors, tails, labels = build_fixture(n_meters=1, test_days=12, seed=3, anomalies=1)
    meter = next(iter(tails))
    injected_day = tails[meter].start_hour // 24 + 3 + (
        labels[meter].anomalies[0].day - TRAIN_DAYS
    )
    reports = stream_process(interleave(tails), WindowSpec(), detectors)
    flagged_days = {r.day for r in reports if r.flagged}
    assert injected_day in flagged_days
    # nothing before the injection is flagged (trailing days may be)
    assert all(d >= injected_day for d in flagged_days)


def test_late_reading_rejected_and_counted():
    detectors, tails, _ = build_fixture(n_meters=1, test_days=5, seed=4)
    readings = interleave(tails)
    late = readings[50]
    ordered = readings[:60] + [late] + readings[60:]
    processor = StreamProcessor(WindowSpec(), detectors)
    list(processor.process(ordered))
    assert processor.late_rejected == 1
    assert processor.readings_processed == len(readings)


def test_flush_to_store():
    detectors, tails, _ = build_fixture(n_meters=2, test_days=5, seed=5)
    store = ReadingStore()
    stream_process(interleave(tails), WindowSpec(), detectors, store=store)
    for meter_id, series in tails.items():
        lo, hi = store.series_range(meter_id)
        stored = store.query_series(meter_id, lo, hi)
        assert len(stored) == len(series)
        assert stored.consumption == pytest.approx(series.consumption)


def test_window_must_cover_model_order():
    detectors, tails, _ = build_fixture(n_meters=1, test_days=5, seed=6)
    with pytest.raises(ValidationError):
        stream_process(interleave(tails), WindowSpec(size_hours=48), detectors)


def test_window_spec_validation():
    with pytest.raises(ValidationError):
        WindowSpec(size_hours=0)
    with pytest.raises(ValidationError):
        WindowSpec(size_hours=36)  # not whole days
    with pytest.raises(ValidationError):
        WindowSpec(size_hours=24, slide_hours=48)


def test_meters_without_detectors_flow_through():
    detectors, tails, _ = build_fixture(n_meters=2, test_days=5, seed=7)
    (with_detector, without) = sorted(tails)
    only_one = {with_detector: detectors[with_detector]}
    reports = stream_process(interleave(tails), WindowSpec(), only_one)
    assert {r.meter_id for r in reports} == {with_detector}
