import threading
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meterflow.errors import (
    AlignmentError,
    DuplicateError,
    NotFoundError,
    PrivacyError,
    ValidationError,
)
from meterflow.model import CustomerRecord, Granularity, HourlyReading, StoreConfig
from meterflow.store import ReadingStore
from meterflow import timeutil

T0 = datetime(2014, 1, 1, tzinfo=timezone.utc)
H0 = timeutil.to_epoch_hours(T0)


def hour(i):
    return timeutil.from_epoch_hours(H0 + i)


def reading(meter, i, kwh, temp=None):
    return HourlyReading(meter_id=meter, read_time=hour(i), consumption=kwh, temperature=temp)


def fill(store, meter, values, start=0):
    rows = [reading(meter, start + i, v) for i, v in enumerate(values)]
    store.insert_readings(rows)
    return rows


# ---------------------------------------------------------------------------
# insert


def test_insert_returns_count():
    store = ReadingStore()
    assert store.insert_readings([reading("m1", i, 1.0) for i in range(3)]) == 3


def test_duplicate_insert_rejected_without_upsert():
    store = ReadingStore()
    store.insert_readings([reading("m1", 0, 1.0)])
    with pytest.raises(DuplicateError):
        store.insert_readings([reading("m1", 0, 2.0)])


def test_duplicate_insert_upserts_when_enabled():
    store = ReadingStore(config=StoreConfig(upsert=True))
    store.insert_readings([reading("m1", 0, 1.0)])
    store.insert_readings([reading("m1", 0, 2.0)])
    series = store.query_series("m1", H0, H0 + 1)
    assert series.consumption[0] == 2.0
    assert store.row_count("m1") == 1


def test_unaligned_timestamp_rejected():
    with pytest.raises(AlignmentError):
        HourlyReading("m1", datetime(2014, 1, 1, 0, 30, tzinfo=timezone.utc), 1.0)


def test_negative_consumption_rejected():
    with pytest.raises(ValidationError):
        HourlyReading("m1", T0, -0.1)


def test_two_years_round_trip():
    store = ReadingStore()
    rng = np.random.default_rng(0)
    values = rng.uniform(0, 5, 17_520)
    series_in = [reading("m1", i, float(v)) for i, v in enumerate(values)]
    assert store.insert_readings(series_in) == 17_520
    out = store.query_series("m1", H0, H0 + 17_520)
    assert out.consumption == pytest.approx(values)
    assert not out.gap_mask.any()


# ---------------------------------------------------------------------------
# query + gap policy


def test_query_full_range_identity():
    store = ReadingStore()
    fill(store, "m1", [1.0, 2.0, 3.0])
    series = store.query_series("m1", H0, H0 + 3)
    assert series.consumption.tolist() == [1.0, 2.0, 3.0]
    assert series.gap_mask.tolist() == [False, False, False]


def test_missing_hour_linear_interpolated_and_flagged():
    store = ReadingStore()
    store.insert_readings([reading("m1", 0, 1.0), reading("m1", 2, 3.0)])
    series = store.query_series("m1", H0, H0 + 3)
    assert series.gap_mask.tolist() == [False, True, False]
    assert series.consumption[1] == pytest.approx(2.0)  # midpoint of 1 and 3


def test_long_gap_held_not_interpolated():
    store = ReadingStore()  # default interpolation limit: 6 hours
    store.insert_readings([reading("m1", 0, 1.0), reading("m1", 10, 11.0)])
    series = store.query_series("m1", H0, H0 + 11)
    assert series.gap_mask[1:10].all()
    assert series.consumption[1:10] == pytest.approx(np.full(9, 1.0))  # held at last value


def test_unknown_meter_not_found():
    store = ReadingStore()
    with pytest.raises(NotFoundError):
        store.query_series("nope", H0, H0 + 1)


def test_bad_range_rejected():
    store = ReadingStore()
    fill(store, "m1", [1.0])
    with pytest.raises(ValidationError):
        store.query_series("m1", H0 + 2, H0 + 1)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(min_value=0, max_value=100), min_size=1, max_size=72))
def test_round_trip_property(values):
    store = ReadingStore()
    store.insert_readings([reading("m", i, float(v)) for i, v in enumerate(values)])
    out = store.query_series("m", H0, H0 + len(values))
    assert out.consumption.tolist() == pytest.approx(values)
    assert not out.gap_mask.any()


# ---------------------------------------------------------------------------
# aggregation


def test_daily_sum_of_constant_day():
    store = ReadingStore()
    fill(store, "m1", [1.0] * 24)
    buckets = store.aggregate(["m1"], granularity=Granularity.DAILY, fn="sum")
    assert len(buckets) == 1
    assert buckets[0][1] == pytest.approx(24.0)


def test_hourly_avg_pools_meters():
    store = ReadingStore()
    fill(store, "m1", [2.0] * 5)
    fill(store, "m2", [2.0] * 5)
    buckets = store.aggregate(["m1", "m2"], granularity=Granularity.HOURLY, fn="avg")
    assert [v for _, v in buckets] == pytest.approx([2.0] * 5)


def test_weekly_max_matches_brute_force():
    store = ReadingStore()
    rng = np.random.default_rng(5)
    values = rng.uniform(0, 9, 168 * 2)
    # start exactly on a Monday so the first week is the first 168 values
    monday = H0 + ((7 - timeutil.weekday_of_day(H0 // 24)) % 7) * 24
    store.insert_readings(
        [HourlyReading("m1", timeutil.from_epoch_hours(monday + i), float(v)) for i, v in enumerate(values)]
    )
    buckets = store.aggregate(["m1"], granularity=Granularity.WEEKLY, fn="max")
    assert buckets[0][1] == pytest.approx(values[:168].max())
    assert buckets[1][1] == pytest.approx(values[168:].max())


def test_aggregation_consistency_daily_vs_weekly():
    store = ReadingStore()
    rng = np.random.default_rng(1)
    monday = H0 + ((7 - timeutil.weekday_of_day(H0 // 24)) % 7) * 24
    values = rng.uniform(0, 4, 168 * 3)
    store.insert_readings(
        [HourlyReading("m1", timeutil.from_epoch_hours(monday + i), float(v)) for i, v in enumerate(values)]
    )
    daily = store.aggregate(["m1"], granularity=Granularity.DAILY, fn="sum")
    weekly = store.aggregate(["m1"], granularity=Granularity.WEEKLY, fn="sum")
    assert sum(v for _, v in daily[:7]) == pytest.approx(weekly[0][1])
    assert sum(v for _, v in daily) == pytest.approx(sum(v for _, v in weekly))


def test_avg_count_sum_relation_and_min_le_avg_le_max():
    store = ReadingStore()
    rng = np.random.default_rng(9)
    values = rng.uniform(0, 10, 72)
    fill(store, "m1", [float(v) for v in values])
    for fn in ("sum", "avg", "min", "max"):
        assert len(store.aggregate(["m1"], granularity=Granularity.DAILY, fn=fn)) == 3
    sums = store.aggregate(["m1"], granularity=Granularity.DAILY, fn="sum")
    avgs = store.aggregate(["m1"], granularity=Granularity.DAILY, fn="avg")
    mins = store.aggregate(["m1"], granularity=Granularity.DAILY, fn="min")
    maxs = store.aggregate(["m1"], granularity=Granularity.DAILY, fn="max")
    for (_, s), (_, a), (_, lo), (_, hi) in zip(sums, avgs, mins, maxs):
        assert a * 24 == pytest.approx(s)
        assert lo <= a <= hi


def test_monthly_buckets_are_calendar_aligned():
    store = ReadingStore()
    n = 24 * 40  # spans January into February
    fill(store, "m1", [1.0] * n)
    buckets = store.aggregate(["m1"], granularity=Granularity.MONTHLY, fn="sum")
    assert [b[0].strftime("%Y-%m-%d") for b in buckets] == ["2014-01-01", "2014-02-01"]
    assert buckets[0][1] == pytest.approx(31 * 24.0)
    assert buckets[1][1] == pytest.approx((40 - 31) * 24.0)


def test_empty_selection_gives_empty_result():
    store = ReadingStore()
    assert store.aggregate([], granularity=Granularity.DAILY, fn="sum") == []
    assert store.aggregate(feed_area_id="nowhere", fn="sum") == []


def test_unknown_fn_rejected():
    store = ReadingStore()
    with pytest.raises(ValidationError):
        store.aggregate(["m1"], fn="median")


# ---------------------------------------------------------------------------
# neighborhood comparison


def _neighborhood_store():
    store = ReadingStore()
    for meter, load in (("m1", 1.0), ("m2", 2.0), ("m3", 3.0)):
        fill(store, meter, [load] * 48)
    store.register_customers(
        [CustomerRecord(m, feed_area_id="fa1", neighborhood_id="hood1") for m in ("m1", "m2", "m3")]
    )
    return store


def test_neighborhood_average_daily_sum_basis():
    store = _neighborhood_store()
    buckets = store.neighborhood_average("m1", granularity=Granularity.DAILY)
    # members consume 24, 48, 72 kWh/day; the average member burns 48
    assert [v for _, v in buckets] == pytest.approx([48.0, 48.0])


def test_neighborhood_below_privacy_floor_refused():
    store = ReadingStore()
    fill(store, "solo", [1.0] * 24)
    store.register_customers([CustomerRecord("solo", "fa", "lonely-hood")])
    with pytest.raises(PrivacyError):
        store.neighborhood_average("solo")


def test_unregistered_meter_not_found():
    store = ReadingStore()
    fill(store, "m1", [1.0])
    with pytest.raises(NotFoundError):
        store.neighborhood_average("m1")


def test_buckets_below_floor_are_withheld():
    store = _neighborhood_store()
    # a third day where only one member has data: that bucket must not leak
    fill(store, "m1", [5.0] * 24, start=48)
    buckets = store.neighborhood_average("m1", granularity=Granularity.DAILY)
    assert len(buckets) == 2  # the lone-member day is withheld


# ---------------------------------------------------------------------------
# persistence


def test_reopen_restores_state(tmp_path):
    root = tmp_path / "store"
    store = ReadingStore(root)
    fill(store, "m1", [1.0, 2.0, 3.5])
    store.register_customers([CustomerRecord("m1", "fa", "hood")])
    store.update_temp_independent("m1", H0, np.array([0.5, 1.5, 3.0]))

    reopened = ReadingStore(root)
    series = reopened.query_series("m1", H0, H0 + 3)
    assert series.consumption.tolist() == [1.0, 2.0, 3.5]
    assert series.temp_independent == pytest.approx([0.5, 1.5, 3.0])
    assert reopened.customer("m1").neighborhood_id == "hood"
    assert (root / "manifest.json").exists()


def test_manifest_row_counts(tmp_path):
    import json

    store = ReadingStore(tmp_path / "s")
    fill(store, "m1", [1.0] * 5)
    fill(store, "m2", [1.0] * 7)
    manifest = json.loads((tmp_path / "s" / "manifest.json").read_text())
    assert manifest["partitions"]["m1"]["rows"] == 5
    assert manifest["partitions"]["m2"]["rows"] == 7


def test_record_layout_is_length_prefixed_binary(tmp_path):
    import struct

    store = ReadingStore(tmp_path / "s")
    store.insert_readings([reading("m1", 0, 2.25, temp=5.5)])
    manifest_dir = (tmp_path / "s" / "m1" / "data.bin").read_bytes()
    (length,) = struct.unpack_from("<I", manifest_dir, 0)
    ts, temp, cons, til = struct.unpack_from("<qddd", manifest_dir, 4)
    assert length == 32
    assert ts == H0 * 3600
    assert temp == 5.5
    assert cons == 2.25
    assert np.isnan(til)


def test_concurrent_inserts_distinct_meters(tmp_path):
    store = ReadingStore(tmp_path / "s")
    errors = []

    def writer(meter):
        try:
            store.insert_readings([reading(meter, i, 1.0) for i in range(50)])
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=writer, args=(f"m{k}",)) for k in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert all(store.row_count(f"m{k}") == 50 for k in range(8))


def test_snapshots_are_immutable():
    store = ReadingStore()
    fill(store, "m1", [1.0, 2.0])
    series = store.query_series("m1", H0, H0 + 2)
    with pytest.raises(ValueError):
        series.consumption[0] = 99.0
