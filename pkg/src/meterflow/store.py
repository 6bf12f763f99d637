"""Embedded hourly-reading store.

One append-only binary partition per meter plus an in-memory index. Each
record is length-prefixed (u32) followed by timestamp seconds (i64),
temperature (f64, NaN when absent), consumption (f64) and
temperature-independent load (f64, NaN until disaggregation fills it).
Re-appended hours win on replay, which keeps updates append-friendly while
the store only ever exposes the latest value per (meter, hour).

Writes are serialized per partition; reads hand out immutable snapshots.
"""

from __future__ import annotations

import json
import os
import re
import struct
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import timeutil
from .errors import (
    DuplicateError,
    NotFoundError,
    PrivacyError,
    ValidationError,
)
from .model import CustomerRecord, Granularity, HourlyReading, MeterSeries, StoreConfig

_RECORD = struct.Struct("<qddd")
_PREFIX = struct.Struct("<I")
MANIFEST_NAME = "manifest.json"

AGGREGATE_FNS = ("sum", "avg", "min", "max")


@dataclass
class _Partition:
    meter_id: str
    dirname: str
    rows: dict  # hour -> (consumption, temperature, til)
    lock: threading.RLock
    dirty_cache: bool = True
    _hours_cache: np.ndarray | None = None

    def sorted_hours(self) -> np.ndarray:
        if self.dirty_cache or self._hours_cache is None:
            self._hours_cache = np.array(sorted(self.rows), dtype=np.int64)
            self.dirty_cache = False
        return self._hours_cache


class ReadingStore:
    """Reading warehouse with calendar aggregation queries.

    root=None keeps everything in memory (useful for tests and scratch
    pipelines); with a root directory every insert is persisted and the
    store reloads its full state on reopen.
    """

    def __init__(self, root: str | Path | None = None, config: StoreConfig | None = None):
        self.config = config or StoreConfig()
        self.root = Path(root) if root is not None else None
        self._partitions: dict[str, _Partition] = {}
        self._customers: dict[str, CustomerRecord] = {}
        self._meta_lock = threading.RLock()
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            self._load()

    # ------------------------------------------------------------------
    # persistence

    def _manifest_path(self) -> Path:
        assert self.root is not None
        return self.root / MANIFEST_NAME

    def _load(self) -> None:
        path = self._manifest_path()
        if not path.exists():
            return
        manifest = json.loads(path.read_text())
        for meter_id, entry in manifest.get("partitions", {}).items():
            part = _Partition(meter_id, entry["dir"], {}, threading.RLock())
            data_file = self.root / entry["dir"] / "data.bin"
            if data_file.exists():
                self._replay(part, data_file)
            self._partitions[meter_id] = part
        customers = manifest.get("customers", [])
        for rec in customers:
            self._customers[rec["meter_id"]] = CustomerRecord(
                meter_id=rec["meter_id"],
                feed_area_id=rec["feed_area_id"],
                neighborhood_id=rec["neighborhood_id"],
                anonymized=rec.get("anonymized", False),
                latitude=rec.get("latitude"),
                longitude=rec.get("longitude"),
            )

    @staticmethod
    def _replay(part: _Partition, data_file: Path) -> None:
        blob = data_file.read_bytes()
        pos = 0
        n = len(blob)
        while pos + _PREFIX.size <= n:
            (length,) = _PREFIX.unpack_from(blob, pos)
            pos += _PREFIX.size
            if pos + length > n:
                break  # truncated tail record: ignore
            ts_sec, temp, cons, til = _RECORD.unpack_from(blob, pos)
            pos += length
            part.rows[ts_sec // timeutil.SECONDS_PER_HOUR] = (cons, temp, til)
        part.dirty_cache = True

    def _write_manifest(self) -> None:
        if self.root is None:
            return
        manifest = {
            "version": 1,
            "partitions": {
                meter_id: {"dir": part.dirname, "rows": len(part.rows)}
                for meter_id, part in sorted(self._partitions.items())
            },
            "customers": [
                {
                    "meter_id": c.meter_id,
                    "feed_area_id": c.feed_area_id,
                    "neighborhood_id": c.neighborhood_id,
                    "anonymized": c.anonymized,
                    "latitude": c.latitude,
                    "longitude": c.longitude,
                }
                for _, c in sorted(self._customers.items())
            ],
        }
        tmp = self._manifest_path().with_suffix(".tmp")
        tmp.write_text(json.dumps(manifest, indent=1))
        os.replace(tmp, self._manifest_path())

    def _append_records(self, part: _Partition, records: list[tuple[int, float, float, float]]) -> None:
        if self.root is None:
            return
        part_dir = self.root / part.dirname
        part_dir.mkdir(parents=True, exist_ok=True)
        chunks = []
        for hour, cons, temp, til in records:
            payload = _RECORD.pack(hour * timeutil.SECONDS_PER_HOUR, temp, cons, til)
            chunks.append(_PREFIX.pack(len(payload)))
            chunks.append(payload)
        with open(part_dir / "data.bin", "ab") as fh:
            fh.write(b"".join(chunks))

    def _dirname_for(self, meter_id: str) -> str:
        safe = re.sub(r"[^A-Za-z0-9_.-]", "_", meter_id)[:64]
        taken = {p.dirname for p in self._partitions.values()}
        name = safe or "meter"
        suffix = 0
        while name in taken:
            suffix += 1
            name = f"{safe}_{suffix}"
        return name

    def _partition(self, meter_id: str, create: bool = False) -> _Partition:
        with self._meta_lock:
            part = self._partitions.get(meter_id)
            if part is None:
                if not create:
                    raise NotFoundError(f"unknown meter {meter_id!r}")
                part = _Partition(meter_id, self._dirname_for(meter_id), {}, threading.RLock())
                self._partitions[meter_id] = part
            return part

    # ------------------------------------------------------------------
    # writes

    def insert_readings(self, rows: Sequence[HourlyReading] | Iterable[HourlyReading],
                        upsert: bool | None = None) -> int:
        """Insert rows, returning the count accepted.

        Duplicate (meter_id, read_time) pairs are rejected unless upsert is
        enabled (argument overrides the store config). The whole batch is
        validated before any state changes.
        """
        allow_upsert = self.config.upsert if upsert is None else upsert
        rows = list(rows)
        grouped: dict[str, dict[int, HourlyReading]] = {}
        for row in rows:
            per_meter = grouped.setdefault(row.meter_id, {})
            hour = row.epoch_hour
            if hour in per_meter and not allow_upsert:
                raise DuplicateError(
                    f"duplicate reading for meter {row.meter_id!r} at "
                    f"{timeutil.format_hour(hour)}"
                )
            per_meter[hour] = row

        if not allow_upsert:
            for meter_id, per_meter in grouped.items():
                with self._meta_lock:
                    part = self._partitions.get(meter_id)
                if part is None:
                    continue
                for hour in per_meter:
                    if hour in part.rows:
                        raise DuplicateError(
                            f"duplicate reading for meter {meter_id!r} at "
                            f"{timeutil.format_hour(hour)}"
                        )

        for meter_id, per_meter in grouped.items():
            part = self._partition(meter_id, create=True)
            with part.lock:
                records = []
                for hour, row in per_meter.items():
                    temp = np.nan if row.temperature is None else float(row.temperature)
                    til = (
                        np.nan
                        if row.temp_independent_load is None
                        else float(row.temp_independent_load)
                    )
                    part.rows[hour] = (float(row.consumption), temp, til)
                    records.append((hour, float(row.consumption), temp, til))
                part.dirty_cache = True
                self._append_records(part, records)
        with self._meta_lock:
            self._write_manifest()
        return len(rows)

    def insert_series(self, series: MeterSeries, upsert: bool | None = None) -> int:
        """Bulk-insert a contiguous array-backed series (gap hours skipped)."""
        allow_upsert = self.config.upsert if upsert is None else upsert
        hours = series.hours()
        keep = ~series.gap_mask
        if (series.consumption[keep] < 0).any():
            raise ValidationError("consumption must be >= 0")
        part = self._partition(series.meter_id, create=True)
        til = series.temp_independent
        with part.lock:
            if not allow_upsert:
                for hour in hours[keep]:
                    if int(hour) in part.rows:
                        raise DuplicateError(
                            f"duplicate reading for meter {series.meter_id!r} at "
                            f"{timeutil.format_hour(int(hour))}"
                        )
            records = []
            for i in np.flatnonzero(keep):
                hour = int(hours[i])
                row = (
                    float(series.consumption[i]),
                    float(series.temperature[i]),
                    np.nan if til is None else float(til[i]),
                )
                part.rows[hour] = row
                records.append((hour, row[0], row[1], row[2]))
            part.dirty_cache = True
            self._append_records(part, records)
        with self._meta_lock:
            self._write_manifest()
        return int(keep.sum())

    def update_temp_independent(self, meter_id: str, start_hour: int, values: np.ndarray) -> int:
        """Fill the temperature-independent load column for stored hours."""
        part = self._partition(meter_id)
        updated = []
        with part.lock:
            for i, value in enumerate(values):
                hour = start_hour + i
                existing = part.rows.get(hour)
                if existing is None or not np.isfinite(value):
                    continue
                cons, temp, _ = existing
                til = max(float(value), 0.0)
                part.rows[hour] = (cons, temp, til)
                updated.append((hour, cons, temp, til))
            self._append_records(part, updated)
        with self._meta_lock:
            self._write_manifest()
        return len(updated)

    # ------------------------------------------------------------------
    # customers

    def register_customers(self, records: Sequence[CustomerRecord]) -> None:
        with self._meta_lock:
            for rec in records:
                existing = self._customers.get(rec.meter_id)
                if existing is not None and existing != rec:
                    raise DuplicateError(f"meter {rec.meter_id!r} already registered")
                self._customers[rec.meter_id] = rec
            self._write_manifest()

    def customer(self, meter_id: str) -> CustomerRecord:
        rec = self._customers.get(meter_id)
        if rec is None:
            raise NotFoundError(f"meter {meter_id!r} has no customer record")
        return rec

    def neighborhood_members(self, neighborhood_id: str) -> list[str]:
        return sorted(
            m for m, rec in self._customers.items() if rec.neighborhood_id == neighborhood_id
        )

    def feed_area_members(self, feed_area_id: str) -> list[str]:
        return sorted(
            m for m, rec in self._customers.items() if rec.feed_area_id == feed_area_id
        )

    # ------------------------------------------------------------------
    # reads

    def meters(self) -> list[str]:
        with self._meta_lock:
            return sorted(self._partitions)

    def row_count(self, meter_id: str) -> int:
        part = self._partition(meter_id)
        with part.lock:
            return len(part.rows)

    def series_range(self, meter_id: str) -> tuple[int, int]:
        """(first stored hour, one past last stored hour)."""
        part = self._partition(meter_id)
        with part.lock:
            hours = part.sorted_hours()
            if hours.size == 0:
                raise NotFoundError(f"meter {meter_id!r} has no readings")
            return int(hours[0]), int(hours[-1]) + 1

    def _snapshot(self, meter_id: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        part = self._partition(meter_id)
        with part.lock:
            hours = part.sorted_hours().copy()
            cons = np.empty(hours.size)
            temp = np.empty(hours.size)
            til = np.empty(hours.size)
            for i, hour in enumerate(hours):
                c, t, u = part.rows[int(hour)]
                cons[i] = c
                temp[i] = t
                til[i] = u
        return hours, cons, temp, til

    def query_series(self, meter_id: str, from_time: datetime | int, to_time: datetime | int) -> MeterSeries:
        """Contiguous hourly series over [from, to).

        Hours missing from the store are flagged in gap_mask and imputed:
        linear interpolation across gaps up to the configured limit,
        otherwise the nearest stored value is held.
        """
        from_hour = from_time if isinstance(from_time, int) else timeutil.to_epoch_hours(from_time)
        to_hour = to_time if isinstance(to_time, int) else timeutil.to_epoch_hours(to_time)
        if from_hour >= to_hour:
            raise ValidationError("query range must satisfy from < to")
        hours, cons, temp, til = self._snapshot(meter_id)
        if hours.size == 0:
            raise NotFoundError(f"meter {meter_id!r} has no readings")

        n = to_hour - from_hour
        grid = np.arange(from_hour, to_hour, dtype=np.int64)
        out_cons = np.full(n, np.nan)
        out_temp = np.full(n, np.nan)
        out_til = np.full(n, np.nan)
        gap = np.ones(n, dtype=bool)

        idx = np.searchsorted(hours, grid)
        in_range = (idx < hours.size) & (hours[np.minimum(idx, hours.size - 1)] == grid)
        stored_pos = idx[in_range]
        out_cons[in_range] = cons[stored_pos]
        out_temp[in_range] = temp[stored_pos]
        out_til[in_range] = til[stored_pos]
        gap[in_range] = False

        if gap.any():
            limit = self.config.max_interpolated_gap_hours
            out_cons[gap] = _impute(grid[gap], hours, cons, limit)
            out_temp[gap] = _impute(grid[gap], hours, temp, limit)

        return MeterSeries(
            meter_id=meter_id,
            start_hour=from_hour,
            consumption=out_cons,
            temperature=out_temp,
            gap_mask=gap,
            temp_independent=out_til,
        )

    # ------------------------------------------------------------------
    # aggregation

    def aggregate(
        self,
        meter_ids: Sequence[str] | None = None,
        feed_area_id: str | None = None,
        granularity: Granularity = Granularity.DAILY,
        fn: str = "sum",
        from_time: datetime | int | None = None,
        to_time: datetime | int | None = None,
    ) -> list[tuple[datetime, float]]:
        """Aggregate hourly consumption into calendar buckets.

        Each bucket applies fn over all constituent stored hourly values of
        all selected meters (avg is the per-hour average). Buckets with no
        stored hours are omitted; an empty selection yields an empty result.
        """
        if fn not in AGGREGATE_FNS:
            raise ValidationError(f"unknown aggregate fn {fn!r}; expected one of {AGGREGATE_FNS}")
        if feed_area_id is not None:
            ids = self.feed_area_members(feed_area_id)
        elif meter_ids is not None:
            ids = list(meter_ids)
        else:
            raise ValidationError("either meter_ids or feed_area_id is required")

        all_keys = []
        all_values = []
        for meter_id in ids:
            try:
                hours, cons, _, _ = self._snapshot(meter_id)
            except NotFoundError:
                continue
            hours, cons = _clip_range(hours, cons, from_time, to_time)
            if hours.size:
                all_keys.append(_bucket_keys(hours, granularity))
                all_values.append(cons)
        if not all_keys:
            return []
        keys = np.concatenate(all_keys)
        values = np.concatenate(all_values)
        buckets, agg = _grouped(keys, values, fn)
        return [(timeutil.from_epoch_hours(int(b)), float(v)) for b, v in zip(buckets, agg)]

    def neighborhood_average(
        self,
        meter_id: str,
        granularity: Granularity = Granularity.DAILY,
        from_time: datetime | int | None = None,
        to_time: datetime | int | None = None,
    ) -> list[tuple[datetime, float]]:
        """Per-bucket mean of the member meters' bucket consumption totals.

        Only the aggregate leaves this call; no member's individual series is
        exposed, and neighborhoods below the privacy floor are refused.
        """
        rec = self.customer(meter_id)
        members = self.neighborhood_members(rec.neighborhood_id)
        if len(members) < self.config.privacy_floor:
            raise PrivacyError(
                f"neighborhood {rec.neighborhood_id!r} has {len(members)} member(s); "
                f"floor is {self.config.privacy_floor}"
            )
        sums: dict[int, float] = {}
        counts: dict[int, int] = {}
        for member in members:
            try:
                hours, cons, _, _ = self._snapshot(member)
            except NotFoundError:
                continue
            hours, cons = _clip_range(hours, cons, from_time, to_time)
            if not hours.size:
                continue
            keys = _bucket_keys(hours, granularity)
            buckets, totals = _grouped(keys, cons, "sum")
            for b, t in zip(buckets, totals):
                sums[int(b)] = sums.get(int(b), 0.0) + float(t)
                counts[int(b)] = counts.get(int(b), 0) + 1
        # a bucket backed by fewer members than the floor would be
        # attributable to individuals, so it is withheld
        return [
            (timeutil.from_epoch_hours(b), sums[b] / counts[b])
            for b in sorted(sums)
            if counts[b] >= self.config.privacy_floor
        ]


def _clip_range(hours, values, from_time, to_time):
    lo = 0
    hi = hours.size
    if from_time is not None:
        from_hour = from_time if isinstance(from_time, int) else timeutil.to_epoch_hours(from_time)
        lo = int(np.searchsorted(hours, from_hour, side="left"))
    if to_time is not None:
        to_hour = to_time if isinstance(to_time, int) else timeutil.to_epoch_hours(to_time)
        hi = int(np.searchsorted(hours, to_hour, side="left"))
    return hours[lo:hi], values[lo:hi]


def _bucket_keys(hours: np.ndarray, granularity: Granularity) -> np.ndarray:
    if granularity is Granularity.HOURLY:
        return hours
    if granularity is Granularity.DAILY:
        return (hours // 24) * 24
    if granularity is Granularity.WEEKLY:
        days = hours // 24
        monday = days - (days + 3) % 7
        return monday * 24
    stamps = hours.astype("datetime64[h]")
    return stamps.astype("datetime64[M]").astype("datetime64[h]").astype(np.int64)


def _grouped(keys: np.ndarray, values: np.ndarray, fn: str) -> tuple[np.ndarray, np.ndarray]:
    buckets, inverse = np.unique(keys, return_inverse=True)
    if fn == "sum" or fn == "avg":
        agg = np.bincount(inverse, weights=values, minlength=buckets.size)
        if fn == "avg":
            agg = agg / np.bincount(inverse, minlength=buckets.size)
    elif fn == "min":
        agg = np.full(buckets.size, np.inf)
        np.minimum.at(agg, inverse, values)
    else:
        agg = np.full(buckets.size, -np.inf)
        np.maximum.at(agg, inverse, values)
    return buckets, agg


def _impute(targets: np.ndarray, hours: np.ndarray, values: np.ndarray, limit: int) -> np.ndarray:
    """Fill target hours from the stored (hours, values) sequence.

    Gaps spanning <= limit hours between two stored neighbors are linearly
    interpolated; anything longer (or missing a neighbor) holds the nearest
    stored value. NaN stored values propagate.
    """
    out = np.empty(targets.size)
    right = np.searchsorted(hours, targets)
    left = right - 1
    for i, target in enumerate(targets):
        li, ri = left[i], right[i]
        has_left = li >= 0
        has_right = ri < hours.size
        if has_left and has_right:
            span = hours[ri] - hours[li]
            if span - 1 <= limit:
                frac = (target - hours[li]) / span
                out[i] = values[li] * (1 - frac) + values[ri] * frac
            else:
                out[i] = values[li]
        elif has_left:
            out[i] = values[li]
        elif has_right:
            out[i] = values[ri]
        else:
            out[i] = np.nan
    return out
