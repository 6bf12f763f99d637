"""Core domain types: hourly readings, contiguous series, customers.

The reading layout mirrors a warehouse table with one row per meter-hour:
meter id, read time, outdoor temperature, consumption, and an initially
empty temperature-independent load column that disaggregation fills in.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterator, Sequence

import numpy as np

from . import timeutil
from .errors import ValidationError


@dataclass(frozen=True)
class HourlyReading:
    """One meter-hour row.

    temperature is None until weather has been joined;
    temp_independent_load is None until disaggregation has run.
    """

    meter_id: str
    read_time: datetime
    consumption: float
    temperature: float | None = None
    temp_independent_load: float | None = None

    def __post_init__(self) -> None:
        # validates hour alignment as a side effect
        object.__setattr__(self, "_epoch_hour", timeutil.to_epoch_hours(self.read_time))
        if not math.isfinite(self.consumption) or self.consumption < 0:
            raise ValidationError(
                f"consumption must be finite and >= 0, got {self.consumption!r}"
            )
        til = self.temp_independent_load
        if til is not None and (not math.isfinite(til) or til < 0):
            raise ValidationError(
                f"temp_independent_load must be finite and >= 0, got {til!r}"
            )

    @property
    def epoch_hour(self) -> int:
        return self._epoch_hour  # type: ignore[attr-defined]


class Granularity(enum.Enum):
    """Calendar-aligned aggregation windows (UTC)."""

    HOURLY = "hourly"
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"

    @classmethod
    def parse(cls, name: str) -> "Granularity":
        try:
            return cls(name.lower())
        except ValueError:
            valid = ", ".join(g.value for g in cls)
            raise ValidationError(f"unknown granularity {name!r}; expected one of {valid}")

    def bucket_start(self, hour: int) -> int:
        if self is Granularity.HOURLY:
            return hour
        if self is Granularity.DAILY:
            return timeutil.day_start(hour)
        if self is Granularity.WEEKLY:
            return timeutil.week_start(hour)
        return timeutil.month_start(hour)

    def next_bucket(self, bucket_start: int) -> int:
        if self is Granularity.HOURLY:
            return bucket_start + 1
        if self is Granularity.DAILY:
            return bucket_start + timeutil.HOURS_PER_DAY
        if self is Granularity.WEEKLY:
            return bucket_start + timeutil.HOURS_PER_WEEK
        return timeutil.next_month_start(bucket_start)


@dataclass(frozen=True)
class MeterSeries:
    """Contiguous hourly view over one meter's readings.

    consumption/temperature are parallel arrays starting at start_hour;
    gap_mask marks hours that were imputed rather than stored. Arrays are
    read-only so snapshots can be shared across threads.
    """

    meter_id: str
    start_hour: int
    consumption: np.ndarray
    temperature: np.ndarray
    gap_mask: np.ndarray
    temp_independent: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = len(self.consumption)
        if n < 1:
            raise ValidationError("series must contain at least one hour")
        if len(self.temperature) != n or len(self.gap_mask) != n:
            raise ValidationError("series arrays must have equal length")
        if self.temp_independent is not None and len(self.temp_independent) != n:
            raise ValidationError("series arrays must have equal length")
        for arr in (self.consumption, self.temperature, self.gap_mask, self.temp_independent):
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.consumption)

    @property
    def start(self) -> datetime:
        return timeutil.from_epoch_hours(self.start_hour)

    @property
    def end_hour(self) -> int:
        """One past the last hour."""
        return self.start_hour + len(self)

    def hours(self) -> np.ndarray:
        return np.arange(self.start_hour, self.end_hour, dtype=np.int64)

    def slice_hours(self, from_hour: int, to_hour: int) -> "MeterSeries":
        if from_hour < self.start_hour or to_hour > self.end_hour or from_hour >= to_hour:
            raise ValidationError("slice outside series range")
        a = from_hour - self.start_hour
        b = to_hour - self.start_hour
        return MeterSeries(
            meter_id=self.meter_id,
            start_hour=from_hour,
            consumption=self.consumption[a:b],
            temperature=self.temperature[a:b],
            gap_mask=self.gap_mask[a:b],
            temp_independent=None if self.temp_independent is None else self.temp_independent[a:b],
        )

    def iter_readings(self) -> Iterator[HourlyReading]:
        til = self.temp_independent
        for i in range(len(self)):
            temp = float(self.temperature[i])
            yield HourlyReading(
                meter_id=self.meter_id,
                read_time=timeutil.from_epoch_hours(self.start_hour + i),
                consumption=float(self.consumption[i]),
                temperature=None if math.isnan(temp) else temp,
                temp_independent_load=None
                if til is None or math.isnan(til[i])
                else float(til[i]),
            )


def series_from_values(
    meter_id: str,
    start_hour: int,
    consumption: Sequence[float] | np.ndarray,
    temperature: Sequence[float] | np.ndarray | None = None,
    gap_mask: Sequence[bool] | np.ndarray | None = None,
) -> MeterSeries:
    cons = np.asarray(consumption, dtype=np.float64).copy()
    n = len(cons)
    temp = (
        np.full(n, np.nan)
        if temperature is None
        else np.asarray(temperature, dtype=np.float64).copy()
    )
    mask = (
        np.zeros(n, dtype=bool) if gap_mask is None else np.asarray(gap_mask, dtype=bool).copy()
    )
    return MeterSeries(meter_id, start_hour, cons, temp, mask)


@dataclass(frozen=True)
class CustomerRecord:
    """Socio-economic side data for a meter. Coordinates are optional and
    unused by the bundled views."""

    meter_id: str
    feed_area_id: str
    neighborhood_id: str
    anonymized: bool = False
    latitude: float | None = None
    longitude: float | None = None


@dataclass
class StoreConfig:
    """Behavior knobs for the reading store."""

    upsert: bool = False
    max_interpolated_gap_hours: int = 6
    privacy_floor: int = 2
    holidays: set[str] = field(default_factory=set)
