"""CSV parsers for meter and weather files, and the weather join.

Meter files:   header ``meter_id,timestamp,kwh``
Weather files: header ``timestamp,temp_c``
Timestamps are ISO-8601 on the hour, e.g. ``2014-01-01T07:00:00Z``.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Sequence

from .. import timeutil
from ..errors import AlignmentError, ParseError, ValidationError
from ..model import HourlyReading

logger = logging.getLogger(__name__)

METER_HEADER = ["meter_id", "timestamp", "kwh"]
WEATHER_HEADER = ["timestamp", "temp_c"]

# weather gaps longer than this stay unjoined
MAX_WEATHER_INTERP_HOURS = 3


def parse_meter_csv(path: str | Path, skip_errors: bool = False) -> list[HourlyReading]:
    """Parse a meter CSV into readings (temperature left absent).

    Malformed rows raise ParseError naming the line; with skip_errors=True
    they are logged and dropped instead.
    """
    rows: list[HourlyReading] = []
    for line_no, record in _read_rows(path, METER_HEADER):
        try:
            meter_id, ts_text, kwh_text = record
            hour = timeutil.parse_hour_timestamp(ts_text)
            kwh = float(kwh_text)
            rows.append(
                HourlyReading(
                    meter_id=meter_id,
                    read_time=timeutil.from_epoch_hours(hour),
                    consumption=kwh,
                )
            )
        except (ParseError, AlignmentError, ValidationError, ValueError) as exc:
            if skip_errors:
                logger.warning("%s line %d: skipping bad row (%s)", path, line_no, exc)
                continue
            raise ParseError(f"{path} line {line_no}: {exc}", line=line_no) from exc
    return rows


def parse_weather_csv(path: str | Path, skip_errors: bool = False) -> list[tuple[int, float]]:
    """Parse a weather CSV into (epoch hour, degrees C) pairs.

    A repeated timestamp wins over earlier entries (with a warning).
    """
    by_hour: dict[int, float] = {}
    order: list[int] = []
    for line_no, record in _read_rows(path, WEATHER_HEADER):
        try:
            ts_text, temp_text = record
            hour = timeutil.parse_hour_timestamp(ts_text)
            temp = float(temp_text)
        except (ParseError, AlignmentError, ValueError) as exc:
            if skip_errors:
                logger.warning("%s line %d: skipping bad row (%s)", path, line_no, exc)
                continue
            raise ParseError(f"{path} line {line_no}: {exc}", line=line_no) from exc
        if hour in by_hour:
            logger.warning(
                "%s line %d: duplicate weather timestamp %s, keeping the later value",
                path,
                line_no,
                timeutil.format_hour(hour),
            )
        else:
            order.append(hour)
        by_hour[hour] = temp
    return [(hour, by_hour[hour]) for hour in order]


def _read_rows(path: str | Path, header: list[str]):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header {','.join(header)}")
        if [c.strip() for c in first] != header:
            raise ParseError(
                f"{path}: bad header {first!r}, expected {','.join(header)}", line=1
            )
        for line_no, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise ParseError(
                    f"{path} line {line_no}: expected {len(header)} columns, got {len(record)}",
                    line=line_no,
                )
            yield line_no, [c.strip() for c in record]


def join_weather(
    readings: Sequence[HourlyReading], weather: Sequence[tuple[int, float]]
) -> list[HourlyReading]:
    """Fill reading temperatures from (hour, temp) pairs.

    Exact hours match directly; weather gaps up to 3 hours are linearly
    interpolated; longer gaps leave the temperature absent. Raises when the
    time ranges do not overlap at all.
    """
    if not readings or not weather:
        raise ValidationError("both readings and weather are required for a join")
    temp_by_hour = dict(weather)
    hours = sorted(temp_by_hour)
    lo, hi = hours[0], hours[-1]
    if max(r.epoch_hour for r in readings) < lo or min(r.epoch_hour for r in readings) > hi:
        raise ValidationError("reading and weather time ranges do not overlap")

    import bisect

    out: list[HourlyReading] = []
    for reading in readings:
        hour = reading.epoch_hour
        temp = temp_by_hour.get(hour)
        if temp is None and lo < hour < hi:
            right = bisect.bisect_left(hours, hour)
            left = right - 1
            span = hours[right] - hours[left]
            if span - 1 <= MAX_WEATHER_INTERP_HOURS:
                frac = (hour - hours[left]) / span
                temp = temp_by_hour[hours[left]] * (1 - frac) + temp_by_hour[hours[right]] * frac
        if temp is None:
            out.append(reading)
        else:
            out.append(
                HourlyReading(
                    meter_id=reading.meter_id,
                    read_time=reading.read_time,
                    consumption=reading.consumption,
                    temperature=temp,
                    temp_independent_load=reading.temp_independent_load,
                )
            )
    return out
