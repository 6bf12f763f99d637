"""Hour-aligned UTC time arithmetic.

All timestamps in the engine are UTC and aligned to exact hour boundaries.
Internally they are carried as integer epoch hours (hours since
1970-01-01T00:00:00Z), which makes calendar bucketing plain integer math
everywhere except months.
"""

from __future__ import annotations

from datetime import datetime, timezone

SECONDS_PER_HOUR = 3600
HOURS_PER_DAY = 24
HOURS_PER_WEEK = 168

# 1970-01-01 was a Thursday; shift so Monday-aligned weeks land on day 0.
_EPOCH_WEEKDAY = 3


def to_epoch_hours(ts: datetime) -> int:
    """Convert an hour-aligned UTC datetime to epoch hours.

    Naive datetimes are taken as UTC. Raises AlignmentError for timestamps
    off the hour boundary.
    """
    from .errors import AlignmentError

    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    seconds = ts.timestamp()
    if seconds != int(seconds) or int(seconds) % SECONDS_PER_HOUR != 0:
        raise AlignmentError(f"timestamp {ts.isoformat()} is not hour-aligned")
    return int(seconds) // SECONDS_PER_HOUR


def from_epoch_hours(hour: int) -> datetime:
    return datetime.fromtimestamp(hour * SECONDS_PER_HOUR, tz=timezone.utc)


def parse_hour_timestamp(text: str) -> int:
    """Parse an ISO-8601 timestamp like 2014-01-01T07:00:00Z to epoch hours."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError as exc:
        from .errors import ParseError

        raise ParseError(f"unparseable timestamp {text!r}") from exc
    return to_epoch_hours(ts)


def format_hour(hour: int) -> str:
    return from_epoch_hours(hour).strftime("%Y-%m-%dT%H:%M:%SZ")


def format_day(day: int) -> str:
    return from_epoch_hours(day * HOURS_PER_DAY).strftime("%Y-%m-%d")


def hour_of_day(hour: int) -> int:
    return hour % HOURS_PER_DAY


def day_of_hour(hour: int) -> int:
    return hour // HOURS_PER_DAY


def weekday_of_day(day: int) -> int:
    """0 = Monday ... 6 = Sunday."""
    return (day + _EPOCH_WEEKDAY) % 7


def is_weekend_day(day: int) -> bool:
    return weekday_of_day(day) >= 5


def day_start(hour: int) -> int:
    return (hour // HOURS_PER_DAY) * HOURS_PER_DAY


def week_start(hour: int) -> int:
    day = hour // HOURS_PER_DAY
    monday = day - weekday_of_day(day)
    return monday * HOURS_PER_DAY


def month_start(hour: int) -> int:
    dt = from_epoch_hours(hour)
    return to_epoch_hours(dt.replace(day=1, hour=0, minute=0, second=0, microsecond=0))


def next_month_start(hour: int) -> int:
    dt = from_epoch_hours(month_start(hour))
    if dt.month == 12:
        nxt = dt.replace(year=dt.year + 1, month=1)
    else:
        nxt = dt.replace(month=dt.month + 1)
    return to_epoch_hours(nxt)


def add_months(hour: int, months: int) -> int:
    """Advance an hour-aligned timestamp by calendar months, keeping the
    day-of-month (clamped to the target month's length) and time of day."""
    dt = from_epoch_hours(hour)
    month_index = (dt.year * 12 + dt.month - 1) + months
    year, month = divmod(month_index, 12)
    month += 1
    day = dt.day
    while True:
        try:
            return to_epoch_hours(dt.replace(year=year, month=month, day=day))
        except ValueError:
            day -= 1
