"""Sliding-window stream processing driving daily anomaly detection.

Readings arrive per meter in timestamp order (interleaving across meters is
fine). When a meter's UTC day completes, the day is scored against its
detector using the window's retained history and flushed to the store; the
window then slides forward. Late (non-monotonic) readings are rejected and
counted rather than reprocessed, which keeps stream output identical to a
batch replay of the same data.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from ..analytics.anomaly import AnomalyDetector, AnomalyReport, detect_day
from ..errors import ValidationError
from ..model import HourlyReading, MeterSeries
from ..timeutil import HOURS_PER_DAY


@dataclass(frozen=True)
class WindowSpec:
    size_hours: int = 72  # retained history: three days for lag order 3
    slide_hours: int = 24

    def __post_init__(self) -> None:
        if self.size_hours <= 0 or self.slide_hours <= 0:
            raise ValidationError("window size and slide must be positive")
        if self.size_hours % HOURS_PER_DAY or self.slide_hours % HOURS_PER_DAY:
            raise ValidationError("window size and slide must be whole days of hours")
        if self.slide_hours > self.size_hours:
            raise ValidationError("slide must not exceed window size")

    @property
    def size_days(self) -> int:
        return self.size_hours // HOURS_PER_DAY

    @property
    def slide_days(self) -> int:
        return self.slide_hours // HOURS_PER_DAY


@dataclass
class _MeterState:
    last_hour: int | None = None
    open_day: int | None = None
    values: np.ndarray = field(default_factory=lambda: np.full(HOURS_PER_DAY, np.nan))
    temps: np.ndarray = field(default_factory=lambda: np.full(HOURS_PER_DAY, np.nan))
    history: deque = field(default_factory=deque)  # (day, values) of closed days
    closed_days: int = 0


class StreamProcessor:
    """Feeds an ordered reading stream through per-meter day windows."""

    def __init__(
        self,
        window: WindowSpec,
        detectors: Mapping[str, AnomalyDetector],
        store=None,
    ):
        self.window = window
        self.detectors = dict(detectors)
        self.store = store
        self.late_rejected = 0
        self.readings_processed = 0
        self._states: dict[str, _MeterState] = {}

    def process(self, source: Iterable[HourlyReading]) -> Iterator[AnomalyReport]:
        for reading in source:
            report = self._accept(reading)
            if report is not None:
                yield report
        # closing the stream closes any complete open days
        for meter_id, state in self._states.items():
            if state.open_day is not None and np.isfinite(state.values).all():
                report = self._close_day(meter_id, state)
                if report is not None:
                    yield report

    def process_all(self, source: Iterable[HourlyReading]) -> list[AnomalyReport]:
        return list(self.process(source))

    # ------------------------------------------------------------------

    def _accept(self, reading: HourlyReading) -> AnomalyReport | None:
        state = self._states.setdefault(reading.meter_id, _MeterState())
        hour = reading.epoch_hour
        if state.last_hour is not None and hour <= state.last_hour:
            self.late_rejected += 1
            return None
        state.last_hour = hour
        self.readings_processed += 1

        day = hour // HOURS_PER_DAY
        report = None
        if state.open_day is not None and day != state.open_day:
            report = self._close_day(reading.meter_id, state)
        if state.open_day is None:
            state.open_day = day
            state.values = np.full(HOURS_PER_DAY, np.nan)
            state.temps = np.full(HOURS_PER_DAY, np.nan)
        slot = hour % HOURS_PER_DAY
        state.values[slot] = reading.consumption
        state.temps[slot] = np.nan if reading.temperature is None else reading.temperature

        if slot == HOURS_PER_DAY - 1 and np.isfinite(state.values).all():
            closed = self._close_day(reading.meter_id, state)
            report = report or closed
        return report

    def _close_day(self, meter_id: str, state: _MeterState) -> AnomalyReport | None:
        day = state.open_day
        values = state.values
        temps = state.temps
        state.open_day = None
        state.closed_days += 1

        self._flush(meter_id, day, values, temps)

        report = None
        detector = self.detectors.get(meter_id)
        if detector is not None and state.closed_days % self.window.slide_days == 0:
            p = detector.parx.order
            history = self._history_matrix(state, day, p)
            if history is not None and np.isfinite(values).any():
                report = detect_day(
                    detector,
                    day=day,
                    actual=values,
                    history=history,
                    temperatures=temps,
                )

        state.history.append((day, values.copy()))
        while len(state.history) > self.window.size_days:
            state.history.popleft()
        return report

    def _history_matrix(self, state: _MeterState, day: int, p: int) -> np.ndarray | None:
        """Rows = lag 1..p for the given day, from the retained window."""
        if p > self.window.size_days:
            raise ValidationError(
                f"window retains {self.window.size_days} days but the model needs {p}"
            )
        by_day = dict(state.history)
        rows = []
        for lag in range(1, p + 1):
            past = by_day.get(day - lag)
            if past is None:
                return None
            rows.append(past)
        return np.vstack(rows)

    def _flush(self, meter_id: str, day: int, values: np.ndarray, temps: np.ndarray) -> None:
        if self.store is None:
            return
        present = np.isfinite(values)
        if not present.any():
            return
        series = MeterSeries(
            meter_id=meter_id,
            start_hour=day * HOURS_PER_DAY,
            consumption=np.where(present, values, 0.0),
            temperature=temps.copy(),
            gap_mask=~present,
        )
        self.store.insert_series(series, upsert=True)


def stream_process(
    source: Iterable[HourlyReading],
    window: WindowSpec,
    detectors: Mapping[str, AnomalyDetector],
    store=None,
) -> list[AnomalyReport]:
    """One-shot streaming run; see StreamProcessor for the stateful form."""
    return StreamProcessor(window, detectors, store).process_all(source)
