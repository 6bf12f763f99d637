"""Service facade: everything the HTTP layer and the CLI share.

Owns the reading store plus the durable side state (model registry,
thresholds, anomaly report log, feedback rules) under one data directory:

    <data_dir>/store/          reading partitions + manifest
    <data_dir>/models/         fitted model documents
    <data_dir>/thresholds.json per-meter epsilon settings
    <data_dir>/reports.jsonl   anomaly report log
    <data_dir>/rules.json      feedback rules + resend bookkeeping
    <data_dir>/outbox.jsonl    delivered feedback messages
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .. import timeutil
from ..analytics import export
from ..analytics.anomaly import (
    DEFAULT_EPSILON,
    DEFAULT_TRAIN_DAYS,
    AnomalyReport,
    detect_range,
    train_detector,
)
from ..analytics.forecasting import FORECAST_METHODS, forecast_series
from ..analytics.parx import disaggregate, parx_fit
from ..analytics.profiles import daily_profile, variability_histogram
from ..analytics.segmentation import extract_features, segment_customers
from ..analytics.threeline import three_line_fit
from ..errors import DependencyError, NotFoundError, ValidationError
from ..model import Granularity, StoreConfig
from ..store import AGGREGATE_FNS, ReadingStore
from .feedback import FeedbackEngine, FileOutbox, MemoryOutbox
from .registry import ModelRegistry, ReportLog, ThresholdStore


class AnalyticsService:
    def __init__(self, data_dir: str | Path | None = None, store_config: StoreConfig | None = None):
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self.store = ReadingStore(self.data_dir / "store", store_config)
            self.models = ModelRegistry(self.data_dir / "models")
            self.thresholds = ThresholdStore(self.data_dir / "thresholds.json")
            self.reports = ReportLog(self.data_dir / "reports.jsonl")
            outbox = FileOutbox(self.data_dir / "outbox.jsonl")
            rules_path = self.data_dir / "rules.json"
        else:
            self.store = ReadingStore(None, store_config)
            self.models = ModelRegistry(None)
            self.thresholds = ThresholdStore(None)
            self.reports = ReportLog(None)
            outbox = MemoryOutbox()
            rules_path = None
        self.outbox = outbox
        self.feedback = FeedbackEngine(
            metrics_fn=self.metric_values,
            members_fn=self.scope_members,
            outbox=outbox,
            path=rules_path,
        )

    # ------------------------------------------------------------------
    # range helpers

    def _resolve_range(self, meter_id: str, from_time, to_time) -> tuple[int, int]:
        lo, hi = self.store.series_range(meter_id)
        from_hour = lo if from_time is None else _parse_time(from_time)
        to_hour = hi if to_time is None else _parse_time(to_time)
        if from_hour >= to_hour:
            raise ValidationError("from must be earlier than to")
        return from_hour, to_hour

    # ------------------------------------------------------------------
    # consumption views

    def consumption(self, meter_id, granularity="daily", fn="sum", from_time=None, to_time=None) -> dict:
        gran = Granularity.parse(granularity)
        if fn not in AGGREGATE_FNS:
            raise ValidationError(f"unknown aggregate fn {fn!r}; expected one of {AGGREGATE_FNS}")
        from_hour, to_hour = self._resolve_range(meter_id, from_time, to_time)
        buckets = self.store.aggregate(
            meter_ids=[meter_id], granularity=gran, fn=fn, from_time=from_hour, to_time=to_hour
        )
        return {
            "meter_id": meter_id,
            "granularity": gran.value,
            "fn": fn,
            "buckets": _buckets_doc(buckets),
        }

    def compare(self, meter_id, granularity="daily", from_time=None, to_time=None) -> dict:
        gran = Granularity.parse(granularity)
        from_hour, to_hour = self._resolve_range(meter_id, from_time, to_time)
        own = self.store.aggregate(
            meter_ids=[meter_id], granularity=gran, fn="sum", from_time=from_hour, to_time=to_hour
        )
        neighborhood = self.store.neighborhood_average(
            meter_id, granularity=gran, from_time=from_hour, to_time=to_hour
        )
        return {
            "meter_id": meter_id,
            "granularity": gran.value,
            "self": _buckets_doc(own),
            "neighborhood_avg": _buckets_doc(neighborhood),
        }

    # ------------------------------------------------------------------
    # model fitting pipeline

    def fit_meter(
        self,
        meter_id: str,
        order_p: int = 3,
        train_detector_too: bool = True,
        epsilon: float = DEFAULT_EPSILON,
        detector_train_days: int = DEFAULT_TRAIN_DAYS,
    ) -> dict:
        """Fit and persist all models for a meter, then disaggregate and
        write the temperature-independent load back to the store."""
        lo, hi = self.store.series_range(meter_id)
        series = self.store.query_series(meter_id, lo, hi)

        parx = parx_fit(series, order_p=order_p)
        self.models.save(export.parx_to_doc(parx))
        three = three_line_fit(series)
        self.models.save(export.three_line_to_doc(three))
        disaggregate(parx, series, store=self.store)
        fitted = {"meter_id": meter_id, "parx": True, "three_line": True, "detector": False}
        if train_detector_too:
            detector = train_detector(
                series, epsilon=epsilon, train_days=detector_train_days, order_p=order_p
            )
            self.models.save(export.detector_to_doc(detector))
            fitted["detector"] = True
        return fitted

    # ------------------------------------------------------------------
    # pattern discovery

    def profile(self, meter_id: str) -> dict:
        lo, hi = self.store.series_range(meter_id)
        series = self.store.query_series(meter_id, lo, hi)

        three_doc = self.models.doc("three_line", meter_id)
        if three_doc is None:
            raise DependencyError(f"meter {meter_id}: model not built", stage="three_line_fit")
        til = series.temp_independent
        if til is None or not np.isfinite(til).any():
            raise DependencyError(f"meter {meter_id}: model not built", stage="disaggregate")

        prof = daily_profile(meter_id, series.start_hour, til)
        hist = variability_histogram(series)
        return {
            "meter_id": meter_id,
            "daily_profile": {
                "weekday": _vector(prof.weekday_profile),
                "weekend": _vector(prof.weekend_profile),
                "n_weekdays": prof.n_weekdays,
                "n_weekend_days": prof.n_weekend_days,
            },
            "three_line": {
                "cooling_gradient": three_doc["cooling_gradient"],
                "heating_gradient": three_doc["heating_gradient"],
                "base_load": three_doc["base_load"],
                "p90": three_doc["p90"],
                "p10": three_doc["p10"],
                "temp_lo": three_doc["temp_lo"],
                "temp_hi": three_doc["temp_hi"],
            },
            "histogram": {
                "bucket_count": hist.bucket_count,
                "lo": hist.lo,
                "hi": hist.hi,
                "counts": hist.counts.tolist(),
            },
            "disaggregation": _disaggregation_doc(series),
        }

    # ------------------------------------------------------------------
    # forecasting

    def forecast(self, target, method="parx", granularity="hourly", horizon=24) -> dict:
        """Forecast a meter or a whole feed area (by area id).

        Feed-area forecasts run on the summed member series; the area model
        is fitted on the fly rather than registered.
        """
        if method not in FORECAST_METHODS:
            raise ValidationError(
                f"unknown forecasting method {method!r}; expected one of {FORECAST_METHODS}"
            )
        gran = Granularity.parse(granularity)
        parx_model = None
        try:
            lo, hi = self.store.series_range(target)
            series = self.store.query_series(target, lo, hi)
            if method == "parx":
                parx_model = self.models.parx(target)
                if parx_model is None:
                    raise DependencyError(f"meter {target}: model not built", stage="parx_fit")
        except NotFoundError:
            series = self._feed_area_series(target)
        result = forecast_series(
            series, method=method, granularity=gran, horizon=int(horizon), parx_model=parx_model
        )
        return {
            "meter_id": target,
            "method": method,
            "granularity": gran.value,
            "start": timeutil.format_hour(result.start_hour),
            "values": result.values.tolist(),
            "warnings": list(result.warnings),
        }

    def _feed_area_series(self, feed_area_id: str):
        from ..model import MeterSeries

        members = self.store.feed_area_members(feed_area_id)
        ranges = []
        for meter_id in members:
            try:
                ranges.append(self.store.series_range(meter_id))
            except NotFoundError:
                continue
        if not ranges:
            raise NotFoundError(f"no meter or feed area named {feed_area_id!r}")
        lo = max(r[0] for r in ranges)
        hi = min(r[1] for r in ranges)
        if lo >= hi:
            raise ValidationError(f"feed area {feed_area_id!r} members share no time range")
        total = np.zeros(hi - lo)
        temps = np.zeros(hi - lo)
        temp_counts = np.zeros(hi - lo)
        gaps = np.zeros(hi - lo, dtype=bool)
        for meter_id in members:
            series = self.store.query_series(meter_id, lo, hi)
            total += series.consumption
            finite = np.isfinite(series.temperature)
            temps[finite] += series.temperature[finite]
            temp_counts += finite
            gaps |= series.gap_mask
        with np.errstate(invalid="ignore"):
            mean_temps = np.where(temp_counts > 0, temps / np.maximum(temp_counts, 1), np.nan)
        return MeterSeries(
            meter_id=feed_area_id,
            start_hour=lo,
            consumption=total,
            temperature=mean_temps,
            gap_mask=gaps,
        )

    # ------------------------------------------------------------------
    # segmentation

    def segments(self, k: int, feature_names: Sequence[str] | None = None, seed: int = 0) -> dict:
        names = tuple(feature_names) if feature_names else None
        features = []
        for meter_id in self.models.meters_with("three_line"):
            three = self.models.three_line(meter_id)
            try:
                lo, hi = self.store.series_range(meter_id)
                til = self.store.query_series(meter_id, lo, hi).temp_independent
                features.append(extract_features(meter_id, three, til))
            except (NotFoundError, DependencyError):
                continue
        kwargs = {"feature_names": names} if names else {}
        result = segment_customers(features, k=int(k), seed=int(seed), **kwargs)
        return {
            "k": result.k,
            "feature_names": list(result.feature_names),
            "clusters": [
                {
                    "index": c.index,
                    "members": list(c.members),
                    "centroid": c.centroid,
                }
                for c in result.clusters
            ],
            "assignments": dict(sorted(result.assignments.items())),
        }

    # ------------------------------------------------------------------
    # anomalies

    def detect_and_log(self, meter_id, from_time=None, to_time=None, epsilon=None) -> list[AnomalyReport]:
        """Replay detection over stored days and append to the report log."""
        detector = self.models.detector(meter_id)
        if detector is None:
            raise DependencyError(f"meter {meter_id}: detector not trained", stage="train_detector")
        eps = epsilon if epsilon is not None else self.thresholds.get(meter_id, detector.epsilon)
        from_hour, to_hour = self._resolve_range(meter_id, from_time, to_time)
        # include the lag days before the range for history
        lo, _ = self.store.series_range(meter_id)
        history_start = max(lo, from_hour - detector.parx.order * 24)
        series = self.store.query_series(meter_id, history_start, to_hour)
        reports = [
            r
            for r in detect_range(detector, series, epsilon=eps)
            if r.day * 24 >= from_hour
        ]
        self.reports.extend(reports)
        return reports

    def anomalies(self, meter_id, from_time=None, to_time=None, flagged_only=False) -> dict:
        self.store.series_range(meter_id)  # 404 for unknown meters
        from_day = None if from_time is None else _parse_time(from_time) // 24
        to_day = None if to_time is None else -(-_parse_time(to_time) // 24)
        docs = self.reports.query(meter_id, from_day, to_day, flagged_only)
        return {"meter_id": meter_id, "reports": docs}

    def set_threshold(self, meter_id, epsilon, now=None) -> dict:
        self.store.series_range(meter_id)
        return self.thresholds.set(meter_id, float(epsilon), now)

    def threshold(self, meter_id) -> dict:
        self.store.series_range(meter_id)
        setting = self.thresholds.setting(meter_id)
        if setting is None:
            detector = self.models.detector(meter_id)
            eps = detector.epsilon if detector is not None else DEFAULT_EPSILON
            return {"meter_id": meter_id, "epsilon": eps, "updated_at": None}
        return setting

    # ------------------------------------------------------------------
    # feedback support

    def scope_members(self, scope: str, target: str | None) -> list[str]:
        if scope == "meter":
            return [target] if target else []
        if scope == "neighborhood":
            return self.store.neighborhood_members(target or "")
        return self.store.meters()

    def metric_values(self, metric: str, meters: Sequence[str]) -> dict[str, float | None]:
        values: dict[str, float | None] = {}
        for meter_id in meters:
            if metric == "overall_consumption":
                try:
                    lo, hi = self.store.series_range(meter_id)
                    buckets = self.store.aggregate(meter_ids=[meter_id], fn="sum",
                                                   granularity=Granularity.MONTHLY,
                                                   from_time=lo, to_time=hi)
                    values[meter_id] = float(sum(v for _, v in buckets))
                except NotFoundError:
                    values[meter_id] = None
            else:
                three = self.models.three_line(meter_id)
                values[meter_id] = None if three is None else getattr(three, metric)
        return values


def _parse_time(value) -> int:
    if isinstance(value, int):
        return value
    if isinstance(value, datetime):
        return timeutil.to_epoch_hours(value)
    return timeutil.parse_hour_timestamp(str(value))


def _buckets_doc(buckets) -> list[dict]:
    return [
        {"start": start.strftime("%Y-%m-%dT%H:%M:%SZ"), "value": float(value)}
        for start, value in buckets
    ]


def _vector(arr) -> list | None:
    return None if arr is None else [float(v) for v in arr]


def _disaggregation_doc(series) -> dict | None:
    """Recent fortnight of the stored consumption/activity-load split for
    the stacked pattern view."""
    til = series.temp_independent
    if til is None:
        return None
    finite = np.flatnonzero(np.isfinite(til))
    if finite.size == 0:
        return None
    end = int(finite[-1]) + 1
    start = max(end - 14 * 24, 0)
    window_til = til[start:end]
    window_total = series.consumption[start:end]
    temp_dep = np.where(np.isfinite(window_til), window_total - window_til, np.nan)
    return {
        "start": timeutil.format_hour(series.start_hour + start),
        "total": [float(v) for v in window_total],
        "temp_independent": [None if not np.isfinite(v) else float(v) for v in window_til],
        "temp_dependent": [None if not np.isfinite(v) else float(v) for v in temp_dep],
    }


def now_utc() -> datetime:
    return datetime.now(timezone.utc)
