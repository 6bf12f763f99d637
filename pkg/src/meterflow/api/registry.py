"""Durable side state for the service: fitted models, per-meter thresholds,
and the anomaly report log."""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path

from .. import jsonio, timeutil
from ..analytics import export
from ..analytics.anomaly import AnomalyDetector, AnomalyReport
from ..analytics.parx import ParxModel
from ..analytics.threeline import ThreeLineModel
from ..errors import ValidationError

MODEL_KINDS = ("parx", "three_line", "anomaly_detector")


class ModelRegistry:
    """Fitted models as one JSON document per (kind, meter), kept in memory
    and mirrored to <root>/<kind>/<meter>.json when a root is set."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root else None
        self._docs: dict[tuple[str, str], dict] = {}
        self._lock = threading.RLock()
        if self.root is not None:
            self._load()

    def _load(self) -> None:
        for kind in MODEL_KINDS:
            kind_dir = self.root / kind
            if not kind_dir.is_dir():
                continue
            for path in sorted(kind_dir.glob("*.json")):
                doc = export.load_model(path)
                self._docs[(kind, doc["meter_id"])] = doc

    def save(self, doc: dict) -> None:
        kind = doc.get("kind")
        if kind not in MODEL_KINDS:
            raise ValidationError(f"unknown model kind {kind!r}")
        meter_id = doc["meter_id"]
        with self._lock:
            self._docs[(kind, meter_id)] = doc
            if self.root is not None:
                kind_dir = self.root / kind
                kind_dir.mkdir(parents=True, exist_ok=True)
                export.save_model(doc, kind_dir / f"{_safe(meter_id)}.json")

    def doc(self, kind: str, meter_id: str) -> dict | None:
        with self._lock:
            return self._docs.get((kind, meter_id))

    def meters_with(self, kind: str) -> list[str]:
        with self._lock:
            return sorted(m for k, m in self._docs if k == kind)

    def parx(self, meter_id: str) -> ParxModel | None:
        doc = self.doc("parx", meter_id)
        return None if doc is None else export.parx_from_doc(doc)

    def three_line(self, meter_id: str) -> ThreeLineModel | None:
        doc = self.doc("three_line", meter_id)
        return None if doc is None else export.three_line_from_doc(doc)

    def detector(self, meter_id: str) -> AnomalyDetector | None:
        doc = self.doc("anomaly_detector", meter_id)
        return None if doc is None else export.detector_from_doc(doc)


def _safe(meter_id: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in meter_id)[:80]


class ThresholdStore:
    """Per-meter detection thresholds; updates apply to subsequent
    detections only (past reports are immutable)."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._settings: dict[str, dict] = {}
        self._lock = threading.RLock()
        if self.path is not None and self.path.exists():
            self._settings = jsonio.loads(self.path.read_text())

    def set(self, meter_id: str, epsilon: float, now: datetime | None = None) -> dict:
        if not 0.0 < epsilon < 1.0:
            raise ValidationError(f"epsilon must be in (0, 1), got {epsilon}")
        now = now or datetime.now(timezone.utc)
        with self._lock:
            setting = {
                "meter_id": meter_id,
                "epsilon": epsilon,
                "updated_at": now.strftime("%Y-%m-%dT%H:%M:%SZ"),
            }
            self._settings[meter_id] = setting
            self._persist()
            return dict(setting)

    def get(self, meter_id: str, default: float) -> float:
        with self._lock:
            setting = self._settings.get(meter_id)
            return default if setting is None else float(setting["epsilon"])

    def setting(self, meter_id: str) -> dict | None:
        with self._lock:
            setting = self._settings.get(meter_id)
            return None if setting is None else dict(setting)

    def _persist(self) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(jsonio.dumps(self._settings))


class ReportLog:
    """Append-only anomaly report log (JSON lines)."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._reports: list[dict] = []
        self._lock = threading.RLock()
        if self.path is not None and self.path.exists():
            with open(self.path) as fh:
                self._reports = [jsonio.loads(line) for line in fh if line.strip()]

    def append(self, report: AnomalyReport) -> None:
        doc = report.to_doc()
        with self._lock:
            self._reports.append(doc)
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a") as fh:
                    fh.write(jsonio.dumps(doc) + "\n")

    def extend(self, reports) -> None:
        for report in reports:
            self.append(report)

    def query(
        self,
        meter_id: str,
        from_day: int | None = None,
        to_day: int | None = None,
        flagged_only: bool = False,
    ) -> list[dict]:
        with self._lock:
            out = []
            for doc in self._reports:
                if doc["meter_id"] != meter_id:
                    continue
                day = timeutil.parse_hour_timestamp(doc["day"] + "T00:00:00Z") // 24
                if from_day is not None and day < from_day:
                    continue
                if to_day is not None and day >= to_day:
                    continue
                if flagged_only and not doc["flagged"]:
                    continue
                out.append(dict(doc))
            return out
