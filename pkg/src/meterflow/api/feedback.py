"""Rule-driven customer feedback messages.

Utilities define rules over consumption metrics (including rank within the
neighborhood or the whole city); when a rule matches, a rendered message
goes to an outbox adapter, at most once per resend interval per meter. Only
a file-backed outbox ships; the adapter interface is the seam for real
transports.
"""

from __future__ import annotations

import itertools
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Protocol

from .. import jsonio
from ..errors import NotFoundError, ValidationError

METRICS = ("overall_consumption", "base_load", "heating_gradient", "cooling_gradient", "rank")
SCOPES = ("meter", "neighborhood", "city")
COMPARATORS = {
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
}


class OutboxAdapter(Protocol):
    def deliver(self, message: dict) -> None: ...


class MemoryOutbox:
    def __init__(self) -> None:
        self.messages: list[dict] = []

    def deliver(self, message: dict) -> None:
        self.messages.append(message)


class FileOutbox:
    """JSON-lines outbox; each line is one delivered message."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.messages: list[dict] = []
        if self.path.exists():
            with open(self.path) as fh:
                self.messages = [jsonio.loads(line) for line in fh if line.strip()]

    def deliver(self, message: dict) -> None:
        self.messages.append(message)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a") as fh:
            fh.write(jsonio.dumps(message) + "\n")


def validate_rule(rule: dict) -> dict:
    if rule.get("metric") not in METRICS:
        raise ValidationError(f"metric must be one of {METRICS}, got {rule.get('metric')!r}")
    if rule.get("scope") not in SCOPES:
        raise ValidationError(f"scope must be one of {SCOPES}, got {rule.get('scope')!r}")
    if rule.get("comparator") not in COMPARATORS:
        raise ValidationError(
            f"comparator must be one of {tuple(COMPARATORS)}, got {rule.get('comparator')!r}"
        )
    if rule.get("scope") in ("meter", "neighborhood") and not rule.get("target"):
        raise ValidationError(f"scope {rule['scope']!r} needs a target")
    bound = rule.get("bound")
    if not isinstance(bound, (int, float)):
        raise ValidationError("bound must be numeric")
    resend = rule.get("min_resend_seconds", 0)
    if not isinstance(resend, int) or resend <= 0:
        raise ValidationError("min_resend_seconds must be a positive integer")
    if not rule.get("message_template"):
        raise ValidationError("message_template is required")
    return rule


class FeedbackEngine:
    """Holds the rules and evaluates them against current metric values.

    metrics_fn(metric, meter_ids) -> {meter_id: value} is supplied by the
    service layer; rank rules rank the scope's meters by overall consumption
    (1 = highest).
    """

    def __init__(self, metrics_fn, members_fn, outbox: OutboxAdapter, path: str | Path | None = None):
        self._metrics_fn = metrics_fn
        self._members_fn = members_fn  # (scope, target) -> meter ids
        self.outbox = outbox
        self.path = Path(path) if path else None
        self._rules: dict[int, dict] = {}
        self._last_sent: dict[str, int] = {}  # "rule_id:meter" -> epoch seconds
        self._ids = itertools.count(1)
        self._lock = threading.RLock()
        if self.path is not None and self.path.exists():
            state = jsonio.loads(self.path.read_text())
            self._rules = {int(k): v for k, v in state.get("rules", {}).items()}
            self._last_sent = dict(state.get("last_sent", {}))
            if self._rules:
                self._ids = itertools.count(max(self._rules) + 1)

    def add_rule(self, rule: dict) -> dict:
        rule = dict(validate_rule(rule))
        with self._lock:
            rule_id = next(self._ids)
            rule["rule_id"] = rule_id
            rule.setdefault("enabled", True)
            self._rules[rule_id] = rule
            self._persist()
            return dict(rule)

    def rules(self) -> list[dict]:
        with self._lock:
            return [dict(r) for _, r in sorted(self._rules.items())]

    def set_enabled(self, rule_id: int, enabled: bool) -> dict:
        with self._lock:
            if rule_id not in self._rules:
                raise NotFoundError(f"rule {rule_id} does not exist")
            self._rules[rule_id]["enabled"] = enabled
            self._persist()
            return dict(self._rules[rule_id])

    def evaluate(self, now: datetime) -> list[dict]:
        """Evaluate all enabled rules; deliver and return new messages."""
        now_sec = int(now.replace(tzinfo=now.tzinfo or timezone.utc).timestamp())
        sent: list[dict] = []
        with self._lock:
            for rule_id, rule in sorted(self._rules.items()):
                if not rule.get("enabled", True):
                    continue
                meters = self._members_fn(rule["scope"], rule.get("target"))
                if not meters:
                    continue
                values, ranks = self._values(rule, meters)
                compare = COMPARATORS[rule["comparator"]]
                for meter_id in meters:
                    value = values.get(meter_id)
                    if value is None:
                        continue
                    subject = ranks.get(meter_id) if rule["metric"] == "rank" else value
                    if subject is None or not compare(subject, rule["bound"]):
                        continue
                    key = f"{rule_id}:{meter_id}"
                    last = self._last_sent.get(key)
                    if last is not None and now_sec - last < rule["min_resend_seconds"]:
                        continue
                    message = self._render(rule, meter_id, value, ranks.get(meter_id), len(meters), now_sec)
                    self.outbox.deliver(message)
                    self._last_sent[key] = now_sec
                    sent.append(message)
            if sent:
                self._persist()
        return sent

    def _values(self, rule: dict, meters: list[str]):
        metric = rule["metric"]
        base_metric = "overall_consumption" if metric == "rank" else metric
        values = self._metrics_fn(base_metric, meters)
        ranked = sorted(
            (m for m in meters if values.get(m) is not None),
            key=lambda m: (-values[m], m),
        )
        ranks = {m: i + 1 for i, m in enumerate(ranked)}
        return values, ranks

    def _render(self, rule, meter_id, value, rank, size, now_sec) -> dict:
        rendered = rule["message_template"].format(
            meter_id=meter_id,
            value=value,
            rank=rank,
            size=size,
            metric=rule["metric"],
            bound=rule["bound"],
        )
        return {
            "rule_id": rule["rule_id"],
            "meter_id": meter_id,
            "metric": rule["metric"],
            "value": value,
            "rank": rank,
            "scope_size": size,
            "message": rendered,
            "sent_at": datetime.fromtimestamp(now_sec, tz=timezone.utc).strftime(
                "%Y-%m-%dT%H:%M:%SZ"
            ),
        }

    def _persist(self) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        state = {
            "rules": {str(k): v for k, v in sorted(self._rules.items())},
            "last_sent": self._last_sent,
        }
        self.path.write_text(jsonio.dumps(state))
