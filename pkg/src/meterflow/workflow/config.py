"""Workflow definitions from a YAML config file.

Schema:

    workflows:
      - name: nightly-analytics
        schedule: {kind: deterministic, interval: daily, anchor: "2014-01-01T02:00:00Z"}
        worklets:
          - {name: refresh-models, kind: analytics, op: fit_meters}
          - {name: scan-anomalies, kind: analytics, op: detect_recent, params: {days: 1}}
          - {name: ping, kind: notify, op: notify, params: {message: "nightly run done"}}

Worklet `op` names resolve through the registry below; each op receives the
run context (store/serviceing state) and the previous worklet's output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import yaml

from .. import timeutil
from ..errors import ConfigError
from .engine import Schedule, Workflow, Worklet, WorkletKind


def _op_ingest_csv(ctx, payload):
    from ..ingest.csvio import join_weather, parse_meter_csv, parse_weather_csv

    meter_csv = ctx.params["meter_csv"]
    readings = parse_meter_csv(meter_csv, skip_errors=bool(ctx.params.get("skip_errors")))
    weather_csv = ctx.params.get("weather_csv")
    if weather_csv:
        readings = join_weather(readings, parse_weather_csv(weather_csv))
    inserted = ctx.store.insert_readings(readings, upsert=True)
    return {"inserted": inserted}


def _op_anonymize_csv(ctx, payload):
    from ..ingest.anonymize import anonymize_readings
    from ..ingest.csvio import parse_meter_csv

    rows = parse_meter_csv(ctx.params["meter_csv"])
    out = anonymize_readings(rows, salt=ctx.params["salt"])
    out_path = Path(ctx.params["out_csv"])
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w") as fh:
        fh.write("meter_id,timestamp,kwh\n")
        for r in out:
            fh.write(f"{r.meter_id},{timeutil.format_hour(r.epoch_hour)},{r.consumption!r}\n")
    return {"rows": len(out), "path": str(out_path)}


def _op_fit_meters(ctx, payload):
    service = ctx.params.get("service") or getattr(ctx, "service", None)
    fitted = []
    for meter_id in ctx.store.meters():
        service.fit_meter(
            meter_id,
            train_detector_too=bool(ctx.params.get("detectors", True)),
            detector_train_days=int(ctx.params.get("train_days", 182)),
        )
        fitted.append(meter_id)
    return {"fitted": fitted}


def _op_detect_recent(ctx, payload):
    service = ctx.params.get("service") or getattr(ctx, "service", None)
    days = int(ctx.params.get("days", 1))
    flagged = 0
    total = 0
    for meter_id in ctx.store.meters():
        try:
            lo, hi = ctx.store.series_range(meter_id)
        except Exception:
            continue
        reports = service.detect_and_log(meter_id, from_time=max(lo, hi - days * 24), to_time=hi)
        total += len(reports)
        flagged += sum(r.flagged for r in reports)
    return {"reports": total, "flagged": flagged}


def _op_evaluate_rules(ctx, payload):
    service = ctx.params.get("service") or getattr(ctx, "service", None)
    messages = service.feedback.evaluate(ctx.now)
    return {"messages": len(messages)}


def _op_housekeeping(ctx, payload):
    # placeholder unit: reports what it would prune, prunes nothing
    return {"inspected": len(ctx.store.meters())}


def _op_notify(ctx, payload):
    service = ctx.params.get("service") or getattr(ctx, "service", None)
    message = {
        "rule_id": None,
        "meter_id": None,
        "metric": "workflow",
        "value": None,
        "rank": None,
        "scope_size": None,
        "message": str(ctx.params.get("message", "workflow finished")),
        "sent_at": ctx.now.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    service.outbox.deliver(message)
    return {"notified": True}


OPS: dict[str, Callable] = {
    "ingest_csv": _op_ingest_csv,
    "anonymize_csv": _op_anonymize_csv,
    "fit_meters": _op_fit_meters,
    "detect_recent": _op_detect_recent,
    "evaluate_rules": _op_evaluate_rules,
    "housekeeping": _op_housekeeping,
    "notify": _op_notify,
}


def load_workflows(path: str | Path, service=None) -> list[Workflow]:
    """Parse the YAML config into Workflow objects bound to a service."""
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict) or "workflows" not in raw:
        raise ConfigError(f"{path}: expected a top-level 'workflows' list")
    workflows = []
    for wf_doc in raw["workflows"]:
        workflows.append(_build_workflow(wf_doc, service, path))
    return workflows


def _build_workflow(doc: dict, service, path) -> Workflow:
    try:
        name = doc["name"]
        worklet_docs = doc["worklets"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: workflow entry missing {exc}")
    schedule = None
    if doc.get("schedule"):
        sched = doc["schedule"]
        anchor = sched.get("anchor", "1970-01-01T00:00:00Z")
        if isinstance(anchor, str):
            anchor = timeutil.parse_hour_timestamp(anchor) * 3600
        schedule = Schedule(
            kind=sched.get("kind", "deterministic"),
            interval=sched.get("interval", "daily"),
            anchor=anchor,
            cluster_class=sched.get("cluster_class", "default"),
        )
    worklets = []
    for w_doc in worklet_docs:
        op_name = w_doc.get("op")
        if op_name not in OPS:
            raise ConfigError(f"{path}: unknown worklet op {op_name!r}")
        params = dict(w_doc.get("params", {}))
        if service is not None:
            params["service"] = service
        worklets.append(
            Worklet(
                name=w_doc.get("name", op_name),
                kind=WorkletKind(w_doc.get("kind", "transform")),
                fn=OPS[op_name],
                params=params,
            )
        )
    return Workflow(
        name=name,
        worklets=tuple(worklets),
        schedule=schedule,
        enabled=bool(doc.get("enabled", True)),
        retries=int(doc.get("retries", 0)),
        sim_duration_seconds=int(doc.get("sim_duration_seconds", 0)),
    )
