"""Operator command line.

Subcommands: ingest, generate, fit, disaggregate, profile, segment,
forecast, detect, evaluate, run-workflows, serve. All state lives under
--data-dir (or $METERFLOW_DATA_DIR). Machine-readable output via
--format json|tsv.
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter
from pathlib import Path

from . import jsonio, timeutil
from .api.service import AnalyticsService
from .errors import MeterFlowError
from .model import CustomerRecord

DEFAULT_DATA_DIR = "./meterflow-data"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return args.handler(args)
    except MeterFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meterflow")
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("METERFLOW_DATA_DIR", DEFAULT_DATA_DIR),
        help="state directory (env: METERFLOW_DATA_DIR)",
    )
    parser.add_argument("--format", choices=("json", "tsv"), default="tsv")
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    p = sub.add_parser("ingest", help="load meter (and optional weather) CSV files")
    p.add_argument("--meter-csv", required=True)
    p.add_argument("--weather-csv")
    p.add_argument("--anonymize-salt")
    p.add_argument("--skip-errors", action="store_true")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("generate", help="generate synthetic meters into the store")
    p.add_argument("--series", type=int, default=10)
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--anomalies", type=int, default=0)
    p.add_argument("--anomaly-factor", type=float, default=3.0)
    p.add_argument("--anomaly-start-day", type=int, default=0)
    p.add_argument("--weekend-factor", type=float, default=1.0)
    p.add_argument("--weekend-noise-factor", type=float, default=1.0)
    p.add_argument("--start", default="2014-01-01T00:00:00Z")
    p.add_argument("--neighborhood-size", type=int, default=5)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("fit", help="fit models for stored meters")
    p.add_argument("--meters", nargs="*", default=None, help="default: all")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--train-days", type=int, default=182)
    p.add_argument("--no-detector", action="store_true")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("disaggregate", help="refresh the temperature-independent load column")
    p.add_argument("--meters", nargs="*", default=None)
    p.set_defaults(handler=cmd_disaggregate)

    p = sub.add_parser("profile", help="daily profile + thermal summary for one meter")
    p.add_argument("--meter", required=True)
    p.set_defaults(handler=cmd_profile)

    p = sub.add_parser("segment", help="cluster customers on extracted features")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--features", default=None, help="comma-separated feature names")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_segment)

    p = sub.add_parser("forecast", help="forecast one meter")
    p.add_argument("--meter", required=True)
    p.add_argument("--method", default="parx")
    p.add_argument("--granularity", default="hourly")
    p.add_argument("--horizon", type=int, default=24)
    p.set_defaults(handler=cmd_forecast)

    p = sub.add_parser("detect", help="train detectors and replay a date range")
    p.add_argument("--meters", nargs="*", default=None)
    p.add_argument("--train-days", type=int, default=182)
    p.add_argument("--epsilon", type=float, nargs="+", default=[0.01])
    p.add_argument("--from", dest="from_time", default=None)
    p.add_argument("--to", dest="to_time", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_detect)

    p = sub.add_parser("evaluate", help="walk-forward forecast comparison")
    p.add_argument("--meters", nargs="*", default=None)
    p.add_argument("--train-fraction", type=float, default=0.25)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("run-workflows", help="drive scheduled workflows")
    p.add_argument("--config", required=True)
    p.add_argument("--simulated-clock", default=None, help="START..END (ISO hours)")
    p.add_argument("--step", type=int, default=3600, help="tick step seconds")
    p.set_defaults(handler=cmd_run_workflows)

    p = sub.add_parser("serve", help="serve the HTTP API (and dashboard assets if built)")
    p.add_argument("--listen", default="127.0.0.1:8800")
    p.add_argument("--static-dir", default=None)
    p.set_defaults(handler=cmd_serve)

    return parser


def _service(args) -> AnalyticsService:
    return AnalyticsService(Path(args.data_dir))


def _emit(args, doc, tsv_rows=None, tsv_header=None) -> None:
    if args.format == "json" or tsv_rows is None:
        print(jsonio.dumps(doc))
    else:
        if tsv_header:
            print("\t".join(tsv_header))
        for row in tsv_rows:
            print("\t".join(_cell(v) for v in row))


def _cell(value) -> str:
    if isinstance(value, float):
        return jsonio.format_float(value)
    return str(value)


# ----------------------------------------------------------------------


def cmd_ingest(args) -> int:
    from .ingest.anonymize import anonymize_readings
    from .ingest.csvio import join_weather, parse_meter_csv, parse_weather_csv

    service = _service(args)
    readings = parse_meter_csv(args.meter_csv, skip_errors=args.skip_errors)
    if args.weather_csv:
        readings = join_weather(readings, parse_weather_csv(args.weather_csv))
    if args.anonymize_salt:
        readings = anonymize_readings(readings, args.anonymize_salt)
    inserted = service.store.insert_readings(readings, upsert=True)
    _emit(args, {"inserted": inserted}, [(inserted,)], ("inserted",))
    return 0


def cmd_generate(args) -> int:
    from .ingest.synthetic import (
        GeneratorSpec,
        default_profiles,
        generate_series,
        write_labels,
    )
    from dataclasses import replace

    service = _service(args)
    profiles = tuple(
        replace(
            p,
            weekend_factor=args.weekend_factor,
            weekend_noise_factor=args.weekend_noise_factor,
        )
        for p in default_profiles()
    )
    spec = GeneratorSpec(
        n_series=args.series,
        span_hours=args.days * 24,
        noise_sigma=args.noise,
        rng_seed=args.seed,
        seed_profiles=profiles,
        start_hour=timeutil.parse_hour_timestamp(args.start),
        anomalies_per_series=args.anomalies,
        anomaly_factor=args.anomaly_factor,
        anomaly_start_day=args.anomaly_start_day,
    )
    labels = []
    customers = []
    for i, (series, series_labels) in enumerate(generate_series(spec)):
        service.store.insert_series(series, upsert=True)
        labels.append(series_labels)
        customers.append(
            CustomerRecord(
                meter_id=series.meter_id,
                feed_area_id=f"area-{i // (4 * args.neighborhood_size):03d}",
                neighborhood_id=f"hood-{i // args.neighborhood_size:03d}",
            )
        )
    service.store.register_customers(customers)
    labels_path = Path(args.data_dir) / "labels.json"
    write_labels(labels, labels_path)
    doc = {"generated": len(labels), "labels": str(labels_path)}
    _emit(args, doc, [(len(labels), str(labels_path))], ("generated", "labels"))
    return 0


def _target_meters(service, requested) -> list[str]:
    from .errors import NotFoundError

    meters = service.store.meters()
    if requested:
        missing = sorted(set(requested) - set(meters))
        if missing:
            raise NotFoundError(f"unknown meters {missing}")
        return list(requested)
    if not meters:
        raise NotFoundError("the store has no meters")
    return meters


def cmd_fit(args) -> int:
    service = _service(args)
    rows = []
    for meter_id in _target_meters(service, args.meters):
        fitted = service.fit_meter(
            meter_id,
            order_p=args.order,
            train_detector_too=not args.no_detector,
            epsilon=args.epsilon,
            detector_train_days=args.train_days,
        )
        rows.append((meter_id, fitted["parx"], fitted["three_line"], fitted["detector"]))
    _emit(
        args,
        {"fitted": [r[0] for r in rows]},
        rows,
        ("meter", "parx", "three_line", "detector"),
    )
    return 0


def cmd_disaggregate(args) -> int:
    from .analytics.parx import disaggregate

    service = _service(args)
    rows = []
    for meter_id in _target_meters(service, args.meters):
        model = service.models.parx(meter_id)
        if model is None:
            print(f"error: meter {meter_id} has no fitted model (run fit)", file=sys.stderr)
            return 1
        lo, hi = service.store.series_range(meter_id)
        series = service.store.query_series(meter_id, lo, hi)
        result = disaggregate(model, series, store=service.store)
        rows.append((meter_id, int(result.available.sum())))
    _emit(args, {"disaggregated": {m: n for m, n in rows}}, rows, ("meter", "hours"))
    return 0


def cmd_profile(args) -> int:
    service = _service(args)
    doc = service.profile(args.meter)
    weekday = doc["daily_profile"]["weekday"] or []
    rows = [(h, v) for h, v in enumerate(weekday)]
    _emit(args, doc, rows, ("hour", "weekday_kwh"))
    return 0


def cmd_segment(args) -> int:
    service = _service(args)
    names = [f.strip() for f in args.features.split(",")] if args.features else None
    doc = service.segments(k=args.k, feature_names=names, seed=args.seed)
    rows = [
        (c["index"], len(c["members"]), " ".join(c["members"][:6]))
        for c in doc["clusters"]
    ]
    _emit(args, doc, rows, ("cluster", "size", "members"))
    return 0


def cmd_forecast(args) -> int:
    service = _service(args)
    doc = service.forecast(
        args.meter, method=args.method, granularity=args.granularity, horizon=args.horizon
    )
    rows = [(i, v) for i, v in enumerate(doc["values"])]
    _emit(args, doc, rows, ("bucket", "kwh"))
    return 0


def cmd_detect(args) -> int:
    service = _service(args)
    meters = _target_meters(service, args.meters)
    epsilons = sorted(args.epsilon)
    # train any missing detectors, then replay per threshold
    for meter_id in meters:
        if service.models.detector(meter_id) is None:
            lo, hi = service.store.series_range(meter_id)
            series = service.store.query_series(meter_id, lo, hi)
            from .analytics.anomaly import train_detector
            from .analytics import export

            detector = train_detector(series, epsilon=epsilons[0], train_days=args.train_days)
            service.models.save(export.detector_to_doc(detector))

    daily: dict[float, Counter] = {eps: Counter() for eps in epsilons}
    for meter_id in meters:
        for eps in epsilons:
            reports = service.detect_and_log(
                meter_id, from_time=args.from_time, to_time=args.to_time, epsilon=eps
            )
            for report in reports:
                if report.flagged:
                    daily[eps][report.date] += 1
    days = sorted({d for counter in daily.values() for d in counter})
    rows = [tuple([day] + [daily[eps].get(day, 0) for eps in epsilons]) for day in days]
    doc = {
        "epsilons": epsilons,
        "daily_counts": {day: {str(eps): daily[eps].get(day, 0) for eps in epsilons} for day in days},
    }
    _emit(args, doc, rows, tuple(["day"] + [f"eps={eps}" for eps in epsilons]))
    return 0


def cmd_evaluate(args) -> int:
    from .analytics.evaluation import evaluate_forecast_rmse

    service = _service(args)
    meters = _target_meters(service, args.meters)
    series_map = {}
    for meter_id in meters:
        lo, hi = service.store.series_range(meter_id)
        series_map[meter_id] = service.store.query_series(meter_id, lo, hi)
    report = evaluate_forecast_rmse(series_map, train_fraction=args.train_fraction)
    rows = [
        (m, report.mean_rmse[m], report.win_counts[m]) for m in report.methods
    ]
    _emit(args, report.to_doc(), rows, ("method", "mean_rmse", "win_count"))
    return 0


def cmd_run_workflows(args) -> int:
    from .workflow.config import load_workflows
    from .workflow.engine import WorkflowEngine, run_simulation

    service = _service(args)
    engine = WorkflowEngine(
        store=service.store,
        workdir=Path(args.data_dir),
        run_log=Path(args.data_dir) / "runs.jsonl",
    )
    workflows = load_workflows(args.config, service=service)
    if args.simulated_clock:
        start_text, _, end_text = args.simulated_clock.partition("..")
        if not end_text:
            print("error: --simulated-clock needs START..END", file=sys.stderr)
            return 2
        start = timeutil.parse_hour_timestamp(start_text) * 3600
        end = timeutil.parse_hour_timestamp(end_text) * 3600
        for wf in workflows:
            engine.register_workflow(wf, now=start)
        records = run_simulation(engine, start, end, args.step)
    else:
        import time as _time

        now = int(_time.time())
        for wf in workflows:
            engine.register_workflow(wf, now=now)
        records = [r for wf in workflows for r in [engine.run_workflow(wf.name, now)]]
    rows = [
        (r.run_id, r.workflow, r.status, len(r.worklets), r.queue_wait_seconds)
        for r in records
    ]
    _emit(
        args,
        {"runs": [r.to_doc() for r in records]},
        rows,
        ("run", "workflow", "status", "worklets", "queue_wait_s"),
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api.app import create_app

    service = _service(args)
    host, _, port = args.listen.partition(":")
    static_dir = args.static_dir
    if static_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(service, static_dir=static_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8800), log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
