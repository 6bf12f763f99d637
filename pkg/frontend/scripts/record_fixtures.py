#!/usr/bin/env python3
"""Record API responses as dashboard contract fixtures.

Builds a deterministic in-memory backend (seeded synthetic meters, fitted
models, one anomaly replay) and saves selected endpoint responses verbatim
under tests/fixtures/. Rerun after API changes:

    python3 scripts/record_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from meterflow import timeutil
from meterflow.api.app import create_app
from meterflow.api.service import AnalyticsService
from meterflow.ingest.synthetic import GeneratorSpec, SeedProfile
from meterflow.model import CustomerRecord

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

H0 = timeutil.parse_hour_timestamp("2014-04-01T00:00:00Z")
DAYS = 160


def build_service() -> AnalyticsService:
    from meterflow.ingest.synthetic import generate_series

    service = AnalyticsService()

    def shape(base, morning, evening):
        values = [base] * 24
        for h in range(6, 9):
            values[h] += morning
        for h in range(17, 22):
            values[h] += evening
        return tuple(values)

    profiles = (
        SeedProfile("home_a", shape(0.5, 0.25, 0.45), (0.3, 0.1, 0.1), (0.0, 0.15, 0.08)),
        SeedProfile("home_b", shape(0.45, 0.2, 0.3), (0.25, 0.1, 0.05), (0.0, 0.12, 0.05)),
    )
    spec = GeneratorSpec(
        n_series=4,
        span_hours=DAYS * 24,
        noise_sigma=0.05,
        rng_seed=77,
        seed_profiles=profiles,
        anomalies_per_series=1,
        anomaly_start_day=130,
        start_hour=H0,
    )
    for series, _ in generate_series(spec):
        service.store.insert_series(series)
    service.store.register_customers(
        [
            CustomerRecord(f"S0000{i}", feed_area_id="fa-0", neighborhood_id="hood-0")
            for i in range(4)
        ]
    )
    for meter in service.store.meters():
        service.fit_meter(meter, detector_train_days=120)
        service.detect_and_log(meter, from_time=H0 + 120 * 24)
    return service


def record() -> None:
    client = TestClient(create_app(build_service()))
    FIXTURES.mkdir(parents=True, exist_ok=True)
    endpoints = {
        "meters.json": "/meters",
        "consumption_daily.json": "/meters/S00000/consumption?granularity=daily&fn=sum"
        "&from=2014-07-01T00%3A00%3A00Z&to=2014-07-08T00%3A00%3A00Z",
        "compare_daily.json": "/meters/S00000/compare?granularity=daily"
        "&from=2014-07-01T00%3A00%3A00Z&to=2014-07-08T00%3A00%3A00Z",
        "compare_weekly.json": "/meters/S00000/compare?granularity=weekly",
        "profile.json": "/meters/S00000/profile",
        "forecast_parx.json": "/meters/S00000/forecast?method=parx&horizon=48",
        "segments.json": "/segments?k=2&seed=7",
        "anomalies.json": "/meters/S00000/anomalies",
        "threshold.json": "/meters/S00000/threshold",
    }
    for name, path in endpoints.items():
        response = client.get(path)
        response.raise_for_status()
        (FIXTURES / name).write_bytes(response.content)
        print(f"recorded {name} <- {path}")
    manifest = {"recorded_from": sorted(endpoints.values())}
    (FIXTURES / "MANIFEST.json").write_text(json.dumps(manifest, indent=1))


if __name__ == "__main__":
    record()
