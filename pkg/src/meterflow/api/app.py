"""HTTP endpoints over the analytics service.

Responses are rendered with the deterministic JSON encoder (stable field
order, 17-significant-digit floats), so identical store state produces
byte-identical bodies. Errors are {code, message}. A static role header
(X-Role: customer|utility, with X-Meter-Id naming the caller's meter)
gates cross-customer access.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.staticfiles import StaticFiles

from .. import jsonio
from ..errors import (
    DependencyError,
    DuplicateError,
    InsufficientDataError,
    MeterFlowError,
    NotFoundError,
    PrivacyError,
    ValidationError,
)
from .service import AnalyticsService

_STATUS = (
    (NotFoundError, 404),
    (PrivacyError, 403),
    (DependencyError, 409),
    (DuplicateError, 409),
    (InsufficientDataError, 409),
    (ValidationError, 400),
)


def _status_for(exc: MeterFlowError) -> int:
    for klass, status in _STATUS:
        if isinstance(exc, klass):
            return status
    return 400


def _json(payload, status_code: int = 200) -> Response:
    return Response(
        content=jsonio.dumps(payload),
        status_code=status_code,
        media_type="application/json",
    )


def _error(status: int, message: str) -> Response:
    return _json({"code": status, "message": message}, status_code=status)


class RoleGuard:
    """customer sessions may only touch their own meter; utility sees all."""

    def check_meter(self, request: Request, meter_id: str) -> None:
        role = request.headers.get("X-Role", "utility").lower()
        if role == "utility":
            return
        if role != "customer":
            raise ValidationError(f"unknown role {role!r}")
        own = request.headers.get("X-Meter-Id")
        if own != meter_id:
            raise PrivacyError("customers may only access their own meter")

    def require_utility(self, request: Request) -> None:
        role = request.headers.get("X-Role", "utility").lower()
        if role != "utility":
            raise PrivacyError("utility role required")


def create_app(service: AnalyticsService, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="meterflow", docs_url=None, redoc_url=None)
    guard = RoleGuard()

    @app.exception_handler(MeterFlowError)
    async def _handle_domain_error(request: Request, exc: MeterFlowError):
        return _error(_status_for(exc), str(exc))

    @app.get("/health")
    def health():
        return _json({"status": "ok", "meters": len(service.store.meters())})

    @app.get("/meters")
    def meters(request: Request):
        guard.require_utility(request)
        return _json({"meters": service.store.meters()})

    @app.get("/meters/{meter_id}/consumption")
    def consumption(
        meter_id: str,
        request: Request,
        granularity: str = "daily",
        fn: str = "sum",
    ):
        guard.check_meter(request, meter_id)
        params = request.query_params
        return _json(
            service.consumption(
                meter_id,
                granularity=granularity,
                fn=fn,
                from_time=params.get("from"),
                to_time=params.get("to"),
            )
        )

    @app.get("/meters/{meter_id}/compare")
    def compare(meter_id: str, request: Request, granularity: str = "daily"):
        guard.check_meter(request, meter_id)
        params = request.query_params
        return _json(
            service.compare(
                meter_id,
                granularity=granularity,
                from_time=params.get("from"),
                to_time=params.get("to"),
            )
        )

    @app.get("/meters/{meter_id}/profile")
    def profile(meter_id: str, request: Request):
        guard.check_meter(request, meter_id)
        return _json(service.profile(meter_id))

    @app.get("/meters/{meter_id}/forecast")
    def forecast(
        meter_id: str,
        request: Request,
        method: str = "parx",
        granularity: str = "hourly",
        horizon: int = 24,
    ):
        guard.check_meter(request, meter_id)
        if horizon < 1:
            raise ValidationError("horizon must be >= 1")
        return _json(
            service.forecast(meter_id, method=method, granularity=granularity, horizon=horizon)
        )

    @app.get("/segments")
    def segments(request: Request, k: int = 2, features: str | None = None, seed: int = 0):
        guard.require_utility(request)
        names = [f.strip() for f in features.split(",")] if features else None
        return _json(service.segments(k=k, feature_names=names, seed=seed))

    @app.get("/meters/{meter_id}/anomalies")
    def anomalies(meter_id: str, request: Request, flagged_only: bool = False):
        guard.check_meter(request, meter_id)
        params = request.query_params
        return _json(
            service.anomalies(
                meter_id,
                from_time=params.get("from"),
                to_time=params.get("to"),
                flagged_only=flagged_only,
            )
        )

    @app.get("/meters/{meter_id}/threshold")
    def get_threshold(meter_id: str, request: Request):
        guard.check_meter(request, meter_id)
        return _json(service.threshold(meter_id))

    @app.post("/meters/{meter_id}/threshold")
    async def set_threshold(meter_id: str, request: Request):
        guard.check_meter(request, meter_id)
        body = await _body(request)
        if "epsilon" not in body:
            raise ValidationError("body must contain epsilon")
        epsilon = body["epsilon"]
        if not isinstance(epsilon, (int, float)) or not 0.0 < float(epsilon) < 1.0:
            raise ValidationError("epsilon must be a number in (0, 1)")
        now = datetime.now(timezone.utc)
        return _json(service.set_threshold(meter_id, float(epsilon), now))

    @app.get("/feedback-rules")
    def list_rules(request: Request):
        guard.require_utility(request)
        return _json({"rules": service.feedback.rules()})

    @app.post("/feedback-rules")
    async def add_rule(request: Request):
        guard.require_utility(request)
        body = await _body(request)
        rule = service.feedback.add_rule(body)
        return _json(rule, status_code=201)

    @app.post("/feedback-rules/evaluate")
    async def evaluate_rules(request: Request):
        guard.require_utility(request)
        body = await _body(request)
        now_text = body.get("now")
        now = (
            datetime.now(timezone.utc)
            if now_text is None
            else datetime.strptime(now_text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
        )
        return _json({"messages": service.feedback.evaluate(now)})

    @app.get("/outbox")
    def outbox(request: Request):
        guard.require_utility(request)
        return _json({"messages": list(service.outbox.messages)})

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="dashboard")

    return app


async def _body(request: Request) -> dict:
    try:
        body = jsonio.loads(await request.body())
    except Exception:
        raise ValidationError("request body must be JSON")
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    return body
