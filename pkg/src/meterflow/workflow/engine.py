"""Worklet chains and the two scheduling disciplines.

A workflow is an ordered chain of worklets run sequentially; a failed
worklet aborts the remainder of the run. Deterministic schedules start runs
exactly on their anchor-aligned progression; queued schedules only enqueue
at the scheduled time, and a single execution slot drains the queue in FIFO
order (so queued runs usually start later than scheduled — the wait is
recorded, not bounded).

Time is injected: ticks carry the current timestamp, so everything is
reproducible under a simulated clock.
"""

from __future__ import annotations

import enum
import itertools
import threading
import time as _time
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable

from .. import jsonio, timeutil
from ..errors import ConfigError, DuplicateError, NotFoundError, ValidationError

_INTERVAL_SECONDS = {
    "minutely": 60,
    "hourly": 3600,
    "daily": 86400,
    "weekly": 7 * 86400,
}
INTERVALS = ("minutely", "hourly", "daily", "weekly", "monthly")


def _to_seconds(ts: datetime | int) -> int:
    if isinstance(ts, int):
        return ts
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return int(ts.timestamp())


def _fmt(seconds: int) -> str:
    return datetime.fromtimestamp(seconds, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class WorkletKind(enum.Enum):
    INGEST = "ingest"
    TRANSFORM = "transform"
    ANONYMIZE = "anonymize"
    ANALYTICS = "analytics"
    HOUSEKEEPING = "housekeeping"
    NOTIFY = "notify"


@dataclass(frozen=True)
class Worklet:
    """One restartable processing unit: payload in, payload out.

    fn(ctx, payload) must be safe to re-run on the same input (no-op or
    identical output).
    """

    name: str
    kind: WorkletKind
    fn: Callable[["RunContext", Any], Any]
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Schedule:
    kind: str  # "deterministic" | "queued"
    interval: str
    anchor: datetime | int = 0
    cluster_class: str = "default"

    def __post_init__(self) -> None:
        if self.kind not in ("deterministic", "queued"):
            raise ConfigError(f"schedule kind must be deterministic or queued, got {self.kind!r}")
        if self.interval not in INTERVALS:
            raise ConfigError(f"interval must be one of {INTERVALS}, got {self.interval!r}")

    def first_at_or_after(self, now: int) -> int:
        anchor = _to_seconds(self.anchor)
        if self.interval == "monthly":
            t = anchor
            while t < now:
                t = _add_month_sec(t, 1)
            return t
        period = _INTERVAL_SECONDS[self.interval]
        if now <= anchor:
            return anchor
        k = -((anchor - now) // period)  # ceil((now - anchor) / period)
        return anchor + k * period

    def first_after(self, now: int) -> int:
        t = self.first_at_or_after(now)
        if t > now:
            return t
        if self.interval == "monthly":
            return _add_month_sec(t, 1)
        return t + _INTERVAL_SECONDS[self.interval]


def _add_month_sec(t: int, months: int) -> int:
    dt = datetime.fromtimestamp(t, tz=timezone.utc)
    sub_hour = dt.minute * 60 + dt.second
    hour = timeutil.add_months(t // 3600, months)
    return hour * 3600 + sub_hour


@dataclass
class Workflow:
    name: str
    worklets: tuple[Worklet, ...]
    schedule: Schedule | None = None
    enabled: bool = True
    retries: int = 0
    sim_duration_seconds: int = 0  # how long a queued run occupies the slot


@dataclass
class RunContext:
    now: datetime
    store: Any = None
    workdir: Path | None = None
    params: dict = field(default_factory=dict)


@dataclass
class WorkletResult:
    name: str
    status: str  # ok | failed | skipped
    error: str | None = None
    elapsed_seconds: float = 0.0


@dataclass
class RunRecord:
    run_id: int
    workflow: str
    scheduled: int  # epoch seconds
    started: int
    status: str  # ok | failed
    worklets: list[WorkletResult] = field(default_factory=list)
    queue_wait_seconds: int = 0
    attempts: int = 1
    output: Any = None

    def to_doc(self) -> dict:
        return {
            "run_id": self.run_id,
            "workflow": self.workflow,
            "scheduled": _fmt(self.scheduled),
            "started": _fmt(self.started),
            "status": self.status,
            "queue_wait_seconds": self.queue_wait_seconds,
            "attempts": self.attempts,
            "worklets": [
                {"name": w.name, "status": w.status, "error": w.error} for w in self.worklets
            ],
        }


@dataclass
class JobQueue:
    """FIFO queue with a single execution slot."""

    pending: deque = field(default_factory=deque)
    running: Any = None  # (workflow name, release time, record)

    def __len__(self) -> int:
        return len(self.pending)


class SimulatedClock:
    def __init__(self, start: datetime | int):
        self._now = _to_seconds(start)

    def now_seconds(self) -> int:
        return self._now

    def advance(self, seconds: int) -> int:
        self._now += seconds
        return self._now


class WallClock:
    def now_seconds(self) -> int:
        return int(_time.time())


class WorkflowEngine:
    """Registry plus scheduler for workflows.

    tick(now) drives everything: deterministic workflows due by now start
    exactly once and their next-run advances along the anchor progression
    (missed periods collapse into one catch-up run); queued workflows are
    enqueued and at most one occupies the execution slot.
    """

    def __init__(
        self,
        store: Any = None,
        workdir: str | Path | None = None,
        run_log: str | Path | None = None,
    ):
        self.store = store
        self.workdir = Path(workdir) if workdir else None
        self.run_log = Path(run_log) if run_log else None
        self._workflows: dict[str, Workflow] = {}
        self._next_run: dict[str, int] = {}
        self.queue = JobQueue()
        self.records: list[RunRecord] = []
        self.queue_waits: list[int] = []
        self._last_tick: int | None = None
        self._run_ids = itertools.count(1)
        self._lock = threading.RLock()

    # ------------------------------------------------------------------

    def register_workflow(self, workflow: Workflow, now: datetime | int = 0) -> str:
        with self._lock:
            if workflow.name in self._workflows:
                raise DuplicateError(f"workflow {workflow.name!r} already registered")
            if not workflow.worklets:
                raise ValidationError(f"workflow {workflow.name!r} has no worklets")
            self._workflows[workflow.name] = workflow
            if workflow.schedule is not None:
                self._next_run[workflow.name] = workflow.schedule.first_at_or_after(
                    _to_seconds(now)
                )
            return workflow.name

    def workflow(self, name: str) -> Workflow:
        try:
            return self._workflows[name]
        except KeyError:
            raise NotFoundError(f"workflow {name!r} is not registered")

    def next_run_time(self, name: str) -> int:
        self.workflow(name)
        return self._next_run[name]

    # ------------------------------------------------------------------

    def tick(self, now: datetime | int) -> list[RunRecord]:
        """Advance the scheduler to `now`; returns the runs started."""
        now_sec = _to_seconds(now)
        with self._lock:
            if self._last_tick is not None and now_sec < self._last_tick:
                raise ValidationError(
                    f"tick time went backwards: {_fmt(now_sec)} < {_fmt(self._last_tick)}"
                )
            self._last_tick = now_sec

            if self.queue.running is not None:
                _, release, _ = self.queue.running
                if now_sec >= release:
                    self.queue.running = None

            started: list[RunRecord] = []
            for name in sorted(self._workflows):
                wf = self._workflows[name]
                if wf.schedule is None or not wf.enabled:
                    continue
                due = self._next_run.get(name)
                if due is None or due > now_sec:
                    continue
                self._next_run[name] = wf.schedule.first_after(now_sec)
                if wf.schedule.kind == "deterministic":
                    started.append(self._execute(wf, scheduled=due, started=now_sec))
                else:
                    self.queue.pending.append((name, due))

            if self.queue.running is None and self.queue.pending:
                name, scheduled = self.queue.pending.popleft()
                wf = self._workflows[name]
                record = self._execute(
                    wf, scheduled=scheduled, started=now_sec, queue_wait=now_sec - scheduled
                )
                release = now_sec + wf.sim_duration_seconds
                self.queue.running = (name, release, record)
                self.queue_waits.append(now_sec - scheduled)
                started.append(record)
            return started

    def run_workflow(self, name: str, now: datetime | int) -> RunRecord:
        """Run a registered workflow immediately (outside its schedule)."""
        wf = self.workflow(name)
        now_sec = _to_seconds(now)
        return self._execute(wf, scheduled=now_sec, started=now_sec)

    # ------------------------------------------------------------------

    def _execute(
        self, wf: Workflow, scheduled: int, started: int, queue_wait: int = 0
    ) -> RunRecord:
        record = RunRecord(
            run_id=next(self._run_ids),
            workflow=wf.name,
            scheduled=scheduled,
            started=started,
            status="failed",
            queue_wait_seconds=queue_wait,
        )
        ctx = RunContext(
            now=datetime.fromtimestamp(started, tz=timezone.utc),
            store=self.store,
            workdir=self.workdir,
        )
        for attempt in range(1 + max(wf.retries, 0)):
            record.attempts = attempt + 1
            record.worklets = []
            payload: Any = None
            failed = False
            for worklet in wf.worklets:
                if failed:
                    record.worklets.append(WorkletResult(worklet.name, "skipped"))
                    continue
                t0 = _time.perf_counter()
                try:
                    ctx.params = worklet.params
                    payload = worklet.fn(ctx, payload)
                    record.worklets.append(
                        WorkletResult(worklet.name, "ok", elapsed_seconds=_time.perf_counter() - t0)
                    )
                except Exception as exc:
                    record.worklets.append(
                        WorkletResult(
                            worklet.name,
                            "failed",
                            error=f"{type(exc).__name__}: {exc}",
                            elapsed_seconds=_time.perf_counter() - t0,
                        )
                    )
                    failed = True
            if not failed:
                record.status = "ok"
                record.output = payload
                break
        self.records.append(record)
        self._append_log(record)
        return record

    def _append_log(self, record: RunRecord) -> None:
        if self.run_log is None:
            return
        self.run_log.parent.mkdir(parents=True, exist_ok=True)
        with open(self.run_log, "a") as fh:
            fh.write(jsonio.dumps(record.to_doc()) + "\n")


def run_simulation(
    engine: WorkflowEngine,
    start: datetime | int,
    end: datetime | int,
    step_seconds: int,
) -> list[RunRecord]:
    """Tick the engine over [start, end] on a fixed cadence."""
    t = _to_seconds(start)
    stop = _to_seconds(end)
    all_started: list[RunRecord] = []
    while t <= stop:
        all_started.extend(engine.tick(t))
        t += step_seconds
    return all_started
