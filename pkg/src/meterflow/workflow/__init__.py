"""Workflow composition, scheduling, and stream processing."""

from .engine import (
    JobQueue,
    RunContext,
    RunRecord,
    Schedule,
    SimulatedClock,
    WorkflowEngine,
    Worklet,
    WorkletKind,
    WorkletResult,
    Workflow,
)
from .streaming import StreamProcessor, WindowSpec, stream_process

__all__ = [
    "JobQueue",
    "RunContext",
    "RunRecord",
    "Schedule",
    "SimulatedClock",
    "WorkflowEngine",
    "Worklet",
    "WorkletKind",
    "WorkletResult",
    "Workflow",
    "StreamProcessor",
    "WindowSpec",
    "stream_process",
]
