"""
Workflow execution for seqpipe.

Stages become jobs of tasks (:func:`plan_stage_tasks`), jobs go to an
execution backend, and :class:`PipelineExecutor` polls them, infers each
task's status and chains stages with scatter/gather.
"""

from __future__ import annotations

from .backends import ExecutionBackend, LocalBackend
from .base import (
    PipelineExecutor,
    RunResult,
    StageOutcome,
    async_run_pipeline,
    async_submit_job,
    async_wait_all,
)
from .planning import plan_stage_tasks
from .status import compile_error_patterns, infer_task_status, read_task_logs
from .store import JobStore, RunLedger, read_ledger
from .task import (
    BackendHandle,
    BackendState,
    FailureKind,
    FailureReason,
    JobSubmission,
    Task,
    TaskPoll,
    TaskState,
    TaskStatus,
)

__all__ = [
    "BackendHandle",
    "BackendState",
    "ExecutionBackend",
    "FailureKind",
    "FailureReason",
    "JobStore",
    "JobSubmission",
    "LocalBackend",
    "PipelineExecutor",
    "RunLedger",
    "RunResult",
    "StageOutcome",
    "Task",
    "TaskPoll",
    "TaskState",
    "TaskStatus",
    "async_run_pipeline",
    "async_submit_job",
    "async_wait_all",
    "compile_error_patterns",
    "infer_task_status",
    "plan_stage_tasks",
    "read_ledger",
    "read_task_logs",
]
