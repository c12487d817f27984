"""
Serialized task state and the run ledger.

All task state changes go through :class:`JobStore`, which holds an
``asyncio.Lock`` so concurrent pollers see linearizable updates, and appends
one line per change to the append-only JSONL ledger.
"""

from __future__ import annotations

import asyncio
from collections.abc import Iterable
from datetime import UTC, datetime
import json
from pathlib import Path
from typing import Any

from seqpipe.const import EVENT_TASK_TRANSITION, LOGGER
from seqpipe.executor.task import (
    ALLOWED_TRANSITIONS,
    FailureKind,
    FailureReason,
    JobSubmission,
    Task,
    TaskPoll,
    TaskState,
    TaskStatus,
)


def utc_timestamp() -> str:
    """Current time as an ISO 8601 UTC string."""
    return datetime.now(UTC).isoformat()


class RunLedger:
    """Append-only JSONL event log of one run."""

    def __init__(self, path: Path) -> None:
        """Initialize the ledger; the file is created on first append."""
        self.path = path

    def append(self, event: str, **fields: Any) -> dict[str, Any]:
        """
        Append one event.

        Every line carries ``event`` and ``timestamp``; other fields are free.

        Returns:
            The written document.
        """
        document = {"event": event, "timestamp": utc_timestamp(), **fields}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(document, sort_keys=True, default=str) + "\n")
        return document


def read_ledger(path: Path | str) -> list[dict[str, Any]]:
    """
    Read every event of a ledger.

    A truncated last line (a run still writing) is ignored.
    """
    events: list[dict[str, Any]] = []
    path = Path(path)
    if not path.exists():
        return events
    with path.open(encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError:
                LOGGER.debug("Skipping unreadable ledger line %d in %s", number, path)
    return events


class JobStore:
    """Owner of every submitted job's tasks."""

    def __init__(self, ledger: RunLedger | None = None) -> None:
        """Initialize an empty store writing to ``ledger`` when given."""
        self.ledger = ledger
        self.jobs: dict[str, JobSubmission] = {}
        self.tasks: dict[str, Task] = {}
        self._lock = asyncio.Lock()

    def register_job(self, job: JobSubmission) -> None:
        """
        Start tracking a job's tasks.

        Raises:
            ValueError: The job or one of its task ids is already known.
        """
        if job.job_id in self.jobs:
            raise ValueError(f"job {job.job_id} is already registered")
        duplicates = [task.task_id for task in job.tasks if task.task_id in self.tasks]
        if duplicates:
            raise ValueError(f"task ids already registered: {', '.join(duplicates)}")
        self.jobs[job.job_id] = job
        for task in job.tasks:
            self.tasks[task.task_id] = task

    def task(self, task_id: str) -> Task:
        """Return a tracked task."""
        return self.tasks[task_id]

    def non_terminal(self, task_ids: Iterable[str]) -> list[str]:
        """Ids among ``task_ids`` whose task is not yet terminal."""
        return [task_id for task_id in task_ids if not self.tasks[task_id].state.is_terminal]

    def _transition(self, task: Task, new_state: TaskState, failure: FailureReason | None) -> None:
        previous = task.transition(new_state, failure)
        LOGGER.debug("%s: %s -> %s%s", task.task_id, previous, new_state, f" ({failure})" if failure else "")
        if self.ledger is not None:
            fields: dict[str, Any] = {
                "task_id": task.task_id,
                "stage_id": task.stage_id,
                "old_state": str(previous),
                "new_state": str(new_state),
                "reason": str(failure.kind) if failure else None,
            }
            if failure is not None and failure.detail:
                fields["detail"] = failure.detail
            if new_state.is_terminal:
                fields["exit_code"] = task.exit_code
                fields["wall_time_s"] = task.wall_time
            self.ledger.append(EVENT_TASK_TRANSITION, **fields)

    async def async_transition(
        self,
        task_id: str,
        new_state: TaskState,
        failure: FailureReason | None = None,
    ) -> None:
        """
        Apply one transition.

        Raises:
            TaskStateError: The transition is not allowed.
        """
        async with self._lock:
            self._transition(self.tasks[task_id], new_state, failure)

    async def async_apply_status(self, task_id: str, status: TaskStatus, poll: TaskPoll | None = None) -> bool:
        """
        Bring a task to ``status``, passing through intermediate states.

        A task seen Queued and then already finished is walked through
        Running first. Terminal tasks are left untouched.

        Returns:
            True when the task changed state.
        """
        async with self._lock:
            task = self.tasks[task_id]
            if task.state.is_terminal or task.state == status.state:
                return False
            if poll is not None:
                task.exit_code = poll.exit_code if poll.exit_code is not None else task.exit_code
                task.started_at = poll.started_at if poll.started_at is not None else task.started_at
                task.finished_at = poll.finished_at if poll.finished_at is not None else task.finished_at
            path = {
                TaskState.QUEUED: [TaskState.QUEUED],
                TaskState.RUNNING: [TaskState.QUEUED, TaskState.RUNNING],
                TaskState.SUCCEEDED: [TaskState.QUEUED, TaskState.RUNNING, TaskState.SUCCEEDED],
                TaskState.FAILED: [TaskState.FAILED],
            }[status.state]
            for step in path:
                if step == task.state or step not in ALLOWED_TRANSITIONS[task.state]:
                    continue
                self._transition(task, step, status.failure if step == TaskState.FAILED else None)
            return True

    async def async_mark_submitted(self, job: JobSubmission) -> None:
        """Move every Pending task of a job to Queued."""
        async with self._lock:
            for task in job.tasks:
                if task.state == TaskState.PENDING:
                    self._transition(task, TaskState.QUEUED, None)

    async def async_fail_tasks(self, task_ids: Iterable[str], kind: FailureKind, detail: str = "") -> list[str]:
        """
        Fail every non-terminal task among ``task_ids``.

        Returns:
            The ids that were failed.
        """
        failed: list[str] = []
        async with self._lock:
            for task_id in task_ids:
                task = self.tasks[task_id]
                if task.state.is_terminal:
                    continue
                self._transition(task, TaskState.FAILED, FailureReason(kind, detail))
                failed.append(task_id)
        return failed

    def statuses(self, task_ids: Iterable[str]) -> dict[str, TaskStatus]:
        """Current status of each task."""
        return {task_id: self.tasks[task_id].status for task_id in task_ids}
