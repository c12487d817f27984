"""
Tasks, jobs and their state machine.

    Pending -> Queued -> Running -> Succeeded
       |         |         |
       +---------+---------+-----> Failed(reason)

A task may fail before it runs (backend loss, timeout while queued), so
``Failed`` is reachable from every non-terminal state. ``Succeeded`` is only
reachable from ``Running``. Terminal states never change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path

from seqpipe.exceptions import TaskStateError


class TaskState(StrEnum):
    """Lifecycle state of a task."""

    PENDING = "Pending"
    QUEUED = "Queued"
    RUNNING = "Running"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"

    @property
    def is_terminal(self) -> bool:
        """Return True for Succeeded and Failed."""
        return self in TERMINAL_STATES


TERMINAL_STATES = frozenset({TaskState.SUCCEEDED, TaskState.FAILED})

ALLOWED_TRANSITIONS: dict[TaskState, frozenset[TaskState]] = {
    TaskState.PENDING: frozenset({TaskState.QUEUED, TaskState.FAILED}),
    TaskState.QUEUED: frozenset({TaskState.RUNNING, TaskState.FAILED}),
    TaskState.RUNNING: frozenset({TaskState.SUCCEEDED, TaskState.FAILED}),
    TaskState.SUCCEEDED: frozenset(),
    TaskState.FAILED: frozenset(),
}


class BackendState(StrEnum):
    """What a backend reports about one task."""

    QUEUED = "Queued"
    RUNNING = "Running"
    DONE = "Done"
    FAILED = "Failed"


class FailureKind(StrEnum):
    """Why a task failed, in the order the checks are applied."""

    BACKEND_FAILED = "BackendFailed"
    NONZERO_EXIT = "NonzeroExit"
    MISSING_OUTPUT = "MissingOutput"
    LOG_ERROR = "LogError"
    TIMEOUT = "Timeout"


@dataclass(frozen=True, slots=True)
class FailureReason:
    """A failure kind with a human-readable detail."""

    kind: FailureKind
    detail: str = ""

    def __str__(self) -> str:
        """Render as ``Kind: detail``."""
        return f"{self.kind}: {self.detail}" if self.detail else str(self.kind)


@dataclass(frozen=True, slots=True)
class TaskStatus:
    """Outcome of status inference: a state plus the failure reason, if failed."""

    state: TaskState
    failure: FailureReason | None = None

    @classmethod
    def succeeded(cls) -> TaskStatus:
        """Build a Succeeded status."""
        return cls(TaskState.SUCCEEDED)

    @classmethod
    def failed(cls, kind: FailureKind, detail: str = "") -> TaskStatus:
        """Build a Failed status."""
        return cls(TaskState.FAILED, FailureReason(kind, detail))

    @property
    def is_terminal(self) -> bool:
        """Return True once the task can no longer change."""
        return self.state.is_terminal

    def __str__(self) -> str:
        """Render as ``Failed(Kind)`` or the bare state."""
        if self.failure is not None:
            return f"{self.state}({self.failure.kind})"
        return str(self.state)


@dataclass(slots=True)
class Task:
    """
    One command invocation.

    Only :class:`~seqpipe.executor.store.JobStore` changes ``state``; other
    code reads it.
    """

    task_id: str
    stage_id: str
    part: int | None
    command: str
    workdir: Path
    expected_outputs: tuple[Path, ...]
    log_paths: tuple[str, ...] = ()
    state: TaskState = TaskState.PENDING
    failure: FailureReason | None = None
    exit_code: int | None = None
    started_at: float | None = None
    finished_at: float | None = None

    def __post_init__(self) -> None:
        """Reject tasks without outputs."""
        if not self.expected_outputs:
            raise ValueError(f"task {self.task_id} has no expected outputs")

    @property
    def status(self) -> TaskStatus:
        """Current state as a :class:`TaskStatus`."""
        return TaskStatus(self.state, self.failure)

    @property
    def wall_time(self) -> float | None:
        """Seconds between start and finish, in the backend's clock."""
        if self.started_at is None or self.finished_at is None:
            return None
        return max(0.0, self.finished_at - self.started_at)

    def transition(self, new_state: TaskState, failure: FailureReason | None = None) -> TaskState:
        """
        Move to ``new_state``.

        Returns:
            The previous state.

        Raises:
            TaskStateError: The transition is not on the state diagram, or a
                failure reason is missing/unexpected.
        """
        if new_state not in ALLOWED_TRANSITIONS[self.state]:
            raise TaskStateError(
                f"task {self.task_id}: {self.state} -> {new_state} is not allowed",
                placeholders={"task": self.task_id, "old": str(self.state), "new": str(new_state)},
            )
        if (new_state == TaskState.FAILED) != (failure is not None):
            raise TaskStateError(f"task {self.task_id}: Failed needs a reason and only Failed takes one")
        previous = self.state
        self.state = new_state
        self.failure = failure
        return previous


@dataclass(frozen=True, slots=True)
class BackendHandle:
    """Binds a submitted job to the backend that runs it."""

    job_id: str
    backend: str
    token: str
    job: JobSubmission | None = field(default=None, compare=False, hash=False, repr=False)

    def __str__(self) -> str:
        """Render as ``backend:job_id``."""
        return f"{self.backend}:{self.job_id}"


@dataclass(frozen=True, slots=True)
class TaskPoll:
    """One backend observation of a task; times are in the backend's clock."""

    state: BackendState
    exit_code: int | None = None
    started_at: float | None = None
    finished_at: float | None = None
    detail: str = ""


@dataclass(slots=True)
class JobSubmission:
    """
    A batch of tasks submitted together with one core request.

    Attributes:
        job_id: Unique job identifier.
        user: Submitting user; the simulator's queue policy reads it.
        requested_cores: Cores the job holds for its whole lifetime.
        tasks: The tasks, in part order.
        submit_seq: Monotone submission counter.
        stage_id: Stage the job runs.
        base_time_s: Synthetic per-task service time for simulated backends.
    """

    job_id: str
    user: str
    requested_cores: int
    tasks: list[Task]
    submit_seq: int
    stage_id: str = ""
    base_time_s: float = 0.0
    task_index: dict[str, Task] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Check the core request and task list."""
        if self.requested_cores < 1:
            raise ValueError(f"job {self.job_id}: requested_cores must be >= 1")
        if not self.tasks:
            raise ValueError(f"job {self.job_id} has no tasks")
        self.task_index = {task.task_id: task for task in self.tasks}

    @property
    def task_ids(self) -> list[str]:
        """Task ids in part order."""
        return [task.task_id for task in self.tasks]
