"""Simulator data types."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from enum import IntEnum
import json
import re
from typing import TYPE_CHECKING, Any

from seqpipe.const import SIM_DEFAULT_JITTER, SIM_DEFAULT_SEED, SIM_DEFAULT_USER
from seqpipe.exceptions import ScenarioError

if TYPE_CHECKING:
    from seqpipe.executor.task import JobSubmission

_DIGITS = re.compile(r"(\d+)")


def natural_key(identifier: str) -> tuple[Any, ...]:
    """Sort key that orders ``n2`` before ``n10``."""
    return tuple(int(chunk) if chunk.isdigit() else chunk for chunk in _DIGITS.split(identifier))


@dataclass(frozen=True, slots=True)
class SimNode:
    """A compute node; ``slowdown`` multiplies every task's service time on it."""

    node_id: str
    cores: int
    slowdown: float = 1.0

    def __post_init__(self) -> None:
        """Check cores and slowdown."""
        if self.cores < 1:
            raise ScenarioError(f"node {self.node_id}: cores must be >= 1, got {self.cores}")
        if self.slowdown < 1.0:
            raise ScenarioError(f"node {self.node_id}: slowdown must be >= 1.0, got {self.slowdown}")


@dataclass(frozen=True, slots=True)
class SimClusterConfig:
    """
    Cluster layout and randomness.

    Attributes:
        nodes: Compute nodes; allocation visits them in natural id order.
        seed: Seed for service-time jitter.
        service_time_jitter: Each task's time is scaled by ``1 + u`` with
            ``u`` drawn uniformly from ``[0, jitter)``; 0 disables jitter.
    """

    nodes: tuple[SimNode, ...]
    seed: int = SIM_DEFAULT_SEED
    service_time_jitter: float = SIM_DEFAULT_JITTER

    def __post_init__(self) -> None:
        """Check the node list and jitter."""
        if not self.nodes:
            raise ScenarioError("a cluster needs at least one node", error_key="scenario_no_nodes")
        ids = [node.node_id for node in self.nodes]
        if len(set(ids)) != len(ids):
            raise ScenarioError("node ids must be unique", error_key="scenario_duplicate_node")
        if self.service_time_jitter < 0:
            raise ScenarioError(f"jitter must be >= 0, got {self.service_time_jitter}")

    @property
    def capacity(self) -> int:
        """Total cores."""
        return sum(node.cores for node in self.nodes)

    def node(self, node_id: str) -> SimNode:
        """Return a node by id."""
        for node in self.nodes:
            if node.node_id == node_id:
                return node
        raise KeyError(node_id)


@dataclass(frozen=True, slots=True)
class SimJobRequest:
    """
    A job as the simulator sees it.

    Attributes:
        job_id: Unique job id.
        user: Submitting user; drives the queue priority.
        requested_cores: Cores allocated together for the job's lifetime.
        task_ids: Task ids in start order.
        base_times: Unscaled service time per task, in seconds.
        pinned_nodes: If set, the job may only get cores on these nodes.
        label: Free-form tag used to group jobs in reports.
    """

    job_id: str
    user: str
    requested_cores: int
    task_ids: tuple[str, ...]
    base_times: tuple[float, ...]
    pinned_nodes: tuple[str, ...] | None = None
    label: str = ""

    def __post_init__(self) -> None:
        """Check cores, tasks and times."""
        if self.requested_cores < 1:
            raise ValueError(f"job {self.job_id}: requested_cores must be >= 1")
        if not self.task_ids:
            raise ValueError(f"job {self.job_id} has no tasks")
        if len(self.task_ids) != len(self.base_times):
            raise ValueError(f"job {self.job_id}: one base time per task required")
        if any(value < 0 for value in self.base_times):
            raise ValueError(f"job {self.job_id}: base times must be >= 0")

    @classmethod
    def from_submission(
        cls,
        job: JobSubmission,
        base_task_times: Sequence[float] | None = None,
        *,
        pinned_nodes: Sequence[str] | None = None,
    ) -> SimJobRequest:
        """Build a request from an executor job; base times default to the job's stage time."""
        times = tuple(base_task_times) if base_task_times is not None else (job.base_time_s,) * len(job.tasks)
        return cls(
            job_id=job.job_id,
            user=job.user or SIM_DEFAULT_USER,
            requested_cores=job.requested_cores,
            task_ids=tuple(job.task_ids),
            base_times=times,
            pinned_nodes=tuple(pinned_nodes) if pinned_nodes else None,
            label=job.stage_id,
        )


class SimEventKind(IntEnum):
    """Trace event kinds; the value orders events that share a timestamp."""

    TASK_FINISHED = 0
    JOB_FINISHED = 1
    JOB_QUEUED = 2
    JOB_STARTED = 3
    TASK_STARTED = 4

    @property
    def label(self) -> str:
        """CamelCase name used in trace files."""
        return "".join(part.capitalize() for part in self.name.split("_"))


@dataclass(frozen=True, slots=True)
class SimEvent:
    """One trace event."""

    time: float
    kind: SimEventKind
    job_id: str
    task_id: str | None = None
    node_id: str | None = None
    core: int | None = None

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation; absent fields are omitted."""
        document: dict[str, Any] = {"time": self.time, "kind": self.kind.label, "job_id": self.job_id}
        if self.task_id is not None:
            document["task_id"] = self.task_id
        if self.node_id is not None:
            document["node_id"] = self.node_id
            document["core"] = self.core
        return document


@dataclass(frozen=True, slots=True)
class SimEventTrace:
    """Ordered events; times never decrease."""

    events: tuple[SimEvent, ...] = ()

    def __iter__(self) -> Iterator[SimEvent]:
        """Iterate over events in order."""
        return iter(self.events)

    def __len__(self) -> int:
        """Number of events."""
        return len(self.events)

    def for_job(self, job_id: str) -> list[SimEvent]:
        """Events of one job."""
        return [event for event in self.events if event.job_id == job_id]

    def of_kind(self, kind: SimEventKind) -> list[SimEvent]:
        """Events of one kind."""
        return [event for event in self.events if event.kind == kind]

    @property
    def job_ids(self) -> list[str]:
        """Job ids in order of first appearance."""
        return list(dict.fromkeys(event.job_id for event in self.events))

    def to_jsonl(self) -> str:
        """One JSON document per line, keys sorted."""
        return "".join(json.dumps(event.to_dict(), sort_keys=True) + "\n" for event in self.events)


@dataclass(frozen=True, slots=True)
class JobTiming:
    """Queue and execution times of one finished job."""

    job_id: str
    queued_at: float
    started_at: float
    finished_at: float

    @property
    def exec(self) -> float:
        """Seconds from job start to its last task finishing."""
        return self.finished_at - self.started_at

    @property
    def wait(self) -> float:
        """Seconds spent queued."""
        return self.started_at - self.queued_at

    @property
    def turnaround(self) -> float:
        """Seconds from enqueue to finish."""
        return self.exec + self.wait


@dataclass(frozen=True, slots=True)
class NodeTaskTimes:
    """Straggler view of one node: how many tasks ran there and their median time."""

    node_id: str
    slowdown: float
    n_tasks: int
    median_task_time: float | None
