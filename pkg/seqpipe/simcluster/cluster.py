"""
Discrete-event batch cluster.

Queue policy: whenever cores free up, the queued job with the smallest key

    (running jobs of its user, requested cores, submission order)

is started if all of its cores are free at once (gang allocation); if it does
not fit, nothing else starts (no backfill). Cores are taken from nodes in
natural id order, lowest core index first, and stay with the job until its
last task ends. Inside a job, tasks go to cores in allocation order and a core
that finishes a task takes the job's next unstarted one.

Events sharing a timestamp are processed task completions first, then
arrivals; the dispatcher runs once all events of that instant are in. The
trace lists the events of one instant in kind order: task finishes, job
finishes, arrivals, job starts, task starts.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field
import heapq
import itertools
from typing import TYPE_CHECKING

import numpy as np

from seqpipe.const import LOGGER
from seqpipe.exceptions import CapacityError, ScenarioError
from seqpipe.simcluster.models import (
    SimClusterConfig,
    SimEvent,
    SimEventKind,
    SimEventTrace,
    SimJobRequest,
    natural_key,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from seqpipe.executor.task import JobSubmission


@dataclass(slots=True)
class SimTaskState:
    """Where and when a simulated task ran."""

    task_id: str
    index: int
    base_time: float
    started_at: float | None = None
    finished_at: float | None = None
    node_id: str | None = None
    core: int | None = None

    @property
    def is_finished(self) -> bool:
        """Return True once the task completed."""
        return self.finished_at is not None


@dataclass(slots=True)
class SimJobState:
    """Progress of one simulated job."""

    request: SimJobRequest
    submit_seq: int
    arrival: float
    tasks: list[SimTaskState]
    queued_at: float | None = None
    started_at: float | None = None
    finished_at: float | None = None
    allocation: list[tuple[str, int]] = field(default_factory=list)
    next_task: int = 0
    remaining: int = 0

    @property
    def is_finished(self) -> bool:
        """Return True once every task completed."""
        return self.finished_at is not None


class SimCluster:
    """A simulated cluster with its own virtual clock."""

    def __init__(self, config: SimClusterConfig) -> None:
        """Start at time 0 with every core idle."""
        self.config = config
        self.now = 0.0
        self._rng = np.random.default_rng(config.seed)
        self._nodes = sorted(config.nodes, key=lambda node: natural_key(node.node_id))
        self._free: dict[str, list[int]] = {node.node_id: list(range(node.cores)) for node in self._nodes}
        self._slowdown = {node.node_id: node.slowdown for node in self._nodes}
        self._queue: list[SimJobState] = []
        self._jobs: dict[str, SimJobState] = {}
        self._running_by_user: Counter[str] = Counter()
        self._heap: list[tuple[float, int, int, int, int, str]] = []
        self._counter = itertools.count()
        self._submit_seq = itertools.count(1)
        self._trace: list[SimEvent] = []

    @property
    def capacity(self) -> int:
        """Total cores."""
        return self.config.capacity

    @property
    def trace(self) -> SimEventTrace:
        """Every event so far."""
        return SimEventTrace(tuple(self._trace))

    @property
    def is_quiescent(self) -> bool:
        """Return True when no event is pending."""
        return not self._heap

    @property
    def free_cores(self) -> int:
        """Idle cores right now."""
        return sum(len(cores) for cores in self._free.values())

    def job(self, job_id: str) -> SimJobState:
        """Return a job's state."""
        return self._jobs[job_id]

    def _node_capacity(self, node_ids: Sequence[str] | None) -> int:
        if node_ids is None:
            return self.capacity
        return sum(self.config.node(node_id).cores for node_id in node_ids)

    def enqueue_job(self, request: SimJobRequest, at: float | None = None) -> str:
        """
        Queue a job arriving at virtual time ``at`` (default: now).

        Returns:
            The job id, which serves as the handle.

        Raises:
            CapacityError: The job wants more cores than the cluster (or its
                pinned nodes) has.
            ScenarioError: A pinned node does not exist.
            ValueError: Duplicate job id or arrival in the past.
        """
        at = self.now if at is None else at
        if at < self.now:
            raise ValueError(f"job {request.job_id} arrives at {at}, clock is already at {self.now}")
        if request.job_id in self._jobs:
            raise ValueError(f"job {request.job_id} already enqueued")
        if request.pinned_nodes is not None:
            unknown = [node_id for node_id in request.pinned_nodes if node_id not in self._free]
            if unknown:
                raise ScenarioError(f"job {request.job_id} is pinned to unknown node(s) {', '.join(unknown)}")
        capacity = self._node_capacity(request.pinned_nodes)
        if request.requested_cores > capacity:
            raise CapacityError(
                f"job {request.job_id} requests {request.requested_cores} cores, capacity is {capacity}",
                placeholders={"requested": request.requested_cores, "capacity": capacity},
            )

        seq = next(self._submit_seq)
        state = SimJobState(
            request=request,
            submit_seq=seq,
            arrival=at,
            tasks=[
                SimTaskState(task_id=task_id, index=index, base_time=base)
                for index, (task_id, base) in enumerate(zip(request.task_ids, request.base_times, strict=True))
            ],
            remaining=len(request.task_ids),
        )
        self._jobs[request.job_id] = state
        self._push(at, SimEventKind.JOB_QUEUED, seq, 0, request.job_id)
        return request.job_id

    def _push(self, time: float, kind: SimEventKind, seq: int, index: int, job_id: str) -> None:
        heapq.heappush(self._heap, (time, int(kind), seq, index, next(self._counter), job_id))

    def _record(self, kind: SimEventKind, job_id: str, task: SimTaskState | None = None) -> None:
        self._trace.append(
            SimEvent(
                time=self.now,
                kind=kind,
                job_id=job_id,
                task_id=task.task_id if task else None,
                node_id=task.node_id if task else None,
                core=task.core if task else None,
            )
        )

    def advance(self, until: float | None = None) -> SimEventTrace:
        """
        Process events up to ``until`` (inclusive), or until nothing is pending.

        Returns:
            The events produced by this call.
        """
        start = len(self._trace)
        while self._heap:
            instant = self._heap[0][0]
            if until is not None and instant > until:
                break
            self.now = instant
            mark = len(self._trace)
            while self._heap and self._heap[0][0] == instant:
                _, kind, _, index, _, job_id = heapq.heappop(self._heap)
                if kind == SimEventKind.TASK_FINISHED:
                    self._finish_task(self._jobs[job_id], index)
                else:
                    self._arrive(self._jobs[job_id])
            self._dispatch()
            # Stable sort keeps processing order among events of one kind
            self._trace[mark:] = sorted(self._trace[mark:], key=lambda event: event.kind)
        if until is not None and until > self.now:
            self.now = until
        return SimEventTrace(tuple(self._trace[start:]))

    def _arrive(self, job: SimJobState) -> None:
        job.queued_at = self.now
        self._queue.append(job)
        self._record(SimEventKind.JOB_QUEUED, job.request.job_id)

    def _priority_key(self, job: SimJobState) -> tuple[int, int, int]:
        return (self._running_by_user[job.request.user], job.request.requested_cores, job.submit_seq)

    def _allocate(self, job: SimJobState) -> list[tuple[str, int]] | None:
        pinned = job.request.pinned_nodes
        nodes = [node.node_id for node in self._nodes if pinned is None or node.node_id in pinned]
        if sum(len(self._free[node_id]) for node_id in nodes) < job.request.requested_cores:
            return None
        allocation: list[tuple[str, int]] = []
        for node_id in nodes:
            free = self._free[node_id]
            while free and len(allocation) < job.request.requested_cores:
                allocation.append((node_id, free.pop(0)))
        return allocation

    def _dispatch(self) -> None:
        while self._queue:
            head = min(self._queue, key=self._priority_key)
            allocation = self._allocate(head)
            if allocation is None:
                return
            self._queue.remove(head)
            self._start_job(head, allocation)

    def _start_job(self, job: SimJobState, allocation: list[tuple[str, int]]) -> None:
        job.started_at = self.now
        job.allocation = allocation
        self._running_by_user[job.request.user] += 1
        self._record(SimEventKind.JOB_STARTED, job.request.job_id)
        LOGGER.debug("t=%g: job %s started on %d core(s)", self.now, job.request.job_id, len(allocation))
        for node_id, core in allocation[: len(job.tasks)]:
            self._start_task(job, node_id, core)

    def _service_time(self, base: float, node_id: str) -> float:
        jitter = self.config.service_time_jitter
        draw = float(self._rng.uniform(0.0, jitter)) if jitter > 0 else 0.0
        return base * self._slowdown[node_id] * (1.0 + draw)

    def _start_task(self, job: SimJobState, node_id: str, core: int) -> None:
        task = job.tasks[job.next_task]
        job.next_task += 1
        task.started_at = self.now
        task.node_id = node_id
        task.core = core
        self._record(SimEventKind.TASK_STARTED, job.request.job_id, task)
        self._push(
            self.now + self._service_time(task.base_time, node_id),
            SimEventKind.TASK_FINISHED,
            job.submit_seq,
            task.index,
            job.request.job_id,
        )

    def _finish_task(self, job: SimJobState, index: int) -> None:
        task = job.tasks[index]
        task.finished_at = self.now
        job.remaining -= 1
        self._record(SimEventKind.TASK_FINISHED, job.request.job_id, task)
        if job.next_task < len(job.tasks):
            assert task.node_id is not None and task.core is not None
            self._start_task(job, task.node_id, task.core)
        elif job.remaining == 0:
            self._finish_job(job)

    def _finish_job(self, job: SimJobState) -> None:
        job.finished_at = self.now
        self._running_by_user[job.request.user] -= 1
        for node_id, core in job.allocation:
            bisect.insort(self._free[node_id], core)
        self._record(SimEventKind.JOB_FINISHED, job.request.job_id)
        LOGGER.debug("t=%g: job %s finished", self.now, job.request.job_id)


def build_cluster(config: SimClusterConfig) -> SimCluster:
    """Create a cluster at virtual time 0 with all cores idle."""
    return SimCluster(config)


def enqueue_job(
    cluster: SimCluster,
    job: SimJobRequest | JobSubmission,
    base_task_times: Sequence[float] | None = None,
    at: float | None = None,
) -> str:
    """
    Queue a job; executor submissions are converted with :meth:`SimJobRequest.from_submission`.

    Returns:
        The job id.
    """
    request = job if isinstance(job, SimJobRequest) else SimJobRequest.from_submission(job, base_task_times)
    return cluster.enqueue_job(request, at)


def advance(cluster: SimCluster, until: float | None = None) -> SimEventTrace:
    """Run the cluster to ``until`` or, when None, until quiescent."""
    return cluster.advance(until)
