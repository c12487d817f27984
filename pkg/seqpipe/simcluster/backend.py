"""
Simulated cluster as an execution backend.

Jobs are queued on a :class:`SimCluster` and their task times are virtual.
When an inner backend is given, every job is also run there for real, so the
executor finds actual outputs and logs; the simulator then only decides the
reported start and finish times.
"""

from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING
import uuid

from seqpipe.const import LOGGER, SIM_BACKEND_NAME
from seqpipe.exceptions import CapacityError
from seqpipe.executor.task import BackendHandle, BackendState, JobSubmission, TaskPoll
from seqpipe.simcluster.cluster import SimCluster, build_cluster
from seqpipe.simcluster.models import SimClusterConfig, SimEventTrace, SimJobRequest

if TYPE_CHECKING:
    from seqpipe.executor.backends.base import ExecutionBackend

_TERMINAL = (BackendState.DONE, BackendState.FAILED)


class SimClusterBackend:
    """Executor backend driven by the discrete-event simulator."""

    name = SIM_BACKEND_NAME

    def __init__(self, cluster: SimCluster | SimClusterConfig, *, inner: ExecutionBackend | None = None) -> None:
        """
        Initialize the backend.

        Args:
            cluster: A cluster, or the config to build one from.
            inner: Backend that runs the commands for real, if any.
        """
        self.cluster = cluster if isinstance(cluster, SimCluster) else build_cluster(cluster)
        self.inner = inner
        self.requests: dict[str, SimJobRequest] = {}
        self._inner_handles: dict[str, BackendHandle] = {}
        self._cancelled: set[str] = set()

    @property
    def trace(self) -> SimEventTrace:
        """Every simulator event so far."""
        return self.cluster.trace

    def capacity(self) -> int:
        """Cores of the simulated cluster."""
        return self.cluster.capacity

    async def async_submit(self, job: JobSubmission) -> BackendHandle:
        """Queue the job at the current virtual time and, if set, start it on the inner backend."""
        if job.requested_cores > self.capacity():
            raise CapacityError(
                f"job {job.job_id} requests {job.requested_cores} cores, simulated cluster has {self.capacity()}",
                placeholders={"requested": job.requested_cores, "capacity": self.capacity()},
            )
        request = SimJobRequest.from_submission(job)
        self.cluster.enqueue_job(request)
        self.requests[job.job_id] = request
        if self.inner is not None:
            inner_job = dataclasses.replace(job, requested_cores=min(job.requested_cores, self.inner.capacity()))
            self._inner_handles[job.job_id] = await self.inner.async_submit(inner_job)
        LOGGER.debug("Simulated cluster queued %s at t=%g", job.job_id, self.cluster.now)
        return BackendHandle(job_id=job.job_id, backend=self.name, token=uuid.uuid4().hex, job=job)

    async def async_poll(self, handle: BackendHandle) -> dict[str, TaskPoll]:
        """Run the simulation to quiescence and report tasks with virtual times."""
        if handle.job_id not in self.requests:
            raise ValueError(f"unknown job handle {handle}")
        self.cluster.advance()
        state = self.cluster.job(handle.job_id)
        inner_polls: dict[str, TaskPoll] = {}
        if handle.job_id in self._inner_handles and self.inner is not None:
            inner_polls = await self.inner.async_poll(self._inner_handles[handle.job_id])

        polls: dict[str, TaskPoll] = {}
        for sim_task in state.tasks:
            times = {"started_at": sim_task.started_at, "finished_at": sim_task.finished_at}
            if handle.job_id in self._cancelled:
                polls[sim_task.task_id] = TaskPoll(BackendState.FAILED, detail="cancelled", **times)
                continue
            real = inner_polls.get(sim_task.task_id)
            if real is not None:
                if real.state in _TERMINAL:
                    polls[sim_task.task_id] = TaskPoll(real.state, exit_code=real.exit_code, detail=real.detail, **times)
                else:
                    polls[sim_task.task_id] = TaskPoll(real.state)
            elif sim_task.is_finished:
                polls[sim_task.task_id] = TaskPoll(BackendState.DONE, exit_code=0, **times)
            elif sim_task.started_at is not None:
                polls[sim_task.task_id] = TaskPoll(BackendState.RUNNING, started_at=sim_task.started_at)
            else:
                polls[sim_task.task_id] = TaskPoll(BackendState.QUEUED)
        return polls

    async def async_cancel(self, handle: BackendHandle) -> None:
        """Mark the job cancelled and stop it on the inner backend."""
        self._cancelled.add(handle.job_id)
        inner_handle = self._inner_handles.get(handle.job_id)
        if inner_handle is not None and self.inner is not None:
            await self.inner.async_cancel(inner_handle)

    async def async_close(self) -> None:
        """Close the inner backend."""
        if self.inner is not None:
            await self.inner.async_close()
