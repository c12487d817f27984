"""Execution backend contract."""

from __future__ import annotations

from typing import Protocol, runtime_checkable

from seqpipe.executor.task import BackendHandle, JobSubmission, TaskPoll


@runtime_checkable
class ExecutionBackend(Protocol):
    """
    Something that runs jobs.

    ``async_submit`` returns as soon as the job is accepted; completion is
    observed through ``async_poll``. Implementations must tolerate concurrent
    poll calls.
    """

    name: str

    def capacity(self) -> int:
        """Total cores the backend can hand to one job."""
        ...

    async def async_submit(self, job: JobSubmission) -> BackendHandle:
        """Accept a job; raise CapacityError or BackendUnavailableError on refusal."""
        ...

    async def async_poll(self, handle: BackendHandle) -> dict[str, TaskPoll]:
        """Report every task of the job, keyed by task id."""
        ...

    async def async_cancel(self, handle: BackendHandle) -> None:
        """Stop whatever is still queued or running for the job."""
        ...

    async def async_close(self) -> None:
        """Release resources; cancels anything still running."""
        ...
