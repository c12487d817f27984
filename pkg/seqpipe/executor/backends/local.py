"""
Local execution backend.

Tasks run as shell subprocesses in their workdirs. At most ``workers`` run
at once across all jobs, and at most ``requested_cores`` per job. stdout and
stderr go to ``stdout.log`` and ``stderr.log`` in the workdir.
"""

from __future__ import annotations

import asyncio
import contextlib
from dataclasses import dataclass, field
import os
from pathlib import Path
import signal
import sys
import time
import uuid

from seqpipe.const import LOCAL_BACKEND_NAME, LOGGER, STDERR_LOG_NAME, STDOUT_LOG_NAME
from seqpipe.exceptions import CapacityError
from seqpipe.executor.task import BackendHandle, BackendState, JobSubmission, Task, TaskPoll


def task_environment(extra: dict[str, str] | None = None) -> dict[str, str]:
    """
    Environment for task subprocesses.

    The running interpreter's directory is put first on ``PATH`` and the
    directory holding the ``seqpipe`` package first on ``PYTHONPATH``, so
    ``python -m seqpipe ...`` in a command resolves to this installation.
    """
    env = dict(os.environ)
    interpreter_dir = str(Path(sys.executable).parent)
    env["PATH"] = os.pathsep.join(filter(None, [interpreter_dir, env.get("PATH", "")]))
    package_root = str(Path(__file__).resolve().parents[3])
    env["PYTHONPATH"] = os.pathsep.join(filter(None, [package_root, env.get("PYTHONPATH", "")]))
    if extra:
        env.update(extra)
    return env


@dataclass
class _LocalJob:
    job: JobSubmission
    semaphore: asyncio.Semaphore
    polls: dict[str, TaskPoll]
    runners: list[asyncio.Task[None]] = field(default_factory=list)
    processes: dict[str, asyncio.subprocess.Process] = field(default_factory=dict)


class LocalBackend:
    """Runs tasks as local subprocesses."""

    name = LOCAL_BACKEND_NAME

    def __init__(self, workers: int | None = None, *, env: dict[str, str] | None = None) -> None:
        """
        Initialize the backend.

        Args:
            workers: Concurrent task slots; defaults to the CPU count.
            env: Extra environment variables for every task.
        """
        self.workers = workers or os.cpu_count() or 1
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        self._env = task_environment(env)
        self._slots = asyncio.Semaphore(self.workers)
        self._jobs: dict[str, _LocalJob] = {}

    def capacity(self) -> int:
        """Number of worker slots."""
        return self.workers

    async def async_submit(self, job: JobSubmission) -> BackendHandle:
        """Start the job's tasks in the background and return immediately."""
        if job.requested_cores > self.workers:
            raise CapacityError(
                f"job {job.job_id} requests {job.requested_cores} cores, local backend has {self.workers}",
                placeholders={"requested": job.requested_cores, "capacity": self.workers},
            )
        if job.job_id in self._jobs:
            raise ValueError(f"job {job.job_id} already submitted")

        local_job = _LocalJob(
            job=job,
            semaphore=asyncio.Semaphore(job.requested_cores),
            polls={task.task_id: TaskPoll(BackendState.QUEUED) for task in job.tasks},
        )
        self._jobs[job.job_id] = local_job
        for task in job.tasks:
            local_job.runners.append(asyncio.create_task(self._async_run_task(local_job, task)))
        LOGGER.debug("Local backend accepted %s (%d tasks)", job.job_id, len(job.tasks))
        return BackendHandle(job_id=job.job_id, backend=self.name, token=uuid.uuid4().hex, job=job)

    async def _async_run_task(self, local_job: _LocalJob, task: Task) -> None:
        async with local_job.semaphore, self._slots:
            started = time.time()
            local_job.polls[task.task_id] = TaskPoll(BackendState.RUNNING, started_at=started)
            process: asyncio.subprocess.Process | None = None
            try:
                task.workdir.mkdir(parents=True, exist_ok=True)
                with (
                    (task.workdir / STDOUT_LOG_NAME).open("wb") as stdout,
                    (task.workdir / STDERR_LOG_NAME).open("wb") as stderr,
                ):
                    process = await asyncio.create_subprocess_shell(
                        task.command,
                        cwd=task.workdir,
                        stdout=stdout,
                        stderr=stderr,
                        env=self._env,
                        start_new_session=True,
                    )
                    local_job.processes[task.task_id] = process
                    exit_code = await process.wait()
            except asyncio.CancelledError:
                if process is not None and process.returncode is None:
                    _kill_group(process)
                    with contextlib.suppress(ProcessLookupError):
                        await process.wait()
                local_job.polls[task.task_id] = TaskPoll(
                    BackendState.FAILED, started_at=started, finished_at=time.time(), detail="cancelled"
                )
                raise
            except OSError as exc:
                LOGGER.warning("Could not start %s: %s", task.task_id, exc)
                local_job.polls[task.task_id] = TaskPoll(
                    BackendState.FAILED, started_at=started, finished_at=time.time(), detail=str(exc)
                )
                return
            local_job.polls[task.task_id] = TaskPoll(
                BackendState.DONE, exit_code=exit_code, started_at=started, finished_at=time.time()
            )
            LOGGER.debug("%s exited with %d", task.task_id, exit_code)

    def _job(self, handle: BackendHandle) -> _LocalJob:
        try:
            return self._jobs[handle.job_id]
        except KeyError:
            raise ValueError(f"unknown job handle {handle}") from None

    async def async_poll(self, handle: BackendHandle) -> dict[str, TaskPoll]:
        """Snapshot of every task of the job."""
        return dict(self._job(handle).polls)

    async def async_cancel(self, handle: BackendHandle) -> None:
        """Cancel queued tasks and kill running ones."""
        local_job = self._job(handle)
        for runner in local_job.runners:
            runner.cancel()
        await asyncio.gather(*local_job.runners, return_exceptions=True)
        for task_id, poll in local_job.polls.items():
            if poll.state == BackendState.QUEUED:
                local_job.polls[task_id] = TaskPoll(BackendState.FAILED, detail="cancelled")

    async def async_close(self) -> None:
        """Cancel every job still running."""
        for job_id in list(self._jobs):
            local_job = self._jobs[job_id]
            if any(not runner.done() for runner in local_job.runners):
                await self.async_cancel(BackendHandle(job_id=job_id, backend=self.name, token=""))


def _kill_group(process: asyncio.subprocess.Process) -> None:
    with contextlib.suppress(ProcessLookupError, PermissionError):
        os.killpg(process.pid, signal.SIGKILL)
