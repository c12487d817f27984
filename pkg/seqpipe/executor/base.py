"""
Pipeline executor.

The executor drives an execution backend: it submits jobs, polls them at a
fixed cadence, turns what the backend reports into task statuses, and runs
whole pipelines stage by stage with scatter/gather.

Error handling strategy for backend polls:
- Temporary errors (timeouts, connection trouble): retried on the next poll
- Permanent errors (backend gone, unknown job): the job's unfinished tasks
  fail with BackendFailed
- After MAX_CONSECUTIVE_POLL_ERRORS temporary errors in a row, the error is
  treated as permanent
"""

from __future__ import annotations

import asyncio
from collections.abc import Sequence
from dataclasses import dataclass, field
import json
from pathlib import Path
import re

from seqpipe.const import (
    DEFAULT_POLL_INTERVAL_S,
    DEFAULT_TASKS_PER_CORE,
    DEFAULT_WAIT_TIMEOUT_S,
    ERROR_TYPE_PERMANENT,
    ERROR_TYPE_TEMPORARY,
    ERROR_TYPE_UNKNOWN,
    EVENT_RUN_FINISHED,
    EVENT_RUN_STARTED,
    EVENT_STAGE_FINISHED,
    EVENTS_FILE_NAME,
    INPUT_DATASET,
    INPUTS_DIR_NAME,
    LOGGER,
    MAX_CONSECUTIVE_POLL_ERRORS,
    METRICS_FILE_NAME,
    PARTITION_INPUT_STEM,
    PARTS_DIR_NAME,
    RUN_STATUS_FAILED,
    RUN_STATUS_SUCCEEDED,
    SIM_DEFAULT_USER,
)
from seqpipe.exceptions import (
    BackendUnavailableError,
    CapacityError,
    PlanningError,
    SeqPipeError,
    SpecValidationError,
    StageFailedError,
    WaitTimeoutError,
)
from seqpipe.executor.backends.base import ExecutionBackend
from seqpipe.executor.gather import gather_stage_outputs
from seqpipe.executor.planning import plan_stage_tasks, task_dir_name
from seqpipe.executor.status import compile_error_patterns, infer_task_status
from seqpipe.executor.store import JobStore, RunLedger
from seqpipe.executor.task import BackendHandle, FailureKind, FailureReason, JobSubmission, Task, TaskStatus
from seqpipe.metrics.models import RunMetrics
from seqpipe.pipeline import PipelineSpec, StageSpec, validate_spec
from seqpipe.seqdata import detect_format, read_sequence_file, split_records, write_sequence_file
from seqpipe.utils import move_into, remove_tree


@dataclass
class StageOutcome:
    """What one stage produced."""

    stage_id: str
    statuses: dict[str, TaskStatus]
    outputs: list[Path] = field(default_factory=list)
    makespan: float = 0.0
    task_times: list[float] = field(default_factory=list)
    retained_workdirs: list[Path] = field(default_factory=list)

    @property
    def failures(self) -> dict[str, FailureReason]:
        """Failed task ids and their reasons."""
        return {task_id: status.failure for task_id, status in self.statuses.items() if status.failure is not None}


@dataclass
class RunResult:
    """
    Outcome of a pipeline run.

    Attributes:
        run_id: Run identifier (the run directory's name).
        run_root: Directory holding the run's stages, ledger and metrics.
        pipeline: Pipeline name.
        core_budget: Cores each stage requested.
        status: ``succeeded`` or ``failed``.
        stage_statuses: Stage id to task id to final status, for stages that ran.
        outputs: Stage id to its output paths, for stages that succeeded.
        metrics: Task wall times and stage makespans.
        failed_stage: The stage that failed, if any.
        retained_workdirs: Workdirs of failed tasks, kept for diagnosis.
    """

    run_id: str
    run_root: Path
    pipeline: str
    core_budget: int
    status: str
    stage_statuses: dict[str, dict[str, TaskStatus]]
    outputs: dict[str, list[Path]]
    metrics: RunMetrics
    failed_stage: str | None = None
    retained_workdirs: list[Path] = field(default_factory=list)

    @property
    def succeeded(self) -> bool:
        """Return True when every stage succeeded."""
        return self.status == RUN_STATUS_SUCCEEDED


class PipelineExecutor:
    """
    Coordinator between a job store and an execution backend.

    Attributes:
        backend: Where tasks run.
        store: Serialized task state and the run ledger.
        poll_interval: Seconds between polls.
        timeout: Seconds :meth:`async_wait_all` waits before giving up.
        user: User name jobs are submitted as.
    """

    def __init__(
        self,
        backend: ExecutionBackend,
        *,
        poll_interval: float = DEFAULT_POLL_INTERVAL_S,
        timeout: float = DEFAULT_WAIT_TIMEOUT_S,
        error_patterns: Sequence[str] | None = None,
        user: str = SIM_DEFAULT_USER,
        store: JobStore | None = None,
    ) -> None:
        """Initialize the executor."""
        if poll_interval <= 0:
            raise ValueError(f"poll_interval must be > 0, got {poll_interval}")
        if timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {timeout}")
        self.backend = backend
        self.store = store or JobStore()
        self.poll_interval = poll_interval
        self.timeout = timeout
        self.user = user
        self.error_patterns: list[re.Pattern[str]] = compile_error_patterns(error_patterns)
        self.last_error: str | None = None
        self.last_error_type: str = ERROR_TYPE_UNKNOWN
        self.consecutive_errors: int = 0

    def _classify_error(self, exc: Exception) -> str:
        """
        Classify a poll error as temporary or permanent.

        Args:
            exc: The exception raised by the backend.

        Returns:
            ERROR_TYPE_TEMPORARY, ERROR_TYPE_PERMANENT, or ERROR_TYPE_UNKNOWN.
        """
        if isinstance(exc, BackendUnavailableError):
            return ERROR_TYPE_PERMANENT
        if isinstance(exc, (TimeoutError, ConnectionError)):
            return ERROR_TYPE_TEMPORARY

        error_str = str(exc).lower()

        permanent_indicators = [
            "not found",
            "unknown job",
            "unknown job handle",
            "no such",
            "permission denied",
            "unavailable",
            "shut down",
        ]
        for indicator in permanent_indicators:
            if indicator in error_str:
                return ERROR_TYPE_PERMANENT

        temporary_indicators = [
            "timeout",
            "timed out",
            "temporarily",
            "connection",
            "busy",
            "try again",
            "retry",
        ]
        for indicator in temporary_indicators:
            if indicator in error_str:
                return ERROR_TYPE_TEMPORARY

        return ERROR_TYPE_UNKNOWN

    def adopt(self, handle: BackendHandle) -> JobSubmission:
        """
        Track a job submitted elsewhere, using the job the handle carries.

        Raises:
            ValueError: The handle carries no job and the job is unknown.
        """
        if handle.job_id in self.store.jobs:
            return self.store.jobs[handle.job_id]
        if handle.job is None:
            raise ValueError(f"handle {handle} does not carry its job")
        self.store.register_job(handle.job)
        return handle.job

    async def async_submit_job(self, job: JobSubmission) -> BackendHandle:
        """
        Submit a job; its tasks move Pending -> Queued.

        Returns immediately; completion is observed with :meth:`async_wait_all`.

        Raises:
            CapacityError: The job requests more cores than the backend has.
            BackendUnavailableError: The backend refused the connection.
        """
        capacity = self.backend.capacity()
        if job.requested_cores > capacity:
            raise CapacityError(
                f"job {job.job_id} requests {job.requested_cores} cores, {self.backend.name} has {capacity}",
                placeholders={"requested": job.requested_cores, "capacity": capacity},
            )
        if job.job_id not in self.store.jobs:
            self.store.register_job(job)
        handle = await self.backend.async_submit(job)
        await self.store.async_mark_submitted(job)
        LOGGER.info(
            "Submitted %s to %s: %d task(s) on %d core(s)",
            job.job_id,
            self.backend.name,
            len(job.tasks),
            job.requested_cores,
        )
        return handle

    async def _async_poll_job(self, handle: BackendHandle, job: JobSubmission) -> None:
        polls = await self.backend.async_poll(handle)
        for task in job.tasks:
            if task.state.is_terminal or task.task_id not in polls:
                continue
            poll = polls[task.task_id]
            status = infer_task_status(task, poll.state, poll.exit_code, error_patterns=self.error_patterns)
            if status.failure is not None and status.failure.kind == FailureKind.BACKEND_FAILED and poll.detail:
                status = TaskStatus.failed(FailureKind.BACKEND_FAILED, poll.detail)
            if await self.store.async_apply_status(task.task_id, status, poll) and status.is_terminal:
                LOGGER.debug("%s finished: %s", task.task_id, status)

    async def _async_handle_poll_error(self, handle: BackendHandle, job: JobSubmission, exc: Exception) -> None:
        self.last_error = str(exc)
        self.last_error_type = self._classify_error(exc)
        self.consecutive_errors += 1

        if self.last_error_type != ERROR_TYPE_PERMANENT and self.consecutive_errors < MAX_CONSECUTIVE_POLL_ERRORS:
            LOGGER.warning(
                "Temporary error polling %s (attempt %d/%d): %s",
                handle,
                self.consecutive_errors,
                MAX_CONSECUTIVE_POLL_ERRORS,
                exc,
            )
            return

        LOGGER.error("Backend failed while polling %s: %s", handle, exc)
        await self.store.async_fail_tasks(job.task_ids, FailureKind.BACKEND_FAILED, str(exc))

    async def async_wait_all(
        self,
        handles: Sequence[BackendHandle],
        *,
        poll_interval: float | None = None,
        timeout: float | None = None,
    ) -> dict[BackendHandle, dict[str, TaskStatus]]:
        """
        Poll until every task of every handle is terminal.

        Each poll applies :func:`infer_task_status` to tasks the backend
        reports done. The first poll happens immediately.

        Returns:
            Handle to task id to final status.

        Raises:
            WaitTimeoutError: Tasks were still not terminal at the deadline;
                it names them.
        """
        poll_interval = self.poll_interval if poll_interval is None else poll_interval
        timeout = self.timeout if timeout is None else timeout
        jobs = {handle: self.adopt(handle) for handle in handles}
        loop = asyncio.get_running_loop()
        deadline = loop.time() + timeout

        while True:
            for handle, job in jobs.items():
                if not self.store.non_terminal(job.task_ids):
                    continue
                try:
                    await self._async_poll_job(handle, job)
                except SeqPipeError as exc:
                    if not isinstance(exc, BackendUnavailableError):
                        raise
                    await self._async_handle_poll_error(handle, job, exc)
                except Exception as exc:  # noqa: BLE001
                    await self._async_handle_poll_error(handle, job, exc)
                else:
                    self.consecutive_errors = 0
                    self.last_error = None
                    self.last_error_type = ERROR_TYPE_UNKNOWN

            pending = [task_id for job in jobs.values() for task_id in self.store.non_terminal(job.task_ids)]
            if not pending:
                return {handle: self.store.statuses(job.task_ids) for handle, job in jobs.items()}
            if loop.time() >= deadline:
                raise WaitTimeoutError(pending, timeout)
            await asyncio.sleep(max(0.0, min(poll_interval, deadline - loop.time())))

    async def _async_wait_or_time_out(self, handle: BackendHandle, job: JobSubmission) -> dict[str, TaskStatus]:
        try:
            return (await self.async_wait_all([handle]))[handle]
        except WaitTimeoutError as exc:
            LOGGER.error("%s", exc)
            try:
                await self.backend.async_cancel(handle)
            except Exception as cancel_exc:  # noqa: BLE001
                LOGGER.warning("Could not cancel %s: %s", handle, cancel_exc)
            await self.store.async_fail_tasks(exc.pending, FailureKind.TIMEOUT, f"not finished after {exc.timeout:g}s")
            return self.store.statuses(job.task_ids)

    def _write_partitions(self, stage: StageSpec, input_path: Path, n_parts: int, stage_dir: Path) -> list[Path]:
        fmt = stage.format or detect_format(input_path)
        suffix = input_path.suffix or f".{fmt}"
        inputs_dir = stage_dir / INPUTS_DIR_NAME
        paths: list[Path] = []
        for partition in split_records(read_sequence_file(input_path, fmt), n_parts):
            path = inputs_dir / f"{PARTITION_INPUT_STEM}_{partition.index}{suffix}"
            write_sequence_file(path, partition.records, fmt)
            paths.append(path)
        return paths

    def _collect_outputs(self, stage: StageSpec, task: Task, stage_dir: Path) -> tuple[Path, ...]:
        """Move a successful task's outputs out of its workdir, then delete the workdir."""
        destination = stage_dir / PARTS_DIR_NAME / task_dir_name(task.part) if stage.is_scatter else stage_dir
        moved: list[Path] = []
        for output in task.expected_outputs:
            if output.is_relative_to(task.workdir):
                moved.append(move_into(output, destination))
            else:
                moved.append(output)
        remove_tree(task.workdir)
        return tuple(moved)

    async def async_run_stage(
        self,
        stage: StageSpec,
        input_path: Path,
        core_budget: int,
        run_root: Path,
        *,
        tasks_per_core: int = DEFAULT_TASKS_PER_CORE,
        library_id: str = "",
    ) -> StageOutcome:
        """
        Run one stage: scatter, plan, submit, wait, collect, gather.

        Successful tasks' workdirs are deleted after their outputs are moved
        to ``<stage>/parts/part_<k>``; failed tasks' workdirs are kept. A failed
        stage gathers nothing and keeps no parts.

        Returns:
            The stage outcome; check :attr:`StageOutcome.failures`.
        """
        stage_dir = run_root / stage.id
        stage_dir.mkdir(parents=True, exist_ok=True)
        if stage.is_scatter:
            inputs = self._write_partitions(stage, input_path, core_budget * tasks_per_core, stage_dir)
        else:
            inputs = [input_path]

        job = plan_stage_tasks(stage, inputs, core_budget, run_root, tasks_per_core=tasks_per_core, user=self.user)
        handle = await self.async_submit_job(job)
        statuses = await self._async_wait_or_time_out(handle, job)
        outcome = StageOutcome(stage_id=stage.id, statuses=statuses)

        started = [task.started_at for task in job.tasks if task.started_at is not None]
        finished = [task.finished_at for task in job.tasks if task.finished_at is not None]
        outcome.makespan = max(0.0, max(finished) - min(started)) if started and finished else 0.0
        outcome.task_times = [task.wall_time for task in job.tasks if task.wall_time is not None]

        part_outputs: list[tuple[Path, ...]] = []
        for task in job.tasks:
            if task.status.failure is None:
                part_outputs.append(self._collect_outputs(stage, task, stage_dir))
            else:
                outcome.retained_workdirs.append(task.workdir)

        if outcome.failures:
            remove_tree(stage_dir / PARTS_DIR_NAME)
            LOGGER.warning(
                "Stage %s failed; kept workdir(s) for diagnosis: %s",
                stage.id,
                ", ".join(str(path) for path in outcome.retained_workdirs),
            )
            return outcome

        if stage.is_scatter:
            outcome.outputs = gather_stage_outputs(
                stage,
                part_outputs,
                stage_dir,
                input_path=input_path,
                input_format=stage.format or detect_format(input_path),
                library_id=library_id or stage.id,
            )
            remove_tree(stage_dir / PARTS_DIR_NAME)
            remove_tree(stage_dir / INPUTS_DIR_NAME)
        else:
            outcome.outputs = list(part_outputs[0])
        LOGGER.info("Stage %s finished in %.3fs (%d task(s))", stage.id, outcome.makespan, len(job.tasks))
        return outcome

    async def async_run_pipeline(
        self,
        spec: PipelineSpec,
        dataset: Path,
        core_budget: int,
        run_root: Path,
        *,
        tasks_per_core: int = DEFAULT_TASKS_PER_CORE,
    ) -> RunResult:
        """
        Run every stage in order.

        A scatter stage is split into ``core_budget * tasks_per_core``
        partitions and gathered after all parts succeed. A stage failure stops
        the run: later stages are never submitted.

        The ledger (``events.jsonl``) and ``metrics.json`` are written to
        ``run_root``.

        Returns:
            The run result.

        Raises:
            SpecValidationError: The spec breaks an invariant.
            PlanningError: Bad budget, or ``run_root`` already holds a run.
            StageFailedError: A stage had failed tasks; carries the partial result.
        """
        violations = validate_spec(spec)
        if violations:
            raise SpecValidationError(violations)
        if core_budget < 1:
            raise PlanningError(f"core budget must be >= 1, got {core_budget}", error_key="core_budget")
        if tasks_per_core < 1:
            raise PlanningError(f"tasks_per_core must be >= 1, got {tasks_per_core}", error_key="tasks_per_core")
        dataset = Path(dataset).resolve()
        if not dataset.is_file():
            raise PlanningError(f"dataset {dataset} does not exist", error_key="dataset_missing")
        run_root = Path(run_root).resolve()
        if (run_root / EVENTS_FILE_NAME).exists():
            raise PlanningError(f"{run_root} already holds a run", error_key="run_root_in_use")
        run_root.mkdir(parents=True, exist_ok=True)

        ledger = RunLedger(run_root / EVENTS_FILE_NAME)
        self.store.ledger = ledger
        run_id = run_root.name
        ledger.append(
            EVENT_RUN_STARTED,
            run_id=run_id,
            pipeline=spec.name,
            core_budget=core_budget,
            tasks_per_core=tasks_per_core,
            backend=self.backend.name,
            stages=spec.stage_ids,
            dataset=str(dataset),
        )
        LOGGER.info("Run %s started: pipeline %s on %d core(s)", run_id, spec.name, core_budget)

        outputs: dict[str, list[Path]] = {INPUT_DATASET: [dataset]}
        stage_statuses: dict[str, dict[str, TaskStatus]] = {}
        tool_times: dict[str, tuple[float, ...]] = {}
        makespans: dict[str, float] = {}

        def _result(status: str, failed_stage: str | None = None, retained: list[Path] | None = None) -> RunResult:
            metrics = RunMetrics(run_id=run_id, core_count=core_budget, tool_times=tool_times, stage_makespans=makespans)
            (run_root / METRICS_FILE_NAME).write_text(
                json.dumps(metrics.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
            ledger.append(EVENT_RUN_FINISHED, run_id=run_id, status=status, failed_stage=failed_stage)
            return RunResult(
                run_id=run_id,
                run_root=run_root,
                pipeline=spec.name,
                core_budget=core_budget,
                status=status,
                stage_statuses=stage_statuses,
                outputs={key: value for key, value in outputs.items() if key != INPUT_DATASET},
                metrics=metrics,
                failed_stage=failed_stage,
                retained_workdirs=retained or [],
            )

        for stage in spec.stages:
            try:
                outcome = await self.async_run_stage(
                    stage,
                    outputs[stage.input][0],
                    core_budget,
                    run_root,
                    tasks_per_core=tasks_per_core,
                    library_id=spec.name,
                )
            except SeqPipeError as exc:
                LOGGER.error("Stage %s aborted: %s", stage.id, exc)
                ledger.append(EVENT_STAGE_FINISHED, stage_id=stage.id, status=RUN_STATUS_FAILED, error=str(exc))
                _result(RUN_STATUS_FAILED, failed_stage=stage.id)
                raise

            stage_statuses[stage.id] = outcome.statuses
            tool_times[stage.id] = tuple(outcome.task_times)
            makespans[stage.id] = outcome.makespan
            failures = outcome.failures
            ledger.append(
                EVENT_STAGE_FINISHED,
                stage_id=stage.id,
                status=RUN_STATUS_FAILED if failures else RUN_STATUS_SUCCEEDED,
                makespan_s=outcome.makespan,
                outputs=[str(path) for path in outcome.outputs],
                failures={task_id: str(reason.kind) for task_id, reason in sorted(failures.items())},
            )
            if failures:
                result = _result(RUN_STATUS_FAILED, failed_stage=stage.id, retained=outcome.retained_workdirs)
                raise StageFailedError(stage.id, failures, result)
            outputs[stage.id] = outcome.outputs

        LOGGER.info("Run %s succeeded", run_id)
        return _result(RUN_STATUS_SUCCEEDED)


async def async_submit_job(backend: ExecutionBackend, job: JobSubmission) -> BackendHandle:
    """Submit a job to a backend; see :meth:`PipelineExecutor.async_submit_job`."""
    return await PipelineExecutor(backend).async_submit_job(job)


async def async_wait_all(
    backend: ExecutionBackend,
    handles: Sequence[BackendHandle],
    poll_interval: float = DEFAULT_POLL_INTERVAL_S,
    timeout: float = DEFAULT_WAIT_TIMEOUT_S,
    error_patterns: Sequence[str] | None = None,
) -> dict[BackendHandle, dict[str, TaskStatus]]:
    """Wait for jobs submitted with :func:`async_submit_job`; see :meth:`PipelineExecutor.async_wait_all`."""
    executor = PipelineExecutor(backend, poll_interval=poll_interval, timeout=timeout, error_patterns=error_patterns)
    return await executor.async_wait_all(handles)


async def async_run_pipeline(
    spec: PipelineSpec,
    dataset: Path,
    backend: ExecutionBackend,
    core_budget: int,
    run_root: Path,
    *,
    tasks_per_core: int = DEFAULT_TASKS_PER_CORE,
    poll_interval: float = DEFAULT_POLL_INTERVAL_S,
    timeout: float = DEFAULT_WAIT_TIMEOUT_S,
    error_patterns: Sequence[str] | None = None,
    user: str = SIM_DEFAULT_USER,
) -> RunResult:
    """Run a pipeline with a fresh executor; see :meth:`PipelineExecutor.async_run_pipeline`."""
    executor = PipelineExecutor(
        backend, poll_interval=poll_interval, timeout=timeout, error_patterns=error_patterns, user=user
    )
    return await executor.async_run_pipeline(spec, dataset, core_budget, run_root, tasks_per_core=tasks_per_core)
