"""Turn a stage and its inputs into a job of fully expanded tasks."""

from __future__ import annotations

from collections.abc import Sequence
import itertools
from pathlib import Path

from seqpipe.const import (
    DEFAULT_TASKS_PER_CORE,
    LOGGER,
    PART_DIR_PREFIX,
    PLACEHOLDER_INPUT,
    PLACEHOLDER_OUTPUT,
    PLACEHOLDER_PART,
    PLACEHOLDER_WORKDIR,
    SIM_DEFAULT_USER,
    SINGLE_TASK_DIR_NAME,
)
from seqpipe.exceptions import PlanningError
from seqpipe.executor.task import JobSubmission, Task
from seqpipe.pipeline.model import StageSpec
from seqpipe.utils import expand_template, find_placeholders

_SUBMIT_SEQ = itertools.count(1)


def next_submit_seq() -> int:
    """Return the next value of the process-wide submission counter."""
    return next(_SUBMIT_SEQ)


def task_dir_name(part: int | None) -> str:
    """Workdir name for a part (``part_<k>``) or a single task."""
    return SINGLE_TASK_DIR_NAME if part is None else f"{PART_DIR_PREFIX}{part}"


def _expand(template: str, values: dict[str, object], stage_id: str, what: str) -> str:
    expanded = expand_template(template, values)
    if leftover := find_placeholders(expanded):
        raise PlanningError(
            f"stage {stage_id}: {what} has no value for {', '.join('{' + name + '}' for name in leftover)}",
            error_key="placeholder_unexpanded",
            placeholders={"stage": stage_id, "placeholders": leftover},
        )
    return expanded


def _resolve(path_text: str, workdir: Path) -> Path:
    path = Path(path_text)
    return path if path.is_absolute() else workdir / path


def plan_stage_tasks(
    stage: StageSpec,
    inputs: Sequence[Path],
    core_budget: int,
    run_root: Path,
    *,
    tasks_per_core: int = DEFAULT_TASKS_PER_CORE,
    user: str = SIM_DEFAULT_USER,
    submit_seq: int | None = None,
) -> JobSubmission:
    """
    Plan one job for a stage.

    A scatter stage gets one task per input partition; a single stage gets one
    task for its one input. Each task receives a fresh workdir
    ``run_root/<stage>/part_<k>`` (``single`` for single stages), created here.
    Relative output and log paths are resolved against the workdir.

    Args:
        stage: The stage to plan.
        inputs: Partition files (scatter) or the one input file (single).
        core_budget: Cores the job requests.
        run_root: Directory of this run.
        tasks_per_core: Partitions per core for scatter stages.
        user: Submitting user.
        submit_seq: Submission counter; drawn from the process counter when omitted.

    Returns:
        The job, all tasks Pending.

    Raises:
        PlanningError: Input count does not match the budget, the budget is
            below the stage's minimum, a placeholder is left unexpanded, or a
            workdir already exists.
    """
    if core_budget < 1:
        raise PlanningError(f"core budget must be >= 1, got {core_budget}", error_key="core_budget")
    if core_budget < stage.resources.cores:
        raise PlanningError(
            f"stage {stage.id} needs {stage.resources.cores} cores, budget is {core_budget}",
            error_key="core_budget",
        )

    if stage.is_scatter:
        expected = core_budget * tasks_per_core
        if len(inputs) != expected:
            raise PlanningError(
                f"stage {stage.id}: {len(inputs)} partitions for {core_budget} cores x {tasks_per_core}",
                error_key="partition_count",
            )
        parts: list[int | None] = list(range(len(inputs)))
    else:
        if len(inputs) != 1:
            raise PlanningError(f"stage {stage.id}: single stage takes one input, got {len(inputs)}")
        parts = [None]

    stage_dir = run_root / stage.id
    planned: list[tuple[int | None, Path, Path]] = []
    for part, input_path in zip(parts, inputs, strict=True):
        planned.append((part, Path(input_path).resolve(), (stage_dir / task_dir_name(part)).resolve()))

    tasks: list[Task] = []
    for part, input_path, workdir in planned:
        values: dict[str, object] = {
            PLACEHOLDER_INPUT: input_path,
            PLACEHOLDER_PART: part,
            PLACEHOLDER_WORKDIR: workdir,
        }
        outputs = tuple(
            _resolve(_expand(template, values, stage.id, f"output {template!r}"), workdir)
            for template in stage.expected_outputs
        )
        values[PLACEHOLDER_OUTPUT] = outputs[0]
        command = _expand(stage.command_template, values, stage.id, "command")
        log_paths: tuple[str, ...] = ()
        if stage.log_glob:
            log_paths = (str(_resolve(_expand(stage.log_glob, values, stage.id, "logs"), workdir)),)
        tasks.append(
            Task(
                task_id=f"{stage.id}/{task_dir_name(part)}",
                stage_id=stage.id,
                part=part,
                command=command,
                workdir=workdir,
                expected_outputs=outputs,
                log_paths=log_paths,
            )
        )

    # Workdirs are created only after every template expanded cleanly
    for task in tasks:
        try:
            task.workdir.mkdir(parents=True, exist_ok=False)
        except FileExistsError:
            raise PlanningError(
                f"workdir {task.workdir} already exists",
                error_key="workdir_collision",
                placeholders={"workdir": str(task.workdir)},
            ) from None

    seq = next_submit_seq() if submit_seq is None else submit_seq
    job = JobSubmission(
        job_id=f"{stage.id}-{seq:04d}",
        user=user,
        requested_cores=core_budget,
        tasks=tasks,
        submit_seq=seq,
        stage_id=stage.id,
        base_time_s=stage.resources.base_time_s,
    )
    LOGGER.debug("Planned %s: %d task(s), %d core(s)", job.job_id, len(tasks), core_budget)
    return job
