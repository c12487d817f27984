"""Rebuild run metrics from executor ledgers and simulator traces."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Callable, Mapping, Sequence
import json
from pathlib import Path
from typing import TYPE_CHECKING

from seqpipe.const import (
    EVENT_RUN_STARTED,
    EVENT_STAGE_FINISHED,
    EVENT_TASK_TRANSITION,
    EVENTS_FILE_NAME,
    METRICS_FILE_NAME,
)
from seqpipe.exceptions import MetricsError
from seqpipe.executor.store import read_ledger
from seqpipe.metrics.models import RunMetrics
from seqpipe.simcluster.models import SimEventKind
from seqpipe.simcluster.trace import job_makespan, task_durations

if TYPE_CHECKING:
    from seqpipe.simcluster.models import SimEventTrace, SimJobRequest


def metrics_from_ledger(path: Path | str) -> RunMetrics:
    """
    Rebuild a run's metrics from its ``events.jsonl``.

    Task times are the wall times of terminal task transitions, grouped by
    stage; makespans come from ``stage_finished`` events (0 for a stage that
    aborted before running).

    Raises:
        MetricsError: The ledger has no ``run_started`` event.
    """
    events = read_ledger(path)
    started = next((event for event in events if event.get("event") == EVENT_RUN_STARTED), None)
    if started is None:
        raise MetricsError(f"{path} holds no run", error_key="metrics_no_run")

    tool_times: dict[str, list[float]] = defaultdict(list)
    makespans: dict[str, float] = {}
    for event in events:
        kind = event.get("event")
        if kind == EVENT_TASK_TRANSITION and event.get("wall_time_s") is not None:
            tool_times[event["stage_id"]].append(float(event["wall_time_s"]))
        elif kind == EVENT_STAGE_FINISHED:
            makespans[event["stage_id"]] = float(event.get("makespan_s") or 0.0)
    return RunMetrics(
        run_id=str(started["run_id"]),
        core_count=int(started["core_budget"]),
        tool_times={stage: tuple(times) for stage, times in tool_times.items()},
        stage_makespans=makespans,
    )


def load_run_metrics(source: Path | str) -> RunMetrics:
    """
    Load metrics from a run root, a ``metrics.json`` or an ``events.jsonl``.

    A run root's ``metrics.json`` is preferred; its ledger is the fallback.
    """
    path = Path(source)
    if path.is_dir():
        if (path / METRICS_FILE_NAME).is_file():
            path = path / METRICS_FILE_NAME
        elif (path / EVENTS_FILE_NAME).is_file():
            path = path / EVENTS_FILE_NAME
        else:
            raise MetricsError(f"{path} holds neither {METRICS_FILE_NAME} nor {EVENTS_FILE_NAME}")
    if path.suffix == ".jsonl":
        return metrics_from_ledger(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MetricsError(f"cannot read {path}: {exc}", error_key="metrics_malformed") from exc
    return RunMetrics.from_dict(document)


def metrics_from_trace(
    trace: SimEventTrace,
    jobs: Mapping[str, SimJobRequest],
    label_of_job: Callable[[str], str] | None = None,
) -> list[RunMetrics]:
    """
    One RunMetrics per finished simulated job.

    The job's label (its id when unlabelled, or ``label_of_job(job_id)``)
    names both the tool and the stage; ``core_count`` is the requested cores
    and the stage makespan is the job's execution time.
    """
    durations: dict[str, list[float]] = defaultdict(list)
    for (job_id, _), (_, duration) in task_durations(trace).items():
        durations[job_id].append(duration)

    finished = {event.job_id for event in trace.of_kind(SimEventKind.JOB_FINISHED)}
    runs = []
    for job_id in trace.job_ids:
        if job_id not in finished:
            continue
        request = jobs[job_id]
        label = label_of_job(job_id) if label_of_job else (request.label or job_id)
        runs.append(
            RunMetrics(
                run_id=job_id,
                core_count=request.requested_cores,
                tool_times={label: tuple(durations[job_id])},
                stage_makespans={label: job_makespan(trace, job_id).exec},
            )
        )
    return runs


def group_by_tool(runs: Sequence[RunMetrics]) -> dict[str, list[RunMetrics]]:
    """Group single-tool runs (as built from traces) by their tool."""
    groups: dict[str, list[RunMetrics]] = defaultdict(list)
    for run in runs:
        for tool in run.tool_times:
            groups[tool].append(run)
    return dict(groups)


def combine_runs(run_id: str, runs: Sequence[RunMetrics]) -> RunMetrics:
    """
    Fold several runs into one: task times pooled per tool, makespans kept per run.

    Raises:
        MetricsError: ``runs`` is empty.
    """
    if not runs:
        raise MetricsError("cannot combine zero runs", error_key="metrics_no_runs")
    tool_times: dict[str, list[float]] = defaultdict(list)
    for run in runs:
        for tool, times in run.tool_times.items():
            tool_times[tool].extend(times)
    return RunMetrics(
        run_id=run_id,
        core_count=max(run.core_count for run in runs),
        tool_times={tool: tuple(times) for tool, times in tool_times.items()},
        stage_makespans={run.run_id: run.makespan for run in runs},
    )
