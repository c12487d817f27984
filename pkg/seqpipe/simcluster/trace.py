"""Queries and file output over simulator traces."""

from __future__ import annotations

from collections import defaultdict
import csv
from pathlib import Path
from typing import TYPE_CHECKING, TextIO

import numpy as np

from seqpipe.exceptions import SimulationError
from seqpipe.simcluster.models import JobTiming, NodeTaskTimes, SimEventKind, natural_key

if TYPE_CHECKING:
    from collections.abc import Mapping

    from seqpipe.simcluster.models import SimClusterConfig, SimEventTrace, SimJobRequest

SUMMARY_COLUMNS = ("job", "user", "cores", "tasks", "queued", "started", "finished", "wait", "exec", "turnaround")


def job_makespan(trace: SimEventTrace, job_id: str) -> JobTiming:
    """
    Queue and execution times of a job.

    Raises:
        SimulationError: The job did not finish within the trace.
    """
    times: dict[SimEventKind, float] = {}
    for event in trace.for_job(job_id):
        if event.kind in (SimEventKind.JOB_QUEUED, SimEventKind.JOB_STARTED, SimEventKind.JOB_FINISHED):
            times[event.kind] = event.time
    if SimEventKind.JOB_FINISHED not in times:
        raise SimulationError(
            f"job {job_id} did not finish within the trace",
            error_key="simulation_job_unfinished",
            placeholders={"job": job_id},
        )
    return JobTiming(
        job_id=job_id,
        queued_at=times[SimEventKind.JOB_QUEUED],
        started_at=times[SimEventKind.JOB_STARTED],
        finished_at=times[SimEventKind.JOB_FINISHED],
    )


def task_durations(trace: SimEventTrace) -> dict[tuple[str, str], tuple[str, float]]:
    """Map (job id, task id) to the node it ran on and its service time, for finished tasks."""
    started: dict[tuple[str, str], float] = {}
    durations: dict[tuple[str, str], tuple[str, float]] = {}
    for event in trace:
        if event.task_id is None:
            continue
        key = (event.job_id, event.task_id)
        if event.kind == SimEventKind.TASK_STARTED:
            started[key] = event.time
        elif event.kind == SimEventKind.TASK_FINISHED and event.node_id is not None:
            durations[key] = (event.node_id, event.time - started[key])
    return durations


def straggler_summary(trace: SimEventTrace, config: SimClusterConfig) -> list[NodeTaskTimes]:
    """Per node, in natural id order: tasks run there and their median service time."""
    by_node: dict[str, list[float]] = defaultdict(list)
    for node_id, duration in task_durations(trace).values():
        by_node[node_id].append(duration)
    summary = []
    for node in sorted(config.nodes, key=lambda n: natural_key(n.node_id)):
        times = by_node.get(node.node_id, [])
        summary.append(
            NodeTaskTimes(
                node_id=node.node_id,
                slowdown=node.slowdown,
                n_tasks=len(times),
                median_task_time=float(np.median(times)) if times else None,
            )
        )
    return summary


def write_trace_jsonl(trace: SimEventTrace, path: Path | str) -> Path:
    """Write the trace as JSON lines."""
    path = Path(path)
    path.write_text(trace.to_jsonl(), encoding="utf-8")
    return path


def write_summary_tsv(trace: SimEventTrace, jobs: Mapping[str, SimJobRequest], stream: TextIO) -> None:
    """Write one row per finished job, in order of first appearance in the trace."""
    writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    finished = {event.job_id for event in trace.of_kind(SimEventKind.JOB_FINISHED)}
    for job_id in trace.job_ids:
        if job_id not in finished:
            continue
        timing = job_makespan(trace, job_id)
        request = jobs[job_id]
        writer.writerow(
            (
                job_id,
                request.user,
                request.requested_cores,
                len(request.task_ids),
                f"{timing.queued_at:g}",
                f"{timing.started_at:g}",
                f"{timing.finished_at:g}",
                f"{timing.wait:g}",
                f"{timing.exec:g}",
                f"{timing.turnaround:g}",
            )
        )
