"""
Diagnostics for a run directory.

Everything is read back from the run's event ledger, so a run can be
inspected while a detached process is still writing it.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Any

from seqpipe.const import (
    EVENT_RUN_FINISHED,
    EVENT_RUN_STARTED,
    EVENT_STAGE_FINISHED,
    EVENT_TASK_TRANSITION,
    EVENTS_FILE_NAME,
    RUN_STATUS_RUNNING,
)
from seqpipe.exceptions import SeqPipeError
from seqpipe.executor.store import read_ledger

# Ledger fields dropped from the diagnostics document
TO_REDACT = {"event", "timestamp"}


def run_diagnostics(run_root: Path | str) -> dict[str, Any]:
    """
    Summarize a run from its ledger.

    Returns:
        ``run`` (the start event), ``status`` (``running`` until the run
        finishes), per-state task counts, failed tasks with their reasons,
        finished stages and the timestamp of the last event.

    Raises:
        SeqPipeError: ``run_root`` holds no run.
    """
    run_root = Path(run_root)
    events = read_ledger(run_root / EVENTS_FILE_NAME)
    started = next((event for event in events if event.get("event") == EVENT_RUN_STARTED), None)
    if started is None:
        raise SeqPipeError(f"{run_root} holds no run", error_key="run_not_found", placeholders={"path": str(run_root)})

    task_states: dict[str, str] = {}
    failures: dict[str, dict[str, Any]] = {}
    stages: list[dict[str, Any]] = []
    finished: dict[str, Any] | None = None
    for event in events:
        kind = event.get("event")
        if kind == EVENT_TASK_TRANSITION:
            task_states[event["task_id"]] = event["new_state"]
            if event.get("reason"):
                failures[event["task_id"]] = {
                    "stage_id": event.get("stage_id"),
                    "reason": event["reason"],
                    "detail": event.get("detail", ""),
                    "exit_code": event.get("exit_code"),
                }
        elif kind == EVENT_STAGE_FINISHED:
            stages.append({key: value for key, value in event.items() if key not in TO_REDACT})
        elif kind == EVENT_RUN_FINISHED:
            finished = event

    return {
        "run": {key: value for key, value in started.items() if key not in TO_REDACT},
        "started_at": started.get("timestamp"),
        "status": finished["status"] if finished else RUN_STATUS_RUNNING,
        "failed_stage": finished.get("failed_stage") if finished else None,
        "tasks": {
            "total": len(task_states),
            "by_state": dict(sorted(Counter(task_states.values()).items())),
        },
        "failures": dict(sorted(failures.items())),
        "stages": stages,
        "last_event_at": events[-1].get("timestamp"),
    }


def render_diagnostics_text(diagnostics: dict[str, Any]) -> str:
    """Short human-readable status."""
    run = diagnostics["run"]
    lines = [
        f"run:      {run.get('run_id')} ({run.get('pipeline')}, {run.get('core_budget')} cores, {run.get('backend')})",
        f"status:   {diagnostics['status']}"
        + (f" (stage {diagnostics['failed_stage']})" if diagnostics.get("failed_stage") else ""),
        f"tasks:    {diagnostics['tasks']['total']} "
        + " ".join(f"{state}={count}" for state, count in diagnostics["tasks"]["by_state"].items()),
        f"stages:   {', '.join(stage['stage_id'] for stage in diagnostics['stages']) or '-'}",
    ]
    for task_id, failure in diagnostics["failures"].items():
        detail = f": {failure['detail']}" if failure.get("detail") else ""
        lines.append(f"failed:   {task_id} {failure['reason']}{detail}")
    return "\n".join(lines) + "\n"
