"""Tests for the task state machine and status inference."""

from __future__ import annotations

import itertools
from pathlib import Path

import pytest

from seqpipe.exceptions import TaskStateError
from seqpipe.executor.status import compile_error_patterns, infer_task_status, read_task_logs
from seqpipe.executor.task import (
    BackendState,
    FailureKind,
    FailureReason,
    JobSubmission,
    Task,
    TaskState,
    TaskStatus,
)

pytestmark = pytest.mark.unit


def _task(tmp_path: Path, **overrides) -> Task:
    fields = {
        "task_id": "stage/part_0",
        "stage_id": "stage",
        "part": 0,
        "command": "true",
        "workdir": tmp_path,
        "expected_outputs": (tmp_path / "out.txt",),
    }
    fields.update(overrides)
    return Task(**fields)


@pytest.mark.parametrize(
    ("path", "final"),
    [
        ([TaskState.QUEUED, TaskState.RUNNING, TaskState.SUCCEEDED], TaskState.SUCCEEDED),
        ([TaskState.QUEUED, TaskState.RUNNING, TaskState.FAILED], TaskState.FAILED),
        ([TaskState.QUEUED, TaskState.FAILED], TaskState.FAILED),
        ([TaskState.FAILED], TaskState.FAILED),
    ],
)
def test_allowed_paths(tmp_path: Path, path: list[TaskState], final: TaskState) -> None:
    task = _task(tmp_path)
    for state in path:
        reason = FailureReason(FailureKind.TIMEOUT) if state == TaskState.FAILED else None
        task.transition(state, reason)
    assert task.state == final


@pytest.mark.parametrize(
    ("path", "bad"),
    [
        ([], TaskState.RUNNING),
        ([], TaskState.SUCCEEDED),
        ([TaskState.QUEUED], TaskState.SUCCEEDED),
        ([TaskState.QUEUED, TaskState.RUNNING, TaskState.SUCCEEDED], TaskState.FAILED),
        ([TaskState.QUEUED, TaskState.RUNNING], TaskState.QUEUED),
    ],
)
def test_forbidden_transitions(tmp_path: Path, path: list[TaskState], bad: TaskState) -> None:
    task = _task(tmp_path)
    for state in path:
        task.transition(state)
    reason = FailureReason(FailureKind.TIMEOUT) if bad == TaskState.FAILED else None
    with pytest.raises(TaskStateError):
        task.transition(bad, reason)


def test_failed_requires_reason(tmp_path: Path) -> None:
    task = _task(tmp_path)
    with pytest.raises(TaskStateError):
        task.transition(TaskState.FAILED)
    with pytest.raises(TaskStateError):
        task.transition(TaskState.QUEUED, FailureReason(FailureKind.TIMEOUT))


def test_task_and_job_preconditions(tmp_path: Path) -> None:
    with pytest.raises(ValueError):
        _task(tmp_path, expected_outputs=())
    with pytest.raises(ValueError):
        JobSubmission(job_id="j", user="u", requested_cores=0, tasks=[_task(tmp_path)], submit_seq=1)
    with pytest.raises(ValueError):
        JobSubmission(job_id="j", user="u", requested_cores=1, tasks=[], submit_seq=1)


def test_status_rendering() -> None:
    assert str(TaskStatus.failed(FailureKind.MISSING_OUTPUT, "x")) == "Failed(MissingOutput)"
    assert str(TaskStatus.succeeded()) == "Succeeded"
    assert str(FailureReason(FailureKind.NONZERO_EXIT, "exit code 2")) == "NonzeroExit: exit code 2"


def _expected(backend_failed: bool, nonzero: bool, missing: bool, log_error: bool) -> FailureKind | None:
    if backend_failed:
        return FailureKind.BACKEND_FAILED
    if nonzero:
        return FailureKind.NONZERO_EXIT
    if missing:
        return FailureKind.MISSING_OUTPUT
    if log_error:
        return FailureKind.LOG_ERROR
    return None


@pytest.mark.parametrize(
    ("backend_failed", "nonzero", "missing", "log_error"),
    list(itertools.product([False, True], repeat=4)),
)
def test_failure_inference_matrix(
    tmp_path: Path, backend_failed: bool, nonzero: bool, missing: bool, log_error: bool
) -> None:
    task = _task(tmp_path)
    log_lines = ["starting\n", "ERROR: disk full\n" if log_error else "done\n"]

    status = infer_task_status(
        task,
        BackendState.FAILED if backend_failed else BackendState.DONE,
        2 if nonzero else 0,
        fs_view=lambda _path: not missing,
        log_view=lambda _task: log_lines,
    )

    expected = _expected(backend_failed, nonzero, missing, log_error)
    if expected is None:
        assert status == TaskStatus.succeeded()
    else:
        assert status.state == TaskState.FAILED
        assert status.failure is not None
        assert status.failure.kind == expected


@pytest.mark.parametrize(("backend_state", "state"), [(BackendState.QUEUED, "Queued"), (BackendState.RUNNING, "Running")])
def test_non_terminal_states_pass_through(tmp_path: Path, backend_state: BackendState, state: str) -> None:
    status = infer_task_status(_task(tmp_path), backend_state, None, fs_view=lambda _path: False)
    assert status.state == state
    assert status.failure is None


def test_unknown_exit_code_is_not_a_failure(tmp_path: Path) -> None:
    status = infer_task_status(_task(tmp_path), BackendState.DONE, None, fs_view=lambda _path: True, log_view=lambda _t: [])
    assert status == TaskStatus.succeeded()


def test_custom_error_patterns(tmp_path: Path) -> None:
    status = infer_task_status(
        _task(tmp_path),
        BackendState.DONE,
        0,
        fs_view=lambda _path: True,
        log_view=lambda _task: ["WARNING: low memory\n", "ERROR is just a word here\n"],
        error_patterns=[r"^WARNING"],
    )
    assert status.failure == FailureReason(FailureKind.LOG_ERROR, "WARNING: low memory")


def test_invalid_error_pattern() -> None:
    with pytest.raises(ValueError):
        compile_error_patterns(["(unclosed"])


def test_read_task_logs_scans_captured_output_and_globs(tmp_path: Path) -> None:
    (tmp_path / "stdout.log").write_text("out line\n", encoding="utf-8")
    (tmp_path / "stderr.log").write_text("err line\n", encoding="utf-8")
    (tmp_path / "tool.log").write_text("FATAL: boom\n", encoding="utf-8")
    task = _task(tmp_path, log_paths=(str(tmp_path / "*.log"),))

    lines = list(read_task_logs(task))

    assert lines == ["out line\n", "err line\n", "FATAL: boom\n"]
