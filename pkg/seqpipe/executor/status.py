"""
Task status inference.

A task the backend reports as done is only successful once its exit code,
its expected outputs and its logs all agree. Checks run in a fixed order and
the first one that fails names the reason:

1. backend reported failure       -> BackendFailed
2. non-zero exit code            -> NonzeroExit
3. an expected output is missing -> MissingOutput
4. a log line matches a pattern  -> LogError
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Sequence
import glob
from pathlib import Path
import re

from seqpipe.const import DEFAULT_ERROR_PATTERNS, LOGGER, STDERR_LOG_NAME, STDOUT_LOG_NAME
from seqpipe.executor.task import BackendState, FailureKind, Task, TaskState, TaskStatus

FsView = Callable[[Path], bool]
LogView = Callable[[Task], Iterable[str]]


def compile_error_patterns(patterns: Sequence[str | re.Pattern[str]] | None = None) -> list[re.Pattern[str]]:
    """
    Compile error patterns, falling back to the defaults when none are given.

    Raises:
        ValueError: A pattern is not a valid regular expression.
    """
    chosen = list(patterns) if patterns else list(DEFAULT_ERROR_PATTERNS)
    compiled: list[re.Pattern[str]] = []
    for pattern in chosen:
        try:
            compiled.append(re.compile(pattern))
        except re.error as exc:
            raise ValueError(f"invalid error pattern {pattern!r}: {exc}") from exc
    return compiled


def task_log_files(task: Task) -> list[Path]:
    """Captured stdout/stderr plus files matching the task's log globs, deduplicated."""
    files = [task.workdir / STDOUT_LOG_NAME, task.workdir / STDERR_LOG_NAME]
    for pattern in task.log_paths:
        files.extend(Path(match) for match in sorted(glob.glob(pattern)))
    seen: set[Path] = set()
    unique: list[Path] = []
    for path in files:
        if path not in seen and path.is_file():
            seen.add(path)
            unique.append(path)
    return unique


def read_task_logs(task: Task) -> Iterator[str]:
    """Yield every line of the task's log files."""
    for path in task_log_files(task):
        try:
            with path.open(encoding="utf-8", errors="replace") as handle:
                yield from handle
        except OSError as exc:
            LOGGER.debug("Cannot read log %s for %s: %s", path, task.task_id, exc)


def _path_exists(path: Path) -> bool:
    return path.exists()


def infer_task_status(
    task: Task,
    backend_state: BackendState,
    exit_code: int | None,
    *,
    fs_view: FsView = _path_exists,
    log_view: LogView = read_task_logs,
    error_patterns: Sequence[str | re.Pattern[str]] | None = None,
) -> TaskStatus:
    """
    Decide a task's status from what the backend, filesystem and logs say.

    Queued and Running pass through unchanged. Total over its inputs.

    Args:
        task: The task being checked.
        backend_state: The backend's view of the task.
        exit_code: Process exit code, if the backend knows it.
        fs_view: Output-existence oracle.
        log_view: Source of log lines for the task.
        error_patterns: Regular expressions marking a log line as an error;
            the defaults apply when empty.

    Returns:
        The inferred status.
    """
    if backend_state == BackendState.QUEUED:
        return TaskStatus(TaskState.QUEUED)
    if backend_state == BackendState.RUNNING:
        return TaskStatus(TaskState.RUNNING)
    if backend_state == BackendState.FAILED:
        return TaskStatus.failed(FailureKind.BACKEND_FAILED, "backend reported failure")

    if exit_code is not None and exit_code != 0:
        return TaskStatus.failed(FailureKind.NONZERO_EXIT, f"exit code {exit_code}")

    missing = [path for path in task.expected_outputs if not fs_view(path)]
    if missing:
        return TaskStatus.failed(FailureKind.MISSING_OUTPUT, ", ".join(str(path) for path in missing))

    compiled = compile_error_patterns(error_patterns)
    for line in log_view(task):
        for pattern in compiled:
            if pattern.search(line):
                return TaskStatus.failed(FailureKind.LOG_ERROR, line.strip())

    return TaskStatus.succeeded()
