"""Tests for the pipeline executor against real and scripted backends."""

from __future__ import annotations

from pathlib import Path

import pytest

from seqpipe.exceptions import BackendUnavailableError, CapacityError, PlanningError, StageFailedError
from seqpipe.executor.backends.local import LocalBackend
from seqpipe.executor.base import PipelineExecutor, async_run_pipeline
from seqpipe.executor.planning import plan_stage_tasks
from seqpipe.executor.store import read_ledger
from seqpipe.executor.task import BackendHandle, BackendState, FailureKind, JobSubmission, TaskPoll, TaskState
from seqpipe.pipeline.model import StageSpec
from seqpipe.pipeline.parser import parse_pipeline_spec
from seqpipe.seqdata.records import SequenceRecord, read_sequence_file, sequences_to_bytes, write_sequence_file

PIPELINE = """\
name: copycount
stages:
  - id: copy
    mode: scatter
    command: cp {input} {workdir}/copy_{part}.fasta
    outputs: ["{workdir}/copy_{part}.fasta"]
  - id: count
    mode: scatter
    command: grep -c '>' {input} > {workdir}/n_{part}.tsv
    outputs: ["{workdir}/n_{part}.tsv"]
    gather: rows
  - id: summary
    mode: single
    input: copy
    command: wc -l < {input} > {output}
    outputs: ["{workdir}/lines.txt"]
"""


class ScriptedBackend:
    """Backend whose polls follow a script of results and exceptions."""

    name = "scripted"

    def __init__(self, script: list[object], capacity: int = 4) -> None:
        self.script = list(script)
        self._capacity = capacity
        self.cancelled: list[str] = []

    def capacity(self) -> int:
        return self._capacity

    async def async_submit(self, job: JobSubmission) -> BackendHandle:
        return BackendHandle(job_id=job.job_id, backend=self.name, token="t", job=job)

    async def async_poll(self, handle: BackendHandle) -> dict[str, TaskPoll]:
        step = self.script.pop(0) if len(self.script) > 1 else self.script[0]
        if isinstance(step, Exception):
            raise step
        assert handle.job is not None
        return {task_id: step for task_id in handle.job.task_ids}

    async def async_cancel(self, handle: BackendHandle) -> None:
        self.cancelled.append(handle.job_id)

    async def async_close(self) -> None:
        return None


@pytest.fixture
def dataset(tmp_path: Path) -> Path:
    path = tmp_path / "contigs.fasta"
    write_sequence_file(path, [SequenceRecord(id=f"c{k}", bases="ACGT" * (k + 1)) for k in range(10)], "fasta")
    return path


def _single_job(tmp_path: Path, command: str = "touch out.txt", stage_id: str = "one") -> JobSubmission:
    stage = StageSpec(
        id=stage_id,
        mode="single",
        command_template=command,
        expected_outputs=("out.txt",),
        input="dataset",
    )
    return plan_stage_tasks(stage, [tmp_path / "in.txt"], 1, tmp_path / "run", submit_seq=1)


@pytest.mark.integration
async def test_run_pipeline_scatter_gather(tmp_path: Path, dataset: Path) -> None:
    spec = parse_pipeline_spec(PIPELINE)
    backend = LocalBackend(workers=3)

    result = await async_run_pipeline(spec, dataset, backend, 3, tmp_path / "run", poll_interval=0.05)

    run_root = (tmp_path / "run").resolve()
    assert result.succeeded
    assert result.outputs["copy"] == [run_root / "copy" / "copy.fasta"]
    copied = run_root / "copy" / "copy.fasta"
    assert copied.read_bytes() == sequences_to_bytes(read_sequence_file(dataset), "fasta")
    assert sorted((run_root / "count" / "n.tsv").read_text().split()) == ["3", "3", "4"]
    assert (run_root / "summary" / "lines.txt").read_text().strip() == "20"
    assert not (run_root / "copy" / "parts").exists()
    assert not (run_root / "copy" / "part_0").exists()

    assert result.metrics.core_count == 3
    assert set(result.metrics.tool_times) == {"copy", "count", "summary"}
    assert len(result.metrics.tool_times["copy"]) == 3
    events = read_ledger(run_root / "events.jsonl")
    assert events[0]["event"] == "run_started"
    assert (events[-1]["event"], events[-1]["status"]) == ("run_finished", "succeeded")
    assert (run_root / "metrics.json").is_file()


@pytest.mark.integration
async def test_tasks_per_core_changes_partition_count(tmp_path: Path, dataset: Path) -> None:
    spec = parse_pipeline_spec(PIPELINE)

    result = await async_run_pipeline(
        spec, dataset, LocalBackend(workers=2), 2, tmp_path / "run", tasks_per_core=3, poll_interval=0.05
    )

    assert len(result.stage_statuses["copy"]) == 6
    assert sorted((tmp_path / "run" / "count" / "n.tsv").read_text().split()) == ["1", "1", "2", "2", "2", "2"]


@pytest.mark.integration
async def test_failed_stage_stops_the_run(tmp_path: Path, dataset: Path) -> None:
    spec = parse_pipeline_spec(
        PIPELINE.replace("command: cp", "command: echo ERROR-in-part-{part} >&2; cp")
    )

    with pytest.raises(StageFailedError) as err:
        await async_run_pipeline(spec, dataset, LocalBackend(workers=2), 2, tmp_path / "run", poll_interval=0.05)

    run_root = (tmp_path / "run").resolve()
    assert err.value.stage_id == "copy"
    assert {reason.kind for reason in err.value.failures.values()} == {FailureKind.LOG_ERROR}
    result = err.value.result
    assert result.failed_stage == "copy"
    assert not result.succeeded
    assert sorted(result.retained_workdirs) == [run_root / "copy" / "part_0", run_root / "copy" / "part_1"]
    assert all(path.is_dir() for path in result.retained_workdirs)
    assert not (run_root / "count").exists()
    assert read_ledger(run_root / "events.jsonl")[-1]["status"] == "failed"


@pytest.mark.integration
async def test_nonzero_exit_and_missing_output(tmp_path: Path) -> None:
    executor = PipelineExecutor(LocalBackend(workers=2), poll_interval=0.05)
    failing = _single_job(tmp_path, "exit 3", stage_id="failing")
    silent = _single_job(tmp_path, "true", stage_id="silent")

    handles = [await executor.async_submit_job(failing), await executor.async_submit_job(silent)]
    results = await executor.async_wait_all(handles)

    assert results[handles[0]]["failing/single"].failure.kind == FailureKind.NONZERO_EXIT
    assert results[handles[1]]["silent/single"].failure.kind == FailureKind.MISSING_OUTPUT


@pytest.mark.integration
async def test_timeout_fails_and_cancels(tmp_path: Path) -> None:
    backend = LocalBackend(workers=1)
    executor = PipelineExecutor(backend, poll_interval=0.05, timeout=0.3)
    stage = StageSpec(
        id="slow",
        mode="single",
        command_template="sleep 30; touch out.txt",
        expected_outputs=("out.txt",),
        input="dataset",
    )
    (tmp_path / "in.txt").write_text("x\n")

    outcome = await executor.async_run_stage(stage, tmp_path / "in.txt", 1, tmp_path / "run")

    assert outcome.failures["slow/single"].kind == FailureKind.TIMEOUT
    await backend.async_close()


@pytest.mark.unit
async def test_submit_checks_capacity(tmp_path: Path) -> None:
    executor = PipelineExecutor(ScriptedBackend([TaskPoll(BackendState.QUEUED)], capacity=1))
    job = _single_job(tmp_path)
    job.requested_cores = 2
    with pytest.raises(CapacityError):
        await executor.async_submit_job(job)


@pytest.mark.unit
async def test_temporary_poll_errors_are_retried(tmp_path: Path) -> None:
    job = _single_job(tmp_path)
    (job.tasks[0].workdir / "out.txt").write_text("ok\n")
    backend = ScriptedBackend(
        [TimeoutError("timed out"), ConnectionError("reset"), TaskPoll(BackendState.DONE, exit_code=0)]
    )
    executor = PipelineExecutor(backend, poll_interval=0.01)

    handle = await executor.async_submit_job(job)
    statuses = (await executor.async_wait_all([handle]))[handle]

    assert statuses["one/single"].state == TaskState.SUCCEEDED
    assert executor.consecutive_errors == 0


@pytest.mark.unit
async def test_repeated_temporary_errors_become_permanent(tmp_path: Path) -> None:
    backend = ScriptedBackend([TimeoutError("timed out")])
    executor = PipelineExecutor(backend, poll_interval=0.01)

    handle = await executor.async_submit_job(_single_job(tmp_path))
    statuses = (await executor.async_wait_all([handle]))[handle]

    assert statuses["one/single"].failure.kind == FailureKind.BACKEND_FAILED
    assert executor.consecutive_errors == 3


@pytest.mark.unit
async def test_backend_unavailable_fails_tasks_at_once(tmp_path: Path) -> None:
    backend = ScriptedBackend([BackendUnavailableError("cluster is shut down")])
    executor = PipelineExecutor(backend, poll_interval=0.01)

    handle = await executor.async_submit_job(_single_job(tmp_path))
    statuses = (await executor.async_wait_all([handle]))[handle]

    assert statuses["one/single"].failure.kind == FailureKind.BACKEND_FAILED
    assert executor.consecutive_errors == 1
    assert executor.last_error_type == "permanent"


@pytest.mark.unit
async def test_wait_all_adopts_jobs_from_handles(tmp_path: Path) -> None:
    job = _single_job(tmp_path)
    (job.tasks[0].workdir / "out.txt").write_text("ok\n")
    backend = ScriptedBackend([TaskPoll(BackendState.DONE, exit_code=0, started_at=1.0, finished_at=3.0)])
    handle = await backend.async_submit(job)

    statuses = (await PipelineExecutor(backend, poll_interval=0.01).async_wait_all([handle]))[handle]

    assert statuses["one/single"].state == TaskState.SUCCEEDED
    assert job.tasks[0].wall_time == 2.0


@pytest.mark.unit
@pytest.mark.parametrize(
    ("message", "expected"),
    [
        ("job not found", "permanent"),
        ("connection refused", "temporary"),
        ("server busy, try again", "temporary"),
        ("something odd", "unknown"),
    ],
)
def test_classify_error(message: str, expected: str) -> None:
    executor = PipelineExecutor(ScriptedBackend([TaskPoll(BackendState.QUEUED)]))
    assert executor._classify_error(RuntimeError(message)) == expected


@pytest.mark.unit
async def test_run_pipeline_rejects_reused_run_root(tmp_path: Path, dataset: Path) -> None:
    (tmp_path / "run").mkdir()
    (tmp_path / "run" / "events.jsonl").write_text("")
    with pytest.raises(PlanningError) as err:
        await async_run_pipeline(parse_pipeline_spec(PIPELINE), dataset, ScriptedBackend([]), 1, tmp_path / "run")
    assert err.value.error_key == "run_root_in_use"
