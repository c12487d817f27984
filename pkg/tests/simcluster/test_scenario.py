"""Tests for simulator scenarios and the simulated backend."""

from __future__ import annotations

from pathlib import Path

import pytest

from seqpipe.exceptions import ScenarioError
from seqpipe.executor.backends.local import LocalBackend
from seqpipe.executor.base import PipelineExecutor, async_run_pipeline
from seqpipe.executor.task import FailureKind
from seqpipe.pipeline.model import StageResources, StageSpec
from seqpipe.pipeline.parser import parse_pipeline_spec
from seqpipe.seqdata.records import SequenceRecord, write_sequence_file
from seqpipe.simcluster import (
    JobTiming,
    Scenario,
    ScenarioRun,
    SimClusterBackend,
    SimClusterConfig,
    SimEventKind,
    SimNode,
    job_makespan,
    load_scenario,
    packaged_scenarios,
    parse_scenario,
    run_scenario,
    straggler_summary,
    write_scenario_outputs,
)

MINIMAL = """\
name: tiny
nodes:
  - id: n
    cores: 2
    count: 2
jobs:
  - id: j
    cores: 4
    tasks: 4
    base_time_s: 3
"""


def _run(name: str) -> tuple[ScenarioRun, dict[str, JobTiming]]:
    run = run_scenario(load_scenario(name))
    return run, {job_id: job_makespan(run.trace, job_id) for job_id in run.scenario.requests}


@pytest.mark.unit
def test_packaged_scenarios() -> None:
    assert packaged_scenarios() == ["isolation", "priority", "speedup", "straggler"]


@pytest.mark.unit
def test_parse_expands_node_counts() -> None:
    scenario = parse_scenario(MINIMAL)

    assert [node.node_id for node in scenario.config.nodes] == ["n1", "n2"]
    assert scenario.config.capacity == 4
    request = scenario.requests["j"]
    assert request.user == "default"
    assert request.task_ids == ("j/task_0", "j/task_1", "j/task_2", "j/task_3")
    assert request.base_times == (3.0,) * 4
    assert scenario.label_of("j") == "j"


@pytest.mark.unit
@pytest.mark.parametrize(
    ("document", "error_key"),
    [
        (MINIMAL + "  - id: j\n    cores: 1\n    tasks: 1\n    base_time_s: 1\n", "scenario_duplicate_job"),
        (MINIMAL + "    nodes: [n9]\n", "scenario_unknown_node"),
        (MINIMAL.replace("cores: 4", "cores: 5"), "scenario_capacity"),
        (MINIMAL + "    nodes: [n1]\n", "scenario_capacity"),
        (MINIMAL.replace("name: tiny\n", ""), "missing_field"),
        (MINIMAL + "    priority: 3\n", "unknown_field"),
        (MINIMAL.replace("base_time_s: 3", "base_time_s: -1"), "invalid_value"),
        ("name: [unclosed\n", "yaml_parse_error"),
    ],
)
def test_parse_errors(document: str, error_key: str) -> None:
    with pytest.raises(ScenarioError) as err:
        parse_scenario(document)
    assert err.value.error_key == error_key


@pytest.mark.unit
def test_load_scenario_sources(tmp_path: Path) -> None:
    path = tmp_path / "tiny.yaml"
    path.write_text(MINIMAL, encoding="utf-8")
    assert load_scenario(path).name == "tiny"

    for missing in ("no-such-scenario", tmp_path / "missing.yaml"):
        with pytest.raises(ScenarioError) as err:
            load_scenario(missing)
        assert err.value.error_key == "scenario_not_found"


@pytest.mark.unit
def test_straggler_scenario() -> None:
    run, timings = _run("straggler")

    makespans = [timings[f"tasks-{n}"].exec for n in (4, 8, 16, 32)]
    assert makespans == [30.0, 15.0, 15.0, 15.0]
    assert all(later <= earlier for earlier, later in zip(makespans, makespans[1:], strict=False))
    summary = {node.node_id: node for node in straggler_summary(run.trace, run.scenario.config)}
    assert (summary["n1"].n_tasks, summary["n2"].n_tasks) == (44, 16)
    assert summary["n2"].slowdown == 3.0


@pytest.mark.unit
def test_speedup_scenario() -> None:
    _, timings = _run("speedup")

    balanced = [timings[f"balanced-{cores}"].exec for cores in (32, 64, 128)]
    assert balanced == [40.0, 20.0, 10.0]
    assert [balanced[0] / value for value in balanced] == [1.0, 2.0, 4.0]
    assert {timings[f"nonscaling-{cores}"].exec for cores in (32, 64, 128)} == {40.0}


@pytest.mark.unit
def test_isolation_scenario_matches_solo_runs() -> None:
    run, timings = _run("isolation")

    for job in run.scenario.jobs:
        job_id = job.request.job_id
        solo = SimClusterConfig(nodes=run.scenario.config.nodes)
        solo_run = run_scenario(Scenario(name="solo", config=solo, jobs=(job,)))
        assert timings[job_id].exec == job_makespan(solo_run.trace, job_id).exec == 10.0
        nodes = {event.node_id for event in run.trace.for_job(job_id) if event.kind == SimEventKind.TASK_STARTED}
        assert nodes == set(job.request.pinned_nodes or ())


@pytest.mark.unit
def test_priority_scenario() -> None:
    _, timings = _run("priority")

    assert timings["blocker"].started_at == 0.0
    assert timings["bob-2"].started_at == 10.0
    assert timings["alice-2"].started_at == 10.0
    assert timings["bob-1"].started_at == 20.0
    assert timings["carol-1"].started_at == 30.0
    assert timings["carol-1"].finished_at == 40.0


@pytest.mark.unit
def test_scenario_outputs_are_deterministic(tmp_path: Path) -> None:
    scenario = parse_scenario(MINIMAL.replace("name: tiny\n", "name: tiny\nseed: 5\njitter: 0.25\n"))

    first = write_scenario_outputs(run_scenario(scenario), tmp_path / "a")
    second = write_scenario_outputs(run_scenario(scenario), tmp_path / "b")

    for left, right in zip(first, second, strict=True):
        assert left.read_bytes() == right.read_bytes()
    assert first[0].name == "trace.jsonl"
    header, row = (tmp_path / "a" / "summary.tsv").read_text().splitlines()
    assert header.split("\t") == [
        "job",
        "user",
        "cores",
        "tasks",
        "queued",
        "started",
        "finished",
        "wait",
        "exec",
        "turnaround",
    ]
    assert row.split("\t")[:6] == ["j", "default", "4", "4", "0", "0"]


@pytest.mark.unit
def test_straggler_summary_rows(tmp_path: Path) -> None:
    run = run_scenario(load_scenario("straggler"))
    _, summary = write_scenario_outputs(run, tmp_path)

    rows = [line.split("\t") for line in summary.read_text().splitlines()[1:]]
    assert [row[0] for row in rows] == ["tasks-4", "tasks-8", "tasks-16", "tasks-32"]
    assert rows[1] == ["tasks-8", "default", "4", "8", "0", "30", "45", "30", "15", "45"]


@pytest.mark.integration
async def test_sim_backend_reports_virtual_times(tmp_path: Path) -> None:
    backend = SimClusterBackend(SimClusterConfig(nodes=(SimNode("n1", 4),)), inner=LocalBackend(workers=2))
    executor = PipelineExecutor(backend, poll_interval=0.05)
    stage = StageSpec(
        id="touch",
        mode="single",
        command_template="touch out.txt",
        expected_outputs=("out.txt",),
        input="dataset",
        resources=StageResources(base_time_s=7.0),
    )
    (tmp_path / "in.txt").write_text("x\n")

    outcome = await executor.async_run_stage(stage, tmp_path / "in.txt", 2, tmp_path / "run")

    assert not outcome.failures
    assert outcome.task_times == [7.0]
    assert outcome.makespan == 7.0
    assert [event.kind for event in backend.trace][:2] == [SimEventKind.JOB_QUEUED, SimEventKind.JOB_STARTED]
    await backend.async_close()


@pytest.mark.integration
async def test_sim_backend_runs_a_pipeline(tmp_path: Path) -> None:
    dataset = tmp_path / "contigs.fasta"
    write_sequence_file(dataset, [SequenceRecord(id=f"c{k}", bases="ACGT") for k in range(8)], "fasta")
    spec = parse_pipeline_spec(
        """\
name: simulated
stages:
  - id: copy
    mode: scatter
    command: cp {input} {workdir}/copy_{part}.fasta
    outputs: ["{workdir}/copy_{part}.fasta"]
    base_time_s: 10
"""
    )
    backend = SimClusterBackend(SimClusterConfig(nodes=(SimNode("n1", 4),)), inner=LocalBackend(workers=2))

    result = await async_run_pipeline(spec, dataset, backend, 2, tmp_path / "run", tasks_per_core=2, poll_interval=0.05)

    assert result.succeeded
    assert result.metrics.stage_makespans == {"copy": 20.0}
    assert result.metrics.tool_times == {"copy": (10.0, 10.0, 10.0, 10.0)}
    await backend.async_close()


@pytest.mark.unit
async def test_sim_backend_without_inner_backend(tmp_path: Path) -> None:
    backend = SimClusterBackend(SimClusterConfig(nodes=(SimNode("n1", 2),)))
    stage = StageSpec(
        id="virtual",
        mode="single",
        command_template="true",
        expected_outputs=("out.txt",),
        input="dataset",
        resources=StageResources(base_time_s=3.0),
    )
    executor = PipelineExecutor(backend, poll_interval=0.01)
    outcome = await executor.async_run_stage(stage, tmp_path / "in.txt", 1, tmp_path / "run")

    # nothing ran, so the declared output is missing
    assert outcome.failures["virtual/single"].kind == FailureKind.MISSING_OUTPUT
    assert outcome.makespan == 3.0
