"""
Simulator scenarios.

A scenario document looks like::

    name: straggler
    seed: 0             # optional
    jitter: 0.0         # optional
    nodes:
      - id: n
        cores: 2
        count: 2        # optional, yields n1, n2
      - id: slow
        cores: 2
        slowdown: 3.0   # optional
    jobs:
      - id: tasks-4
        user: alice     # optional
        cores: 4
        tasks: 4
        base_time_s: 10
        arrival: 0      # optional
        nodes: [n1]     # optional pinning
        label: balanced # optional, groups jobs in reports
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import voluptuous as vol

from seqpipe.const import (
    CONF_ARRIVAL,
    CONF_BASE_TIME_S,
    CONF_CORES,
    CONF_COUNT,
    CONF_ID,
    CONF_JITTER,
    CONF_JOBS,
    CONF_LABEL,
    CONF_NAME,
    CONF_NODES,
    CONF_SEED,
    CONF_SLOWDOWN,
    CONF_TASKS,
    CONF_USER,
    LOGGER,
    SCENARIO_SUFFIXES,
    SIM_DEFAULT_JITTER,
    SIM_DEFAULT_SEED,
    SIM_DEFAULT_USER,
    SUMMARY_FILE_NAME,
    TRACE_FILE_NAME,
)
from seqpipe.exceptions import CapacityError, ConfigError, ScenarioError
from seqpipe.pipeline.schemas import IDENTIFIER, config_error_from_invalid
from seqpipe.pipeline.validators.yaml_validator import load_config_yaml
from seqpipe.simcluster.cluster import SimCluster, build_cluster
from seqpipe.simcluster.models import SimClusterConfig, SimEventTrace, SimJobRequest, SimNode
from seqpipe.simcluster.trace import write_summary_tsv, write_trace_jsonl

PACKAGED_SCENARIO_DIR = "scenarios"

_POSITIVE_INT = vol.All(int, vol.Range(min=1))
_NON_NEGATIVE = vol.All(vol.Coerce(float), vol.Range(min=0.0))

NODE_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_ID): IDENTIFIER,
        vol.Required(CONF_CORES): _POSITIVE_INT,
        vol.Optional(CONF_SLOWDOWN, default=1.0): vol.All(vol.Coerce(float), vol.Range(min=1.0)),
        vol.Optional(CONF_COUNT, default=1): _POSITIVE_INT,
    },
    extra=vol.PREVENT_EXTRA,
)

JOB_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_ID): IDENTIFIER,
        vol.Optional(CONF_USER, default=SIM_DEFAULT_USER): IDENTIFIER,
        vol.Required(CONF_CORES): _POSITIVE_INT,
        vol.Required(CONF_TASKS): _POSITIVE_INT,
        vol.Required(CONF_BASE_TIME_S): _NON_NEGATIVE,
        vol.Optional(CONF_ARRIVAL, default=0.0): _NON_NEGATIVE,
        vol.Optional(CONF_NODES): [IDENTIFIER],
        vol.Optional(CONF_LABEL): str,
    },
    extra=vol.PREVENT_EXTRA,
)

SCENARIO_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_NAME): IDENTIFIER,
        vol.Optional(CONF_SEED, default=SIM_DEFAULT_SEED): int,
        vol.Optional(CONF_JITTER, default=SIM_DEFAULT_JITTER): _NON_NEGATIVE,
        vol.Required(CONF_NODES): vol.All([NODE_SCHEMA], vol.Length(min=1)),
        vol.Required(CONF_JOBS): vol.All([JOB_SCHEMA], vol.Length(min=1)),
    },
    extra=vol.PREVENT_EXTRA,
)


@dataclass(frozen=True, slots=True)
class ScenarioJob:
    """A job and the virtual time it arrives."""

    request: SimJobRequest
    arrival: float


@dataclass(frozen=True, slots=True)
class Scenario:
    """A cluster layout plus the jobs to run on it."""

    name: str
    config: SimClusterConfig
    jobs: tuple[ScenarioJob, ...]

    @property
    def requests(self) -> dict[str, SimJobRequest]:
        """Job id to request."""
        return {job.request.job_id: job.request for job in self.jobs}

    def label_of(self, job_id: str) -> str:
        """Report label of a job (its id when unlabelled)."""
        return self.requests[job_id].label or job_id


@dataclass(frozen=True, slots=True)
class ScenarioRun:
    """A scenario after simulation."""

    scenario: Scenario
    cluster: SimCluster
    trace: SimEventTrace


def _expand_nodes(raw_nodes: list[dict]) -> tuple[SimNode, ...]:
    nodes: list[SimNode] = []
    for raw in raw_nodes:
        count = raw[CONF_COUNT]
        if count == 1:
            nodes.append(SimNode(raw[CONF_ID], raw[CONF_CORES], raw[CONF_SLOWDOWN]))
            continue
        width = len(str(count))
        nodes.extend(
            SimNode(f"{raw[CONF_ID]}{index:0{width}d}", raw[CONF_CORES], raw[CONF_SLOWDOWN])
            for index in range(1, count + 1)
        )
    return tuple(nodes)


def parse_scenario(text: str) -> Scenario:
    """
    Parse a scenario document.

    Raises:
        ScenarioError: Syntax or schema error, duplicate ids, a job pinned to
            an unknown node, or a job larger than the nodes it may use.
    """
    try:
        document = load_config_yaml(text)
    except ConfigError as exc:
        raise ScenarioError(str(exc), error_key=exc.error_key) from exc
    try:
        validated = SCENARIO_SCHEMA(document)
    except vol.Invalid as exc:
        raise config_error_from_invalid(exc, ScenarioError) from exc

    config = SimClusterConfig(
        nodes=_expand_nodes(validated[CONF_NODES]),
        seed=validated[CONF_SEED],
        service_time_jitter=validated[CONF_JITTER],
    )
    node_ids = {node.node_id for node in config.nodes}

    jobs: list[ScenarioJob] = []
    seen: set[str] = set()
    for raw in validated[CONF_JOBS]:
        job_id = raw[CONF_ID]
        if job_id in seen:
            raise ScenarioError(f"duplicate job id '{job_id}'", error_key="scenario_duplicate_job")
        seen.add(job_id)
        pinned = tuple(raw[CONF_NODES]) if CONF_NODES in raw else None
        if pinned is not None:
            unknown = sorted(set(pinned) - node_ids)
            if unknown:
                raise ScenarioError(
                    f"job '{job_id}' is pinned to unknown node(s) {', '.join(unknown)}",
                    error_key="scenario_unknown_node",
                )
        available = sum(config.node(n).cores for n in pinned) if pinned else config.capacity
        if raw[CONF_CORES] > available:
            raise ScenarioError(
                f"job '{job_id}' requests {raw[CONF_CORES]} cores but only {available} are available to it",
                error_key="scenario_capacity",
            )
        n_tasks = raw[CONF_TASKS]
        request = SimJobRequest(
            job_id=job_id,
            user=raw[CONF_USER],
            requested_cores=raw[CONF_CORES],
            task_ids=tuple(f"{job_id}/task_{index}" for index in range(n_tasks)),
            base_times=(raw[CONF_BASE_TIME_S],) * n_tasks,
            pinned_nodes=pinned,
            label=raw.get(CONF_LABEL, ""),
        )
        jobs.append(ScenarioJob(request=request, arrival=raw[CONF_ARRIVAL]))

    return Scenario(name=validated[CONF_NAME], config=config, jobs=tuple(jobs))


def packaged_scenarios() -> list[str]:
    """Names of the scenarios shipped with the package."""
    directory = resources.files(__package__).joinpath(PACKAGED_SCENARIO_DIR)
    return sorted(entry.name.rsplit(".", 1)[0] for entry in directory.iterdir() if entry.name.endswith(".yaml"))


def load_scenario(source: Path | str) -> Scenario:
    """
    Load a scenario from a file path or by packaged name (``straggler``, ...).

    Raises:
        ScenarioError: No such file or packaged scenario, or the document is invalid.
    """
    path = Path(source)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"))
    if path.suffix in SCENARIO_SUFFIXES or len(path.parts) > 1:
        raise ScenarioError(f"scenario file {path} not found", error_key="scenario_not_found")

    resource = resources.files(__package__).joinpath(PACKAGED_SCENARIO_DIR, f"{source}.yaml")
    if not resource.is_file():
        raise ScenarioError(
            f"unknown scenario '{source}' (packaged: {', '.join(packaged_scenarios())})",
            error_key="scenario_not_found",
        )
    return parse_scenario(resource.read_text(encoding="utf-8"))


def run_scenario(scenario: Scenario) -> ScenarioRun:
    """Simulate every job of the scenario to completion."""
    cluster = build_cluster(scenario.config)
    for job in sorted(scenario.jobs, key=lambda j: j.arrival):
        try:
            cluster.enqueue_job(job.request, at=job.arrival)
        except CapacityError as exc:
            raise ScenarioError(str(exc), error_key="scenario_capacity") from exc
    trace = cluster.advance()
    LOGGER.info(
        "Scenario %s: %d job(s), %d event(s), finished at t=%g",
        scenario.name,
        len(scenario.jobs),
        len(trace),
        cluster.now,
    )
    return ScenarioRun(scenario=scenario, cluster=cluster, trace=trace)


def write_scenario_outputs(run: ScenarioRun, out_dir: Path | str) -> tuple[Path, Path]:
    """Write ``trace.jsonl`` and ``summary.tsv`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = write_trace_jsonl(run.trace, out_dir / TRACE_FILE_NAME)
    summary_path = out_dir / SUMMARY_FILE_NAME
    with summary_path.open("w", encoding="utf-8", newline="") as stream:
        write_summary_tsv(run.trace, run.scenario.requests, stream)
    return trace_path, summary_path
