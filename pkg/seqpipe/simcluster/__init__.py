"""
Discrete-event batch cluster simulator.

Gang core allocation, a priority queue without backfill, per-node slowdowns
and a virtual clock. Usable standalone (scenarios) or as an executor backend.
"""

from __future__ import annotations

from .backend import SimClusterBackend
from .cluster import SimCluster, SimJobState, SimTaskState, advance, build_cluster, enqueue_job
from .models import (
    JobTiming,
    NodeTaskTimes,
    SimClusterConfig,
    SimEvent,
    SimEventKind,
    SimEventTrace,
    SimJobRequest,
    SimNode,
    natural_key,
)
from .scenario import (
    Scenario,
    ScenarioJob,
    ScenarioRun,
    load_scenario,
    packaged_scenarios,
    parse_scenario,
    run_scenario,
    write_scenario_outputs,
)
from .trace import job_makespan, straggler_summary, task_durations, write_summary_tsv, write_trace_jsonl

__all__ = [
    "JobTiming",
    "NodeTaskTimes",
    "Scenario",
    "ScenarioJob",
    "ScenarioRun",
    "SimCluster",
    "SimClusterBackend",
    "SimClusterConfig",
    "SimEvent",
    "SimEventKind",
    "SimEventTrace",
    "SimJobRequest",
    "SimJobState",
    "SimNode",
    "SimTaskState",
    "advance",
    "build_cluster",
    "enqueue_job",
    "job_makespan",
    "load_scenario",
    "natural_key",
    "packaged_scenarios",
    "parse_scenario",
    "run_scenario",
    "straggler_summary",
    "task_durations",
    "write_scenario_outputs",
    "write_summary_tsv",
    "write_trace_jsonl",
]
