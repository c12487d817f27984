"""Tests for the discrete-event cluster."""

from __future__ import annotations

import pytest

from seqpipe.exceptions import CapacityError, ScenarioError, SimulationError
from seqpipe.simcluster import (
    SimClusterConfig,
    SimEventKind,
    SimJobRequest,
    SimNode,
    advance,
    build_cluster,
    enqueue_job,
    job_makespan,
    natural_key,
    straggler_summary,
    task_durations,
)

pytestmark = pytest.mark.unit


def _job(job_id: str, cores: int, tasks: int, base: float, user: str = "default", **kwargs: object) -> SimJobRequest:
    return SimJobRequest(
        job_id=job_id,
        user=user,
        requested_cores=cores,
        task_ids=tuple(f"{job_id}/t{index}" for index in range(tasks)),
        base_times=(base,) * tasks,
        **kwargs,
    )


def _config(*nodes: SimNode, **kwargs: object) -> SimClusterConfig:
    return SimClusterConfig(nodes=nodes, **kwargs)


def test_natural_key_orders_numbers() -> None:
    assert sorted(["n10", "n2", "n1"], key=natural_key) == ["n1", "n2", "n10"]


def test_config_rejects_bad_layouts() -> None:
    with pytest.raises(ScenarioError):
        SimClusterConfig(nodes=())
    with pytest.raises(ScenarioError):
        _config(SimNode("a", 1), SimNode("a", 2))
    with pytest.raises(ScenarioError):
        SimNode("a", 0)
    with pytest.raises(ScenarioError):
        SimNode("a", 1, slowdown=0.5)


def test_single_job_makespan() -> None:
    cluster = build_cluster(_config(SimNode("n1", 4)))
    enqueue_job(cluster, _job("j", 4, 8, 10.0))
    trace = advance(cluster)

    timing = job_makespan(trace, "j")
    assert (timing.queued_at, timing.started_at, timing.finished_at) == (0.0, 0.0, 20.0)
    assert timing.exec == 20.0
    assert timing.wait == 0.0
    assert cluster.is_quiescent
    assert cluster.free_cores == 4


def test_events_are_ordered() -> None:
    cluster = build_cluster(_config(SimNode("n1", 2), SimNode("n2", 2)))
    enqueue_job(cluster, _job("a", 2, 3, 1.0))
    enqueue_job(cluster, _job("b", 2, 2, 1.5), at=0.5)
    trace = advance(cluster)

    times = [event.time for event in trace]
    assert times == sorted(times)
    kinds = [event.kind for event in trace.for_job("a")]
    assert kinds[:2] == [SimEventKind.JOB_QUEUED, SimEventKind.JOB_STARTED]
    assert kinds[-1] == SimEventKind.JOB_FINISHED
    # at one instant, completions come before starts
    at_one = [event.kind for event in trace if event.time == 1.0 and event.job_id == "a"]
    assert at_one == [SimEventKind.TASK_FINISHED, SimEventKind.TASK_FINISHED, SimEventKind.TASK_STARTED]


def test_gang_allocation_walks_nodes_in_natural_order() -> None:
    cluster = build_cluster(_config(SimNode("n10", 2), SimNode("n2", 2), SimNode("n1", 2)))
    enqueue_job(cluster, _job("j", 5, 5, 1.0))
    trace = advance(cluster)

    placed = [(event.node_id, event.core) for event in trace.of_kind(SimEventKind.TASK_STARTED)]
    assert placed == [("n1", 0), ("n1", 1), ("n2", 0), ("n2", 1), ("n10", 0)]


def test_gang_blocked_job_waits_for_whole_predecessor() -> None:
    cluster = build_cluster(_config(SimNode("n1", 4)))
    enqueue_job(cluster, _job("first", 4, 4, 10.0, user="a"))
    enqueue_job(cluster, _job("second", 4, 4, 10.0, user="b"))
    trace = advance(cluster)

    first = job_makespan(trace, "first")
    second = job_makespan(trace, "second")
    assert second.wait == first.exec == 10.0
    assert second.started_at == first.finished_at


def test_uneven_tasks_hold_cores_until_job_ends() -> None:
    cluster = build_cluster(_config(SimNode("n1", 4)))
    enqueue_job(cluster, _job("straggly", 4, 5, 10.0))
    enqueue_job(cluster, _job("next", 1, 1, 1.0), at=0.5)
    trace = advance(cluster)

    # three cores idle from t=10, but the gang keeps them until t=20
    assert job_makespan(trace, "straggly").finished_at == 20.0
    assert job_makespan(trace, "next").started_at == 20.0


def test_lighter_job_goes_first() -> None:
    cluster = build_cluster(_config(*(SimNode(f"n{k}", 32) for k in range(1, 5))))
    enqueue_job(cluster, _job("blocker", 32, 32, 10.0, user="a"))
    enqueue_job(cluster, _job("heavy", 128, 128, 10.0, user="b"), at=1.0)
    enqueue_job(cluster, _job("light", 32, 32, 10.0, user="c"), at=1.0)
    trace = advance(cluster)

    light = job_makespan(trace, "light")
    heavy = job_makespan(trace, "heavy")
    assert light.started_at == 1.0
    assert heavy.started_at == 11.0
    assert heavy.started_at >= light.finished_at


def test_user_with_running_jobs_yields() -> None:
    cluster = build_cluster(_config(SimNode("n1", 8)))
    enqueue_job(cluster, _job("a1", 4, 4, 10.0, user="alice"))
    enqueue_job(cluster, _job("a2", 4, 4, 10.0, user="alice"), at=1.0)
    enqueue_job(cluster, _job("b1", 4, 4, 10.0, user="bob"), at=1.0)
    trace = advance(cluster)

    assert job_makespan(trace, "b1").started_at == 1.0
    assert job_makespan(trace, "a2").started_at == 10.0


def test_no_backfill_behind_blocked_head() -> None:
    cluster = build_cluster(_config(SimNode("n1", 8)))
    enqueue_job(cluster, _job("running", 4, 4, 10.0, user="u1"))
    enqueue_job(cluster, _job("wide", 8, 8, 10.0, user="u2"))
    enqueue_job(cluster, _job("small", 2, 2, 1.0, user="u1"), at=1.0)
    trace = advance(cluster)

    # "small" would fit at t=1 but "wide" is ahead of it in the queue
    assert job_makespan(trace, "small").started_at == 10.0
    assert job_makespan(trace, "wide").started_at == 11.0


def test_pinned_job_stays_on_its_nodes() -> None:
    cluster = build_cluster(_config(SimNode("n1", 2), SimNode("n2", 2)))
    enqueue_job(cluster, _job("pinned", 2, 4, 1.0, pinned_nodes=("n2",)))
    trace = advance(cluster)

    assert {event.node_id for event in trace.of_kind(SimEventKind.TASK_STARTED)} == {"n2"}


def test_slowdown_scales_service_time() -> None:
    config = _config(SimNode("fast", 1), SimNode("slow", 1, slowdown=3.0))
    cluster = build_cluster(config)
    enqueue_job(cluster, _job("j", 2, 2, 2.0))
    trace = advance(cluster)

    durations = sorted(task_durations(trace).values())
    assert durations == [("fast", 2.0), ("slow", 6.0)]
    summary = straggler_summary(trace, config)
    assert [(node.node_id, node.n_tasks, node.median_task_time) for node in summary] == [
        ("fast", 1, 2.0),
        ("slow", 1, 6.0),
    ]


def test_jitter_is_seeded() -> None:
    def run(seed: int) -> str:
        cluster = build_cluster(_config(SimNode("n1", 4), seed=seed, service_time_jitter=0.5))
        enqueue_job(cluster, _job("j", 4, 16, 1.0))
        return advance(cluster).to_jsonl()

    assert run(3) == run(3)
    assert run(3) != run(4)
    cluster = build_cluster(_config(SimNode("n1", 4), seed=3, service_time_jitter=0.5))
    enqueue_job(cluster, _job("j", 4, 16, 1.0))
    for _, duration in task_durations(advance(cluster)).values():
        assert 1.0 <= duration < 1.5


def test_advance_until_stops_the_clock() -> None:
    cluster = build_cluster(_config(SimNode("n1", 1)))
    enqueue_job(cluster, _job("j", 1, 3, 10.0))

    partial = advance(cluster, until=15.0)
    assert cluster.now == 15.0
    assert len(partial.of_kind(SimEventKind.TASK_FINISHED)) == 1
    assert cluster.job("j").next_task == 2
    with pytest.raises(SimulationError):
        job_makespan(cluster.trace, "j")

    advance(cluster)
    assert job_makespan(cluster.trace, "j").finished_at == 30.0


def test_enqueue_rejects_bad_jobs() -> None:
    cluster = build_cluster(_config(SimNode("n1", 2), SimNode("n2", 2)))
    with pytest.raises(CapacityError):
        enqueue_job(cluster, _job("big", 5, 1, 1.0))
    with pytest.raises(CapacityError):
        enqueue_job(cluster, _job("pinned", 3, 1, 1.0, pinned_nodes=("n1",)))
    with pytest.raises(ScenarioError):
        enqueue_job(cluster, _job("lost", 1, 1, 1.0, pinned_nodes=("n9",)))
    enqueue_job(cluster, _job("ok", 1, 1, 1.0))
    with pytest.raises(ValueError, match="already enqueued"):
        enqueue_job(cluster, _job("ok", 1, 1, 1.0))
    advance(cluster)
    with pytest.raises(ValueError, match="arrives at"):
        enqueue_job(cluster, _job("late", 1, 1, 1.0), at=0.0)


def test_request_validation() -> None:
    with pytest.raises(ValueError, match="requested_cores"):
        _job("j", 0, 1, 1.0)
    with pytest.raises(ValueError, match="no tasks"):
        _job("j", 1, 0, 1.0)
    with pytest.raises(ValueError, match="base times"):
        _job("j", 1, 1, -1.0)
