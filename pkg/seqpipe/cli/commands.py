"""
Subcommand handlers.

Each handler takes the parsed arguments and returns an exit code; errors
propagate as exceptions and are mapped to exit codes by the dispatcher.
Paths written are echoed on stdout, one per line.
"""

from __future__ import annotations

import argparse
import asyncio
from collections.abc import Iterable
import dataclasses
from datetime import UTC, datetime
import json
import os
from pathlib import Path
import subprocess
import sys
import time

from seqpipe.annotation.export import export_metarep_jsonl, export_tsv
from seqpipe.annotation.merge import merge_annotations
from seqpipe.annotation.parsers import parse_evidence_table, parse_gene_predictions
from seqpipe.const import (
    DEFAULT_RUN_ROOT,
    ENV_RUN_ROOT,
    EVENTS_FILE_NAME,
    EXIT_FAILURE,
    EXIT_OK,
    FORMAT_FASTA,
    LOCAL_BACKEND_NAME,
    LOGGER,
    RUN_LOG_NAME,
    RUN_PID_NAME,
    RUN_STATUS_RUNNING,
    RUN_STATUS_SUCCEEDED,
)
from seqpipe.demo.data import write_demo_dataset
from seqpipe.diagnostics import render_diagnostics_text, run_diagnostics
from seqpipe.exceptions import MetricsError, PlanningError, SeqPipeError
from seqpipe.executor.backends.local import LocalBackend
from seqpipe.executor.base import PipelineExecutor, RunResult
from seqpipe.metrics.breakdown import median_breakdown
from seqpipe.metrics.ledger import combine_runs, group_by_tool, load_run_metrics, metrics_from_trace
from seqpipe.metrics.report import write_run_report
from seqpipe.metrics.speedup import speedup_table, speedup_tables
from seqpipe.pipeline.model import PipelineSpec
from seqpipe.pipeline.parser import load_pipeline_spec
from seqpipe.seqdata.filters import FilterParams, mask_records, quality_filter, resolve_length_cutoff
from seqpipe.seqdata.partition import merge_parts, read_partition, split_records
from seqpipe.seqdata.records import detect_format, read_sequence_file, write_sequence_file
from seqpipe.simcluster.backend import SimClusterBackend
from seqpipe.simcluster.models import SimClusterConfig, SimNode
from seqpipe.simcluster.scenario import load_scenario, run_scenario, write_scenario_outputs
from seqpipe.simcluster.trace import straggler_summary
from seqpipe.taxonomy.classify import classify_reads, hierarchy_counts
from seqpipe.taxonomy.io import (
    dump_hierarchy_json,
    read_assignments_tsv,
    read_hits_tsv,
    read_taxonomy_tsv,
    render_hierarchy_text,
    write_assignments_tsv,
)
from seqpipe.taxonomy.tree import build_taxonomy


def _emit(paths: Iterable[Path | str]) -> None:
    for path in paths:
        sys.stdout.write(f"{path}\n")


def _ensure_writable(paths: Iterable[Path | None]) -> None:
    """
    Create the parent directory of every output path.

    Raises:
        SeqPipeError: An output is a directory or its parent cannot be created.
    """
    for path in paths:
        if path is None:
            continue
        if path.is_dir():
            raise SeqPipeError(
                f"output {path} is a directory", error_key="output_not_writable", placeholders={"path": str(path)}
            )
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise SeqPipeError(
                f"cannot create directory for output {path}: {exc.strerror}",
                error_key="output_not_writable",
                placeholders={"path": str(path)},
            ) from exc
        if not os.access(path.parent, os.W_OK):
            raise SeqPipeError(
                f"output directory {path.parent} is not writable",
                error_key="output_not_writable",
                placeholders={"path": str(path)},
            )


def _read_lines(path: Path) -> list[str]:
    with path.open(encoding="utf-8") as handle:
        return handle.readlines()


# Pipeline runs


def resolve_run_root(args: argparse.Namespace, spec: PipelineSpec) -> Path:
    """
    Directory of a new run.

    The parent is ``--run-root``, else ``$SEQPIPE_RUN_ROOT``, else the spec's
    ``workdir_root``, else ``seqpipe-runs``; the run id defaults to the
    pipeline name and a UTC timestamp.
    """
    base = args.run_root or os.environ.get(ENV_RUN_ROOT) or spec.workdir_root or DEFAULT_RUN_ROOT
    run_id = args.run_id or f"{spec.name}-{datetime.now(UTC):%Y%m%dT%H%M%S}"
    return (Path(base) / run_id).resolve()


def build_backend(args: argparse.Namespace) -> LocalBackend | SimClusterBackend:
    """Backend selected by ``--backend``."""
    workers = args.workers or max(args.cores, os.cpu_count() or 1)
    if args.backend == LOCAL_BACKEND_NAME:
        return LocalBackend(workers=workers)
    if args.scenario:
        config = load_scenario(args.scenario).config
    else:
        config = SimClusterConfig(nodes=(SimNode("node1", args.cores),))
    return SimClusterBackend(config, inner=LocalBackend(workers=workers))


async def _async_run(args: argparse.Namespace, spec: PipelineSpec, run_root: Path) -> RunResult:
    backend = build_backend(args)
    executor = PipelineExecutor(
        backend,
        poll_interval=args.poll_interval,
        timeout=args.timeout,
        user=args.user,
    )
    try:
        return await executor.async_run_pipeline(
            spec,
            args.input,
            args.cores,
            run_root,
            tasks_per_core=args.tasks_per_core,
        )
    finally:
        await backend.async_close()


def cmd_run(args: argparse.Namespace) -> int:
    """Run a pipeline to completion."""
    spec = load_pipeline_spec(args.spec)
    run_root = resolve_run_root(args, spec)
    result = asyncio.run(_async_run(args, spec, run_root))
    _emit([result.run_root])
    _emit(path for stage_outputs in result.outputs.values() for path in stage_outputs)
    return EXIT_OK


def _forwarded_run_args(args: argparse.Namespace, run_root: Path) -> list[str]:
    forwarded = [
        "--spec",
        str(Path(args.spec).resolve()),
        "--input",
        str(Path(args.input).resolve()),
        "--backend",
        args.backend,
        "--cores",
        str(args.cores),
        "--tasks-per-core",
        str(args.tasks_per_core),
        "--poll-interval",
        str(args.poll_interval),
        "--timeout",
        str(args.timeout),
        "--user",
        args.user,
        "--run-root",
        str(run_root.parent),
        "--run-id",
        run_root.name,
    ]
    if args.workers:
        forwarded += ["--workers", str(args.workers)]
    if args.scenario:
        forwarded += ["--scenario", str(args.scenario)]
    return forwarded


# Detached runs started by this process; kept so their exit status can be polled
_DETACHED: dict[int, subprocess.Popen[bytes]] = {}


def _process_alive(pid: int) -> bool:
    if (process := _DETACHED.get(pid)) is not None:
        return process.poll() is None
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


def _detached_pid(run_root: Path) -> int | None:
    try:
        return int((run_root / RUN_PID_NAME).read_text(encoding="utf-8").strip())
    except (FileNotFoundError, ValueError):
        return None


def cmd_submit(args: argparse.Namespace) -> int:
    """Start ``run`` in a detached process and print the run directory."""
    spec = load_pipeline_spec(args.spec)
    if not Path(args.input).is_file():
        raise PlanningError(f"dataset {args.input} does not exist", error_key="dataset_missing")
    run_root = resolve_run_root(args, spec)
    if (run_root / EVENTS_FILE_NAME).exists() or (run_root / RUN_PID_NAME).exists():
        raise PlanningError(f"{run_root} already holds a run", error_key="run_root_in_use")
    run_root.mkdir(parents=True, exist_ok=True)
    with (run_root / RUN_LOG_NAME).open("ab") as log:
        process = subprocess.Popen(
            [sys.executable, "-m", "seqpipe", "run", *_forwarded_run_args(args, run_root)],
            stdin=subprocess.DEVNULL,
            stdout=log,
            stderr=subprocess.STDOUT,
            start_new_session=True,
        )
    _DETACHED[process.pid] = process
    (run_root / RUN_PID_NAME).write_text(f"{process.pid}\n", encoding="utf-8")
    LOGGER.info("Submitted run %s (pid %d)", run_root.name, process.pid)
    _emit([run_root])
    return EXIT_OK


def cmd_status(args: argparse.Namespace) -> int:
    """Print a run's diagnostics."""
    diagnostics = run_diagnostics(args.run_root)
    if args.json:
        sys.stdout.write(json.dumps(diagnostics, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(render_diagnostics_text(diagnostics))
    return EXIT_OK


def cmd_wait(args: argparse.Namespace) -> int:
    """
    Block until a run finishes; exit 1 if it failed or the wait timed out.

    A submitted run whose process has exited without a ``run_finished``
    event counts as failed.
    """
    deadline = time.monotonic() + args.timeout
    pid = _detached_pid(args.run_root)
    while True:
        # Liveness is read before the ledger
        alive = pid is None or _process_alive(pid)
        try:
            diagnostics = run_diagnostics(args.run_root)
        except SeqPipeError:
            # A freshly submitted run may not have written its first event yet
            diagnostics = None
        if diagnostics is not None and diagnostics["status"] != RUN_STATUS_RUNNING:
            sys.stdout.write(render_diagnostics_text(diagnostics))
            return EXIT_OK if diagnostics["status"] == RUN_STATUS_SUCCEEDED else EXIT_FAILURE
        if not alive:
            if diagnostics is not None:
                sys.stdout.write(render_diagnostics_text(diagnostics))
            LOGGER.error(
                "Run %s exited (pid %d) without finishing; see %s",
                args.run_root,
                pid,
                Path(args.run_root) / RUN_LOG_NAME,
            )
            return EXIT_FAILURE
        if time.monotonic() >= deadline:
            LOGGER.error("Run %s still running after %gs", args.run_root, args.timeout)
            return EXIT_FAILURE
        time.sleep(args.poll_interval)


def cmd_validate(args: argparse.Namespace) -> int:
    """Parse and validate a pipeline document."""
    spec = load_pipeline_spec(args.spec)
    sys.stdout.write(f"{spec.name}: {len(spec.stages)} stage(s) ({', '.join(spec.stage_ids)})\n")
    return EXIT_OK


# Simulation and reports


def cmd_simulate(args: argparse.Namespace) -> int:
    """Simulate a scenario; write trace, summary and report."""
    scenario = load_scenario(args.scenario)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.jitter is not None:
        overrides["service_time_jitter"] = args.jitter
    if overrides:
        scenario = dataclasses.replace(scenario, config=dataclasses.replace(scenario.config, **overrides))

    run = run_scenario(scenario)
    out_dir = Path(args.out)
    written = list(write_scenario_outputs(run, out_dir))

    metrics = metrics_from_trace(run.trace, scenario.requests, scenario.label_of)
    breakdown = median_breakdown([combine_runs(scenario.name, metrics)])
    written += write_run_report(
        metrics,
        breakdown,
        speedup_tables(group_by_tool(metrics)),
        out_dir,
        title=f"scenario {scenario.name}",
        stragglers=straggler_summary(run.trace, scenario.config),
    )
    _emit(written)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Breakdown and speedup report over finished runs."""
    metrics = [load_run_metrics(source) for source in args.runs]
    try:
        breakdown = median_breakdown(metrics)
    except MetricsError as exc:
        LOGGER.warning("No breakdown: %s", exc)
        breakdown = None
    speedups = []
    if len({run.core_count for run in metrics}) >= 2:
        speedups.append(speedup_table(metrics, label=args.title or "runs"))
    _emit(write_run_report(metrics, breakdown, speedups, args.out, title=args.title or ""))
    return EXIT_OK


# Data tools


def cmd_filter(args: argparse.Namespace) -> int:
    """Quality filter (and optional id mask) over a sequence file."""
    _ensure_writable([args.output])
    fmt = args.format or detect_format(args.input)
    records = read_sequence_file(args.input, fmt)
    if args.exclude_ids:
        exclude = [line.strip() for line in _read_lines(args.exclude_ids) if line.strip()]
        masked, missing = mask_records(records, exclude)
        if missing:
            LOGGER.warning("%d excluded id(s) not present in %s", len(missing), args.input)
        records = iter(masked)
    params = FilterParams(
        min_length=resolve_length_cutoff(args.min_length),
        min_mean_quality=args.min_quality,
        max_n_fraction=args.max_n,
    )
    kept, report = quality_filter(records, params)
    write_sequence_file(args.output, kept, fmt)
    LOGGER.info("Kept %d of %d record(s); rejected %s", report.kept, report.total, report.rejected)
    _emit([args.output])
    return EXIT_OK


def cmd_split(args: argparse.Namespace) -> int:
    """Split a sequence file into count-balanced partitions."""
    fmt = args.format or detect_format(args.input)
    suffix = args.input.suffix or (".fasta" if fmt == FORMAT_FASTA else ".fastq")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for partition in split_records(read_sequence_file(args.input, fmt), args.parts):
        path = args.out_dir / f"part_{partition.index}{suffix}"
        write_sequence_file(path, partition.records, fmt)
        written.append(path)
    _emit(written)
    return EXIT_OK


def cmd_merge(args: argparse.Namespace) -> int:
    """Merge partitions, given in index order, back into dataset order."""
    _ensure_writable([args.output])
    fmt = args.format or detect_format(args.parts[0])
    partitions = [read_partition(path, index, len(args.parts), fmt) for index, path in enumerate(args.parts)]
    write_sequence_file(args.output, merge_parts(partitions), fmt)
    _emit([args.output])
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    """Assign reads the LCA of their hits."""
    _ensure_writable([args.output])
    tree = build_taxonomy(read_taxonomy_tsv(_read_lines(args.taxonomy)))
    assignments = classify_reads(read_hits_tsv(_read_lines(args.hits)), tree, args.min_hits)
    with args.output.open("w", encoding="utf-8", newline="\n") as handle:
        write_assignments_tsv(assignments, handle)
    _emit([args.output])
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    """Render classification results as a taxonomic hierarchy."""
    _ensure_writable([args.output])
    tree = build_taxonomy(read_taxonomy_tsv(_read_lines(args.taxonomy)))
    counts = hierarchy_counts(read_assignments_tsv(_read_lines(args.assignments)), tree)
    text = dump_hierarchy_json(tree, counts) if args.format == "json" else render_hierarchy_text(tree, counts)
    args.output.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    _emit([args.output])
    return EXIT_OK


def _evidence_source(value: str) -> tuple[str, Path]:
    tool, separator, path = value.partition("=")
    if separator:
        return tool, Path(path)
    return Path(value).stem, Path(value)


def cmd_annotate(args: argparse.Namespace) -> int:
    """Merge gene predictions with evidence tables and export them."""
    _ensure_writable([args.output, args.jsonl])
    predictions = parse_gene_predictions(_read_lines(args.predictions))
    evidence_sets = []
    for value in args.evidence:
        tool, path = _evidence_source(value)
        evidence_sets.append(parse_evidence_table(_read_lines(path), tool))
    result = merge_annotations(predictions, evidence_sets)

    with args.output.open("w", encoding="utf-8", newline="\n") as handle:
        export_tsv(result.records, handle)
    written = [args.output]
    if args.jsonl:
        with args.jsonl.open("w", encoding="utf-8", newline="\n") as handle:
            export_metarep_jsonl(result.records, args.library or args.predictions.stem, handle)
        written.append(args.jsonl)
    _emit(written)
    return EXIT_OK


def cmd_demo(args: argparse.Namespace) -> int:
    """Write the demo dataset and pipeline."""
    dataset = write_demo_dataset(args.out, n_reads=args.reads, seed=args.seed)
    _emit([dataset.reads, dataset.taxonomy, dataset.pipeline])
    return EXIT_OK


__all__ = [
    "build_backend",
    "cmd_annotate",
    "cmd_classify",
    "cmd_demo",
    "cmd_export",
    "cmd_filter",
    "cmd_merge",
    "cmd_report",
    "cmd_run",
    "cmd_simulate",
    "cmd_split",
    "cmd_status",
    "cmd_submit",
    "cmd_validate",
    "cmd_wait",
    "resolve_run_root",
]
