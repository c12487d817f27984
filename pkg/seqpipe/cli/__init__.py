"""
Command-line interface for seqpipe.

``dispatch`` parses ``argv``, runs one subcommand and maps its outcome to the
exit contract: 0 on success, 1 when a pipeline, stage or task failed (or a
wait timed out), 2 for usage, validation and input-format errors.
"""

from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
import logging
from pathlib import Path
import sys

import colorlog

from seqpipe.cli.commands import (
    cmd_annotate,
    cmd_classify,
    cmd_demo,
    cmd_export,
    cmd_filter,
    cmd_merge,
    cmd_report,
    cmd_run,
    cmd_simulate,
    cmd_split,
    cmd_status,
    cmd_submit,
    cmd_validate,
    cmd_wait,
)
from seqpipe.const import (
    DEFAULT_CORES,
    DEFAULT_MIN_HITS,
    DEFAULT_POLL_INTERVAL_S,
    DEFAULT_TASKS_PER_CORE,
    DEFAULT_WAIT_TIMEOUT_S,
    EXIT_FAILURE,
    EXIT_USAGE,
    FORMAT_FASTA,
    FORMAT_FASTQ,
    LOCAL_BACKEND_NAME,
    LOG_DATE_FORMAT,
    LOG_FORMAT,
    LOGGER,
    SIM_BACKEND_NAME,
    SIM_DEFAULT_USER,
)
from seqpipe.exceptions import (
    BackendUnavailableError,
    SeqPipeError,
    SpecValidationError,
    StageFailedError,
    WaitTimeoutError,
)

Handler = Callable[[argparse.Namespace], int]

# Errors meaning "the work failed" rather than "the request was wrong"
RUNTIME_ERRORS: tuple[type[SeqPipeError], ...] = (StageFailedError, WaitTimeoutError, BackendUnavailableError)


def setup_logging(verbosity: int = 0) -> None:
    """
    Attach a colored stderr handler to the package logger.

    ``verbosity`` > 0 selects DEBUG, < 0 WARNING, 0 INFO. Calling it again
    replaces the handler installed before.
    """
    handler = colorlog.StreamHandler(sys.stderr)
    handler.setFormatter(colorlog.ColoredFormatter("%(log_color)s" + LOG_FORMAT, datefmt=LOG_DATE_FORMAT))
    for existing in [h for h in LOGGER.handlers if isinstance(h.formatter, colorlog.ColoredFormatter)]:
        LOGGER.removeHandler(existing)
    LOGGER.addHandler(handler)
    if verbosity > 0:
        LOGGER.setLevel(logging.DEBUG)
    elif verbosity < 0:
        LOGGER.setLevel(logging.WARNING)
    else:
        LOGGER.setLevel(logging.INFO)


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return number


def _positive_float(value: str) -> float:
    number = float(value)
    if number <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return number


def _length_cutoff(value: str) -> int | str:
    return int(value) if value.lstrip("-").isdigit() else value


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", type=Path, required=True, help="pipeline document (YAML)")
    parser.add_argument("--input", type=Path, required=True, help="dataset the first stage reads")
    parser.add_argument("--backend", choices=(LOCAL_BACKEND_NAME, SIM_BACKEND_NAME), default=LOCAL_BACKEND_NAME)
    parser.add_argument("--cores", type=_positive_int, default=DEFAULT_CORES, help="core budget of every stage")
    parser.add_argument(
        "--tasks-per-core",
        type=_positive_int,
        default=DEFAULT_TASKS_PER_CORE,
        help="partitions per core for scatter stages",
    )
    parser.add_argument("--workers", type=_positive_int, help="local worker processes (default: cores or CPUs)")
    parser.add_argument("--scenario", help="cluster for the sim backend (scenario file or packaged name)")
    parser.add_argument("--poll-interval", type=_positive_float, default=DEFAULT_POLL_INTERVAL_S)
    parser.add_argument("--timeout", type=_positive_float, default=DEFAULT_WAIT_TIMEOUT_S)
    parser.add_argument("--user", default=SIM_DEFAULT_USER, help="user the jobs are submitted as")
    parser.add_argument("--run-root", type=Path, help="parent directory of run directories")
    parser.add_argument("--run-id", help="run directory name (default: pipeline name and UTC timestamp)")


def _add_format_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=(FORMAT_FASTA, FORMAT_FASTQ), help="default: inferred from the file")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with every subcommand."""
    parser = argparse.ArgumentParser(prog="seqpipe", description="Scatter-gather sequence analysis pipelines.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_const", const=1, dest="verbosity", default=0)
    verbosity.add_argument("-q", "--quiet", action="store_const", const=-1, dest="verbosity")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, handler: Handler, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, help=help_text, description=help_text)
        command.set_defaults(handler=handler)
        return command

    _add_run_arguments(add("run", cmd_run, "run a pipeline and wait for it"))
    _add_run_arguments(add("submit", cmd_submit, "start a pipeline run in the background"))

    status = add("status", cmd_status, "summarize a run directory")
    status.add_argument("--run-root", type=Path, required=True, help="run directory")
    status.add_argument("--json", action="store_true", help="print JSON instead of text")

    wait = add("wait", cmd_wait, "wait for a submitted run to finish")
    wait.add_argument("--run-root", type=Path, required=True, help="run directory")
    wait.add_argument("--poll-interval", type=_positive_float, default=1.0)
    wait.add_argument("--timeout", type=_positive_float, default=DEFAULT_WAIT_TIMEOUT_S)

    validate = add("validate", cmd_validate, "parse and validate a pipeline document")
    validate.add_argument("--spec", type=Path, required=True)

    simulate = add("simulate", cmd_simulate, "simulate a cluster scenario")
    simulate.add_argument("--scenario", required=True, help="scenario file or packaged name")
    simulate.add_argument("--out", type=Path, required=True, help="output directory")
    simulate.add_argument("--seed", type=int, help="override the scenario seed")
    simulate.add_argument("--jitter", type=float, help="override the scenario service-time jitter")

    report = add("report", cmd_report, "execution time breakdown and speedup over runs")
    report.add_argument("--runs", type=Path, nargs="+", required=True, help="run directories or metrics files")
    report.add_argument("--out", type=Path, required=True, help="output directory")
    report.add_argument("--title")

    filter_ = add("filter", cmd_filter, "quality filter a sequence file")
    filter_.add_argument("--input", type=Path, required=True)
    filter_.add_argument("--output", type=Path, required=True)
    _add_format_argument(filter_)
    filter_.add_argument("--exclude-ids", type=Path, help="file of record ids to drop, one per line")
    filter_.add_argument("--min-length", type=_length_cutoff, default=0, help="nucleotides, or small/medium/large")
    filter_.add_argument("--min-quality", type=float, default=0.0, help="minimum mean Phred score (FASTQ)")
    filter_.add_argument("--max-n", type=float, default=1.0, help="maximum fraction of N bases")

    split = add("split", cmd_split, "split a sequence file into partitions")
    split.add_argument("--input", type=Path, required=True)
    split.add_argument("--parts", type=_positive_int, required=True)
    split.add_argument("--out-dir", type=Path, required=True)
    _add_format_argument(split)

    merge = add("merge", cmd_merge, "merge partitions back into one file")
    merge.add_argument("--parts", type=Path, nargs="+", required=True, help="partition files in index order")
    merge.add_argument("--output", type=Path, required=True)
    _add_format_argument(merge)

    classify = add("classify", cmd_classify, "assign reads the LCA of their hits")
    classify.add_argument("--hits", type=Path, required=True, help="read_id<TAB>taxon_id rows")
    classify.add_argument("--taxonomy", type=Path, required=True, help="child<TAB>parent[<TAB>name<TAB>rank] rows")
    classify.add_argument("--output", type=Path, required=True)
    classify.add_argument("--min-hits", type=_positive_int, default=DEFAULT_MIN_HITS)

    export = add("export", cmd_export, "render assignments as a taxonomic hierarchy")
    export.add_argument("--assignments", type=Path, required=True)
    export.add_argument("--taxonomy", type=Path, required=True)
    export.add_argument("--format", choices=("text", "json"), default="text")
    export.add_argument("--output", type=Path, required=True)

    annotate = add("annotate", cmd_annotate, "merge gene predictions with tool evidence")
    annotate.add_argument("--predictions", type=Path, required=True)
    annotate.add_argument("--evidence", nargs="+", default=[], metavar="[TOOL=]PATH")
    annotate.add_argument("--output", type=Path, required=True, help="annotation TSV")
    annotate.add_argument("--jsonl", type=Path, help="also write Metarep-style JSONL")
    annotate.add_argument("--library", default="", help="library id for the JSONL export (default: predictions file stem)")

    demo = add("demo", cmd_demo, "write the synthetic demo dataset and pipeline")
    demo.add_argument("--out", type=Path, required=True)
    demo.add_argument("--reads", type=_positive_int, default=1000)
    demo.add_argument("--seed", type=int, default=7)
    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, usage errors exit 2
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    setup_logging(args.verbosity)
    try:
        return args.handler(args)
    except SpecValidationError as exc:
        for violation in exc.violations:
            sys.stderr.write(f"{violation.stage_id or '<pipeline>'}: {violation.message}\n")
        return EXIT_USAGE
    except RUNTIME_ERRORS as exc:
        LOGGER.error("%s", exc)
        return EXIT_FAILURE
    except (SeqPipeError, ValueError, FileNotFoundError) as exc:
        LOGGER.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        LOGGER.error("%s", exc)
        return EXIT_FAILURE


def main() -> None:
    """Console script entry point."""
    sys.exit(dispatch())


__all__ = ["build_parser", "dispatch", "main", "setup_logging"]
