"""
Exceptions for seqpipe.

Every error carries an ``error_key`` (a stable identifier callers can branch on)
and the ``placeholders`` used to render its message, so the CLI and the run
ledger can report failures without parsing message text.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from seqpipe.executor.task import FailureReason
    from seqpipe.pipeline.model import Violation


class SeqPipeError(Exception):
    """Base class for all seqpipe errors."""

    error_key = "seqpipe_error"

    def __init__(
        self,
        message: str,
        *,
        error_key: str | None = None,
        placeholders: Mapping[str, Any] | None = None,
    ) -> None:
        """Initialize the error with a message and optional key/placeholders."""
        super().__init__(message)
        if error_key is not None:
            self.error_key = error_key
        self.placeholders: dict[str, Any] = dict(placeholders or {})


class ConfigError(SeqPipeError):
    """A config document could not be parsed or does not match its schema."""

    error_key = "config_error"

    def __init__(
        self,
        message: str,
        *,
        line: int | None = None,
        column: int | None = None,
        error_key: str | None = None,
    ) -> None:
        """Initialize with an optional 1-based source position."""
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message, error_key=error_key, placeholders={"line": line, "column": column})
        self.line = line
        self.column = column


class SpecValidationError(SeqPipeError):
    """A pipeline spec violates one or more invariants."""

    error_key = "spec_invalid"

    def __init__(self, violations: Sequence[Violation]) -> None:
        """Initialize from the list of violations."""
        rendered = "; ".join(f"{v.stage_id or '<pipeline>'}: {v.message}" for v in violations)
        super().__init__(f"Invalid pipeline spec: {rendered}", placeholders={"count": len(violations)})
        self.violations = list(violations)


class SequenceFormatError(SeqPipeError):
    """A FASTA/FASTQ stream is malformed."""

    error_key = "sequence_malformed"

    def __init__(self, message: str, *, line: int | None = None, error_key: str | None = None) -> None:
        """Initialize with the offending 1-based line number."""
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, error_key=error_key, placeholders={"line": line})
        self.line = line


class DuplicateRecordError(SequenceFormatError):
    """A record id occurs twice in one dataset."""

    error_key = "sequence_duplicate_id"


class PartitionError(SeqPipeError):
    """Partitions cannot be split or merged as requested."""

    error_key = "partition_error"


class TableFormatError(SeqPipeError):
    """A row of a tab-separated table cannot be read."""

    error_key = "table_malformed"

    def __init__(self, message: str, *, line: int | None = None) -> None:
        """Initialize with the offending 1-based line number."""
        self.detail = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, placeholders={"line": line})
        self.line = line


class TaxonomyError(SeqPipeError):
    """A taxonomy edge list does not form a rooted tree."""

    error_key = "taxonomy_invalid"


class UnknownTaxonError(TaxonomyError):
    """A taxon id is not part of the tree."""

    error_key = "taxonomy_unknown_taxon"


class AnnotationFormatError(SeqPipeError):
    """A gene prediction or evidence table is malformed."""

    error_key = "annotation_malformed"

    def __init__(self, message: str, *, line: int | None = None, error_key: str | None = None) -> None:
        """Initialize with the offending 1-based line number."""
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, error_key=error_key, placeholders={"line": line})
        self.line = line


class DuplicateGeneError(AnnotationFormatError):
    """A gene id occurs more than once across predictions."""

    error_key = "annotation_duplicate_gene"


class PlanningError(SeqPipeError):
    """A stage cannot be turned into tasks."""

    error_key = "planning_error"


class TaskStateError(SeqPipeError):
    """A task was asked to make a transition its state machine forbids."""

    error_key = "task_invalid_transition"


class CapacityError(SeqPipeError):
    """A job requests more cores than the backend has."""

    error_key = "capacity_exceeded"


class BackendUnavailableError(SeqPipeError):
    """The execution backend cannot be reached."""

    error_key = "backend_unavailable"


class WaitTimeoutError(SeqPipeError):
    """Tasks were still running when the wait deadline passed."""

    error_key = "wait_timeout"

    def __init__(self, pending: Sequence[str], timeout: float) -> None:
        """Initialize with the ids of the tasks that never reached a terminal state."""
        super().__init__(
            f"Timed out after {timeout:g}s waiting for {len(pending)} task(s): {', '.join(pending)}",
            placeholders={"timeout": timeout, "pending": list(pending)},
        )
        self.pending = list(pending)
        self.timeout = timeout


class StageFailedError(SeqPipeError):
    """A pipeline stage had failed tasks; later stages were not run."""

    error_key = "stage_failed"

    def __init__(self, stage_id: str, failures: Mapping[str, FailureReason], result: Any = None) -> None:
        """Initialize with the stage id, task failures and the partial run result."""
        rendered = ", ".join(f"{task_id} ({reason.kind})" for task_id, reason in sorted(failures.items()))
        super().__init__(
            f"Stage {stage_id} failed: {rendered}",
            placeholders={"stage": stage_id, "failed": sorted(failures)},
        )
        self.stage_id = stage_id
        self.failures = dict(failures)
        self.result = result


class ScenarioError(ConfigError):
    """A simulator scenario is invalid."""

    error_key = "scenario_invalid"


class SimulationError(SeqPipeError):
    """A simulation trace cannot answer the question asked of it."""

    error_key = "simulation_error"


class MetricsError(SeqPipeError):
    """Metrics cannot be summarized as requested."""

    error_key = "metrics_error"


__all__ = [
    "AnnotationFormatError",
    "BackendUnavailableError",
    "CapacityError",
    "ConfigError",
    "DuplicateGeneError",
    "DuplicateRecordError",
    "MetricsError",
    "PartitionError",
    "PlanningError",
    "ScenarioError",
    "SeqPipeError",
    "SequenceFormatError",
    "SimulationError",
    "SpecValidationError",
    "StageFailedError",
    "TableFormatError",
    "TaskStateError",
    "TaxonomyError",
    "UnknownTaxonError",
    "WaitTimeoutError",
]
