"""Pipeline and stage definitions."""

from __future__ import annotations

from dataclasses import dataclass, field

from seqpipe.const import DEFAULT_BASE_TIME_S, DEFAULT_CORES, MODE_SCATTER, MODE_SINGLE


@dataclass(frozen=True, slots=True)
class StageResources:
    """Resources a stage asks for."""

    cores: int = DEFAULT_CORES
    # Synthetic per-task service time; only the simulator backend reads it
    base_time_s: float = DEFAULT_BASE_TIME_S


@dataclass(frozen=True, slots=True)
class StageSpec:
    """
    One step of a pipeline.

    Attributes:
        id: Unique stage identifier, also the stage's directory name in a run.
        mode: ``single`` (one task) or ``scatter`` (one task per input partition).
        command_template: Shell command with ``{input}``, ``{output}``, ``{part}``
            and ``{workdir}`` placeholders.
        expected_outputs: Path templates that must exist after a successful task.
        log_glob: Optional glob template for tool logs scanned for error patterns.
        resources: Requested cores and base service time.
        input: ``dataset`` or the id of an earlier stage whose first output feeds this one.
        gather: How scatter outputs are combined (``records``, ``rows``, ``annotations``).
        format: Partition file format (``fasta``/``fastq``); None infers it from the input.
    """

    id: str
    mode: str
    command_template: str
    expected_outputs: tuple[str, ...]
    input: str
    log_glob: str | None = None
    resources: StageResources = field(default_factory=StageResources)
    gather: str | None = None
    format: str | None = None

    @property
    def is_scatter(self) -> bool:
        """Return True for scatter stages."""
        return self.mode == MODE_SCATTER

    @property
    def is_single(self) -> bool:
        """Return True for single-task stages."""
        return self.mode == MODE_SINGLE


@dataclass(frozen=True, slots=True)
class PipelineSpec:
    """An ordered chain of stages."""

    name: str
    stages: tuple[StageSpec, ...]
    workdir_root: str | None = None

    def stage(self, stage_id: str) -> StageSpec:
        """Return the stage with the given id."""
        for stage in self.stages:
            if stage.id == stage_id:
                return stage
        raise KeyError(stage_id)

    @property
    def stage_ids(self) -> list[str]:
        """Stage ids in execution order."""
        return [stage.id for stage in self.stages]


@dataclass(frozen=True, slots=True)
class Violation:
    """A broken pipeline invariant."""

    stage_id: str | None
    message: str
    key: str
