"""Invariant checks for parsed pipeline specs."""

from __future__ import annotations

from seqpipe.const import (
    FORMAT_FASTA,
    FORMAT_FASTQ,
    GATHER_ANNOTATIONS,
    GATHER_RECORDS,
    GATHER_ROWS,
    INPUT_DATASET,
    KNOWN_PLACEHOLDERS,
    MODE_SCATTER,
    MODE_SINGLE,
    PLACEHOLDER_OUTPUT,
    PLACEHOLDER_PART,
)
from seqpipe.pipeline.model import PipelineSpec, StageSpec, Violation
from seqpipe.utils import find_placeholders

GATHER_MODES = frozenset({GATHER_RECORDS, GATHER_ROWS, GATHER_ANNOTATIONS})
STAGE_MODES = frozenset({MODE_SINGLE, MODE_SCATTER})
SEQUENCE_FORMATS = frozenset({FORMAT_FASTA, FORMAT_FASTQ})


def validate_spec(spec: PipelineSpec) -> list[Violation]:
    """
    Check every pipeline and stage invariant.

    Validation is pure: templates are inspected as text and no path is
    touched on disk.

    Args:
        spec: The parsed pipeline.

    Returns:
        One violation per broken invariant; empty when the spec is valid.
    """
    violations: list[Violation] = []

    if not spec.stages:
        violations.append(Violation(None, "pipeline has no stages", "no_stages"))
        return violations

    all_ids = [stage.id for stage in spec.stages]
    seen: set[str] = set()
    reported_duplicates: set[str] = set()

    for position, stage in enumerate(spec.stages):
        if stage.id in seen and stage.id not in reported_duplicates:
            violations.append(Violation(stage.id, f"duplicate stage id '{stage.id}'", "duplicate_stage_id"))
            reported_duplicates.add(stage.id)

        # Linear order: inputs may only point backwards
        if stage.input != INPUT_DATASET and stage.input not in seen:
            if stage.input in all_ids[position:]:
                violations.append(
                    Violation(
                        stage.id,
                        f"input '{stage.input}' refers to a stage that runs later",
                        "input_not_earlier",
                    )
                )
            else:
                violations.append(Violation(stage.id, f"input '{stage.input}' is not a known stage", "input_unknown"))

        seen.add(stage.id)
        violations.extend(_validate_stage(stage))

    return violations


def _validate_stage(stage: StageSpec) -> list[Violation]:
    """Check the invariants local to one stage."""
    violations: list[Violation] = []

    if stage.mode not in STAGE_MODES:
        violations.append(Violation(stage.id, f"unknown mode '{stage.mode}'", "mode_unknown"))

    if stage.resources.cores < 1:
        violations.append(Violation(stage.id, "cores must be at least 1", "cores_below_one"))

    if stage.resources.base_time_s < 0:
        violations.append(Violation(stage.id, "base_time_s must not be negative", "base_time_negative"))

    if not stage.expected_outputs:
        violations.append(Violation(stage.id, "at least one output is required", "outputs_missing"))

    if stage.format is not None and stage.format not in SEQUENCE_FORMATS:
        violations.append(Violation(stage.id, f"unknown format '{stage.format}'", "format_unknown"))

    # Unknown placeholders fail here instead of at dispatch
    templates = [stage.command_template, *stage.expected_outputs]
    if stage.log_glob:
        templates.append(stage.log_glob)
    unknown = sorted({name for template in templates for name in find_placeholders(template)} - KNOWN_PLACEHOLDERS)
    if unknown:
        violations.append(
            Violation(stage.id, f"unknown placeholder(s): {', '.join(unknown)}", "placeholder_unknown")
        )

    if any(PLACEHOLDER_OUTPUT in find_placeholders(output) for output in stage.expected_outputs):
        violations.append(Violation(stage.id, "outputs must not reference {output}", "output_self_reference"))

    if stage.is_scatter:
        if PLACEHOLDER_PART not in find_placeholders(stage.command_template):
            violations.append(Violation(stage.id, "scatter command must use {part}", "scatter_command_no_part"))
        if any(PLACEHOLDER_PART not in find_placeholders(output) for output in stage.expected_outputs):
            violations.append(Violation(stage.id, "every scatter output must use {part}", "scatter_output_no_part"))
        if stage.gather not in GATHER_MODES:
            violations.append(Violation(stage.id, f"unknown gather mode '{stage.gather}'", "gather_unknown"))
    elif stage.is_single:
        if stage.gather is not None:
            violations.append(Violation(stage.id, "gather applies to scatter stages only", "gather_on_single"))
        if any(PLACEHOLDER_PART in find_placeholders(template) for template in templates):
            violations.append(Violation(stage.id, "single stages have no {part}", "single_uses_part"))

    return violations


__all__ = ["GATHER_MODES", "SEQUENCE_FORMATS", "STAGE_MODES", "validate_spec"]
