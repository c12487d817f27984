"""
Combine the outputs of a scatter stage's parts.

``part_outputs[k][i]`` is part ``k``'s file for the stage's ``i``-th expected
output. Gathered files land in the stage directory under the output
template's name with the ``{part}`` placeholder removed.
"""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from seqpipe.annotation import (
    Evidence,
    GenePrediction,
    export_metarep_jsonl,
    export_tsv,
    merge_annotations,
    parse_evidence_table,
    parse_gene_predictions,
)
from seqpipe.const import (
    ANNOTATIONS_JSONL_NAME,
    ANNOTATIONS_TSV_NAME,
    GATHER_ANNOTATIONS,
    GATHER_RECORDS,
    GATHER_ROWS,
    LOGGER,
)
from seqpipe.exceptions import PartitionError, PlanningError
from seqpipe.pipeline.model import StageSpec
from seqpipe.seqdata import (
    Partition,
    SequenceRecord,
    detect_format,
    expected_partition_size,
    merge_parts,
    read_sequence_file,
    write_sequence_file,
)
from seqpipe.utils import gathered_name


def _read_records(path: Path, fmt: str | None) -> list[SequenceRecord]:
    if path.stat().st_size == 0:
        return []
    return list(read_sequence_file(path, fmt))


def _output_format(stage: StageSpec, paths: Sequence[Path], fallback: str) -> str:
    if stage.format:
        return stage.format
    for path in paths:
        if path.stat().st_size > 0:
            return detect_format(path)
    return fallback


def gather_records(
    stage: StageSpec,
    part_outputs: Sequence[Sequence[Path]],
    stage_dir: Path,
    input_path: Path,
    input_format: str,
) -> list[Path]:
    """
    Merge sequence outputs back into dataset order.

    When every part emits exactly as many records as it received, the parts
    are interleaved with :func:`merge_parts`. Tools that drop records (filters)
    produce subsequences; those are restored to the order the records had in
    the stage input.

    Raises:
        PartitionError: A part emitted a record id that was not in the stage input.
    """
    n_parts = len(part_outputs)
    input_ids: list[str] = [record.id for record in read_sequence_file(input_path, input_format)]
    gathered: list[Path] = []

    for index, template in enumerate(stage.expected_outputs):
        paths = [outputs[index] for outputs in part_outputs]
        fmt = _output_format(stage, paths, input_format)
        parts = [
            Partition(index=k, n_parts=n_parts, records=tuple(_read_records(path, fmt))) for k, path in enumerate(paths)
        ]

        if all(
            len(part.records) == expected_partition_size(len(input_ids), n_parts, part.index) for part in parts
        ):
            records = merge_parts(parts)
        else:
            position = {record_id: offset for offset, record_id in enumerate(input_ids)}
            flat = [record for part in parts for record in part.records]
            unknown = [record.id for record in flat if record.id not in position]
            if unknown:
                raise PartitionError(
                    f"stage {stage.id}: record {unknown[0]} is not in the stage input",
                    error_key="partition_unknown_record",
                )
            records = sorted(flat, key=lambda record: position[record.id])

        target = stage_dir / gathered_name(template)
        write_sequence_file(target, records, fmt)
        gathered.append(target)
    return gathered


def gather_rows(stage: StageSpec, part_outputs: Sequence[Sequence[Path]], stage_dir: Path) -> list[Path]:
    """
    Concatenate tab-separated outputs.

    Leading ``#`` lines of the first part that has any are kept as the header;
    data rows of all parts are sorted, so the result does not depend on how
    the input was split.
    """
    gathered: list[Path] = []
    for index, template in enumerate(stage.expected_outputs):
        header: list[str] = []
        rows: list[str] = []
        for outputs in part_outputs:
            lines = outputs[index].read_text(encoding="utf-8").splitlines()
            leading = 0
            while leading < len(lines) and lines[leading].startswith("#"):
                leading += 1
            if not header:
                header = lines[:leading]
            rows.extend(line for line in lines[leading:] if line.strip())
        target = stage_dir / gathered_name(template)
        target.write_text("".join(f"{line}\n" for line in [*header, *sorted(rows)]), encoding="utf-8")
        gathered.append(target)
    return gathered


def gather_annotations(
    stage: StageSpec,
    part_outputs: Sequence[Sequence[Path]],
    stage_dir: Path,
    library_id: str,
) -> list[Path]:
    """
    Merge gene predictions (first output) with evidence tables (other outputs).

    Each evidence output's tool name is its gathered file stem, so
    ``blast_{part}.tsv`` contributes evidence from ``blast``.

    Returns:
        The TSV and JSONL exports.
    """
    predictions: list[GenePrediction] = []
    evidence_sets: list[list[Evidence]] = []
    tools = [Path(gathered_name(template)).stem for template in stage.expected_outputs[1:]]

    for outputs in part_outputs:
        with outputs[0].open(encoding="utf-8") as handle:
            predictions.extend(parse_gene_predictions(handle))
        for tool, path in zip(tools, outputs[1:], strict=True):
            with path.open(encoding="utf-8") as handle:
                evidence_sets.append(parse_evidence_table(handle, tool))

    result = merge_annotations(predictions, evidence_sets)
    tsv_path = stage_dir / ANNOTATIONS_TSV_NAME
    jsonl_path = stage_dir / ANNOTATIONS_JSONL_NAME
    with tsv_path.open("w", encoding="utf-8", newline="\n") as handle:
        export_tsv(result.records, handle)
    with jsonl_path.open("w", encoding="utf-8", newline="\n") as handle:
        export_metarep_jsonl(result.records, library_id, handle)
    LOGGER.info(
        "Stage %s: %d annotated gene(s), %d orphan evidence row(s)", stage.id, len(result.records), len(result.orphans)
    )
    return [tsv_path, jsonl_path]


def gather_stage_outputs(
    stage: StageSpec,
    part_outputs: Sequence[Sequence[Path]],
    stage_dir: Path,
    *,
    input_path: Path,
    input_format: str,
    library_id: str,
) -> list[Path]:
    """
    Gather a scatter stage with its configured mode.

    Raises:
        PlanningError: Unknown gather mode.
    """
    if stage.gather == GATHER_RECORDS:
        return gather_records(stage, part_outputs, stage_dir, input_path, input_format)
    if stage.gather == GATHER_ROWS:
        return gather_rows(stage, part_outputs, stage_dir)
    if stage.gather == GATHER_ANNOTATIONS:
        return gather_annotations(stage, part_outputs, stage_dir, library_id)
    raise PlanningError(f"stage {stage.id}: unknown gather mode {stage.gather!r}", error_key="gather_unknown")
