"""
Parsers for gene prediction and evidence tables.

Both are tab-separated; blank lines and ``#`` lines are skipped.

    predictions: ``gene_id  contig_id  start  end  strand``
    evidence:    ``gene_id  subject_id  score  evalue  [description]``
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
import math

from seqpipe.annotation.models import STRAND_FORWARD, STRAND_REVERSE, Evidence, GenePrediction
from seqpipe.exceptions import AnnotationFormatError, DuplicateGeneError, TableFormatError
from seqpipe.utils import read_tsv_rows

# Typographic minus is accepted as reverse strand
_STRANDS = {STRAND_FORWARD: STRAND_FORWARD, STRAND_REVERSE: STRAND_REVERSE, "−": STRAND_REVERSE}


def _rows(lines: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    try:
        yield from read_tsv_rows(lines)
    except TableFormatError as exc:
        raise AnnotationFormatError(exc.detail, line=exc.line) from exc


def _parse_int(value: str, field: str, number: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise AnnotationFormatError(f"{field} {value!r} is not an integer", line=number) from None


def _parse_float(value: str, field: str, number: int) -> float:
    try:
        parsed = float(value)
    except ValueError:
        raise AnnotationFormatError(f"{field} {value!r} is not a number", line=number) from None
    if not math.isfinite(parsed):
        raise AnnotationFormatError(f"{field} {value!r} is not finite", line=number)
    return parsed


def parse_gene_predictions(lines: Iterable[str]) -> list[GenePrediction]:
    """
    Parse a gene prediction table.

    Raises:
        AnnotationFormatError: Wrong column count, bad coordinates or strand.
        DuplicateGeneError: A gene id appears twice.
    """
    predictions: list[GenePrediction] = []
    seen: set[str] = set()
    for number, fields in _rows(lines):
        if len(fields) != 5:
            raise AnnotationFormatError(f"expected 5 columns, got {len(fields)}", line=number)
        gene_id, contig_id, start_text, end_text, strand_text = (field.strip() for field in fields)
        if not gene_id or not contig_id:
            raise AnnotationFormatError("gene_id and contig_id must not be empty", line=number)
        start = _parse_int(start_text, "start", number)
        end = _parse_int(end_text, "end", number)
        if start < 1:
            raise AnnotationFormatError(f"start {start} is below 1", line=number)
        if end < start:
            raise AnnotationFormatError(f"end {end} is before start {start}", line=number, error_key="annotation_coordinates")
        if strand_text not in _STRANDS:
            raise AnnotationFormatError(f"strand {strand_text!r} is not + or -", line=number)
        if gene_id in seen:
            raise DuplicateGeneError(f"duplicate gene id {gene_id}", line=number)
        seen.add(gene_id)
        predictions.append(
            GenePrediction(gene_id=gene_id, contig_id=contig_id, start=start, end=end, strand=_STRANDS[strand_text])
        )
    return predictions


def parse_evidence_table(lines: Iterable[str], tool: str) -> list[Evidence]:
    """
    Parse one tool's evidence table, stamping ``tool`` on every row.

    Rows for genes that are not predicted are kept; the merge reports them.

    Raises:
        AnnotationFormatError: Wrong column count, bad numbers or negative e-value.
        ValueError: ``tool`` is empty.
    """
    if not tool or not tool.strip():
        raise ValueError("tool must not be empty")

    evidences: list[Evidence] = []
    for number, fields in _rows(lines):
        if len(fields) < 4:
            raise AnnotationFormatError(f"expected at least 4 columns, got {len(fields)}", line=number)
        # Description may itself contain tabs; everything after evalue belongs to it
        description = " ".join(field.strip() for field in fields[4:]) if len(fields) > 4 else ""
        evalue = _parse_float(fields[3].strip(), "evalue", number)
        if evalue < 0:
            raise AnnotationFormatError(f"evalue {evalue!r} is negative", line=number, error_key="annotation_negative_evalue")
        evidences.append(
            Evidence(
                gene_id=fields[0].strip(),
                tool=tool,
                subject_id=fields[1].strip(),
                score=_parse_float(fields[2].strip(), "score", number),
                evalue=evalue,
                description=description,
            )
        )
    return evidences
