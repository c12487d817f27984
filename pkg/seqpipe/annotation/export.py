"""
Annotation exports.

Two formats: a tab-separated table (one row per gene) and a JSON-lines file
in the shape a Metarep-style metagenomics browser ingests. The exact field
set of that browser is not public; the document below is a stand-in that
keeps the id, library, common name, hit ids, e-values and tools.
"""

from __future__ import annotations

from collections.abc import Iterable
import json
from typing import Any, TextIO

from seqpipe.annotation.models import AnnotationRecord
from seqpipe.const import ANNOTATION_TSV_COLUMNS, UNKNOWN_COMMON_NAME
from seqpipe.utils import tsv_writer

DESCRIPTION_SEPARATOR = ";"


def _cell(value: str) -> str:
    return value.replace("\t", " ").replace("\n", " ")


def format_evalue(value: float) -> str:
    """Shortest string that round-trips the e-value."""
    return repr(float(value))


def annotation_row(record: AnnotationRecord) -> list[str]:
    """Return the TSV cells for one record, in column order."""
    prediction = record.prediction
    best = record.best
    descriptions = DESCRIPTION_SEPARATOR.join(
        _cell(evidence.description) for evidence in record.evidences if evidence.description
    )
    return [
        prediction.gene_id,
        prediction.contig_id,
        str(prediction.start),
        str(prediction.end),
        prediction.strand,
        str(len(record.evidences)),
        best.tool if best else "",
        best.subject_id if best else "",
        format_evalue(best.evalue) if best else "",
        descriptions,
    ]


def export_tsv(records: Iterable[AnnotationRecord], stream: TextIO) -> int:
    """
    Write records as a tab-separated table with a ``#`` header.

    Genes without evidence get ``n_evidence`` 0 and empty best-hit cells.

    Returns:
        Number of rows written.
    """
    writer = tsv_writer(stream)
    writer.writerow(["#" + ANNOTATION_TSV_COLUMNS[0], *ANNOTATION_TSV_COLUMNS[1:]])
    count = 0
    for record in records:
        writer.writerow(annotation_row(record))
        count += 1
    return count


def metarep_document(record: AnnotationRecord, library_id: str) -> dict[str, Any]:
    """Build the JSON document for one record."""
    best = record.best
    common_name = best.description if best and best.description else UNKNOWN_COMMON_NAME
    return {
        "id": record.prediction.gene_id,
        "library": library_id,
        "common_name": common_name,
        "hit_ids": [evidence.subject_id for evidence in record.evidences],
        "evalues": [evidence.evalue for evidence in record.evidences],
        "tools": [evidence.tool for evidence in record.evidences],
    }


def export_metarep_jsonl(records: Iterable[AnnotationRecord], library_id: str, stream: TextIO) -> int:
    """
    Write one JSON document per line, keys sorted.

    Returns:
        Number of documents written.

    Raises:
        ValueError: ``library_id`` is empty.
    """
    if not library_id:
        raise ValueError("library_id must not be empty")
    count = 0
    for record in records:
        stream.write(json.dumps(metarep_document(record, library_id), sort_keys=True) + "\n")
        count += 1
    return count
