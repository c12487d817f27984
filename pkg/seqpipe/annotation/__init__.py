"""Gene prediction and evidence merging, with TSV and JSONL exports."""

from __future__ import annotations

from .export import annotation_row, export_metarep_jsonl, export_tsv, metarep_document
from .merge import merge_annotations
from .models import AnnotationRecord, Evidence, GenePrediction, MergeResult
from .parsers import parse_evidence_table, parse_gene_predictions

__all__ = [
    "AnnotationRecord",
    "Evidence",
    "GenePrediction",
    "MergeResult",
    "annotation_row",
    "export_metarep_jsonl",
    "export_tsv",
    "merge_annotations",
    "metarep_document",
    "parse_evidence_table",
    "parse_gene_predictions",
]
