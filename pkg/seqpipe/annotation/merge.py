"""Conjoin predicted genes with their functional evidence."""

from __future__ import annotations

from collections.abc import Iterable

from seqpipe.annotation.models import AnnotationRecord, Evidence, GenePrediction, MergeResult
from seqpipe.const import LOGGER
from seqpipe.exceptions import DuplicateGeneError


def merge_annotations(
    predictions: Iterable[GenePrediction],
    evidence_sets: Iterable[Iterable[Evidence]],
) -> MergeResult:
    """
    Build one annotation record per predicted gene.

    The output does not depend on how predictions and evidence were split
    across tools or scatter parts: records are ordered by (contig, start,
    gene id) and evidence by its rank key.

    Args:
        predictions: Gene predictions from all parts.
        evidence_sets: Evidence lists from every tool and every part.

    Returns:
        The records and, separately, evidence for genes that were never predicted.

    Raises:
        DuplicateGeneError: The same gene id was predicted twice, which means
            the scatter parts overlapped.
    """
    by_gene: dict[str, GenePrediction] = {}
    for prediction in predictions:
        if prediction.gene_id in by_gene:
            raise DuplicateGeneError(f"gene {prediction.gene_id} predicted more than once across parts")
        by_gene[prediction.gene_id] = prediction

    grouped: dict[str, list[Evidence]] = {gene_id: [] for gene_id in by_gene}
    orphans: list[Evidence] = []
    for evidence_set in evidence_sets:
        for evidence in evidence_set:
            if evidence.gene_id in grouped:
                grouped[evidence.gene_id].append(evidence)
            else:
                orphans.append(evidence)

    records = tuple(
        AnnotationRecord(
            prediction=prediction,
            evidences=tuple(sorted(grouped[prediction.gene_id], key=lambda evidence: evidence.sort_key)),
        )
        for prediction in sorted(by_gene.values(), key=lambda prediction: prediction.sort_key)
    )

    if orphans:
        LOGGER.warning(
            "%d evidence row(s) reference genes that were not predicted, e.g. %s from %s",
            len(orphans),
            orphans[0].gene_id,
            orphans[0].tool,
        )

    return MergeResult(
        records=records,
        orphans=tuple(sorted(orphans, key=lambda evidence: (evidence.gene_id, *evidence.sort_key))),
    )
