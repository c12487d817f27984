"""Read classification by LCA of hit taxa, and hierarchical count summaries."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from seqpipe.const import DEFAULT_MIN_HITS, LOGGER, UNCLASSIFIED
from seqpipe.exceptions import UnknownTaxonError
from seqpipe.taxonomy.tree import TaxonomyTree, lca


@dataclass(frozen=True, slots=True)
class TaxAssignment:
    """The taxon a read was classified to (or UNCLASSIFIED)."""

    read_id: str
    taxon: str
    n_hits: int

    @property
    def classified(self) -> bool:
        """Return True if the read was assigned a taxon."""
        return self.taxon != UNCLASSIFIED


@dataclass(frozen=True, slots=True)
class HierarchyCounts:
    """Per-node direct and subtree-cumulative read counts."""

    direct: Mapping[str, int]
    cumulative: Mapping[str, int]
    unclassified: int

    @property
    def classified(self) -> int:
        """Total number of classified reads."""
        return sum(self.direct.values())


def classify_reads(
    hits: Mapping[str, Sequence[str]],
    tree: TaxonomyTree,
    min_hits: int = DEFAULT_MIN_HITS,
) -> list[TaxAssignment]:
    """
    Assign each read the LCA of its hit taxa.

    Reads with fewer than ``min_hits`` hits stay UNCLASSIFIED. The hit count
    is the length of the read's hit list.

    Args:
        hits: Read id to the taxon ids of its hits.
        tree: Reference taxonomy.
        min_hits: Minimum number of hits for a classification.

    Returns:
        One assignment per read, sorted by read id.

    Raises:
        UnknownTaxonError: A hit names a taxon outside the tree.
        ValueError: ``min_hits`` is below 1.
    """
    if min_hits < 1:
        raise ValueError("min_hits must be >= 1")

    assignments: list[TaxAssignment] = []
    for read_id in sorted(hits):
        taxa = hits[read_id]
        for taxon in taxa:
            if taxon not in tree:
                raise UnknownTaxonError(
                    f"read {read_id}: unknown taxon id {taxon!r}",
                    placeholders={"read": read_id, "taxon": taxon},
                )
        if len(taxa) >= min_hits and taxa:
            assignments.append(TaxAssignment(read_id=read_id, taxon=lca(tree, taxa), n_hits=len(taxa)))
        else:
            assignments.append(TaxAssignment(read_id=read_id, taxon=UNCLASSIFIED, n_hits=len(taxa)))

    LOGGER.debug(
        "Classified %d of %d reads (min_hits=%d)",
        sum(1 for assignment in assignments if assignment.classified),
        len(assignments),
        min_hits,
    )
    return assignments


def hierarchy_counts(assignments: Iterable[TaxAssignment], tree: TaxonomyTree) -> HierarchyCounts:
    """
    Count reads per node, directly and over each node's subtree.

    Raises:
        UnknownTaxonError: An assignment names a taxon outside the tree.
    """
    direct = dict.fromkeys(tree.nodes, 0)
    unclassified = 0
    for assignment in assignments:
        if not assignment.classified:
            unclassified += 1
            continue
        tree.node(assignment.taxon)
        direct[assignment.taxon] += 1

    # Deepest nodes first, so every child is final before its parent adds it
    cumulative = dict(direct)
    for taxon in sorted(tree.nodes, key=lambda node: (-tree.depths[node], node)):
        parent = tree.nodes[taxon].parent
        if parent is not None:
            cumulative[parent] += cumulative[taxon]

    return HierarchyCounts(direct=direct, cumulative=cumulative, unclassified=unclassified)
