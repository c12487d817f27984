"""
Tab-separated taxonomy, hit and assignment files, and hierarchy renderings.

Formats:
    taxonomy:    ``child_id<TAB>parent_id<TAB>name<TAB>rank`` (root row: empty parent)
    hits:        ``read_id<TAB>taxon_id``, one row per hit
    assignments: ``read_id<TAB>taxon_id<TAB>n_hits``

Blank lines and ``#`` lines are skipped on input.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
import json
from typing import Any, TextIO

from seqpipe.exceptions import TableFormatError, TaxonomyError
from seqpipe.taxonomy.classify import HierarchyCounts, TaxAssignment
from seqpipe.taxonomy.tree import TaxonomyEdge, TaxonomyTree
from seqpipe.utils import read_tsv_rows, tsv_writer

ASSIGNMENTS_HEADER = ("#read_id", "taxon_id", "n_hits")


def _data_rows(lines: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    try:
        yield from read_tsv_rows(lines)
    except TableFormatError as exc:
        raise TaxonomyError(str(exc), error_key="taxonomy_table", placeholders={"line": exc.line}) from exc


def read_taxonomy_tsv(lines: Iterable[str]) -> list[TaxonomyEdge]:
    """Parse taxonomy rows into edges."""
    edges: list[TaxonomyEdge] = []
    for number, fields in _data_rows(lines):
        if len(fields) < 2 or not fields[0]:
            raise TaxonomyError(f"line {number}: expected child_id, parent_id, name, rank", error_key="taxonomy_row")
        fields += [""] * (4 - len(fields))
        edges.append(TaxonomyEdge(child=fields[0], parent=fields[1] or None, name=fields[2], rank=fields[3]))
    return edges


def read_hits_tsv(lines: Iterable[str]) -> dict[str, list[str]]:
    """Parse hit rows into read id -> taxon ids (file order kept)."""
    hits: dict[str, list[str]] = {}
    for number, fields in _data_rows(lines):
        if len(fields) < 2 or not fields[0] or not fields[1]:
            raise TaxonomyError(f"line {number}: expected read_id, taxon_id", error_key="hits_row")
        hits.setdefault(fields[0], []).append(fields[1])
    return hits


def write_assignments_tsv(assignments: Iterable[TaxAssignment], stream: TextIO) -> int:
    """Write assignments with a header line; returns the row count."""
    writer = tsv_writer(stream)
    writer.writerow(ASSIGNMENTS_HEADER)
    count = 0
    for assignment in assignments:
        writer.writerow([assignment.read_id, assignment.taxon, assignment.n_hits])
        count += 1
    return count


def read_assignments_tsv(lines: Iterable[str]) -> list[TaxAssignment]:
    """Parse an assignments file written by :func:`write_assignments_tsv`."""
    assignments: list[TaxAssignment] = []
    for number, fields in _data_rows(lines):
        if len(fields) != 3:
            raise TaxonomyError(f"line {number}: expected read_id, taxon_id, n_hits", error_key="assignments_row")
        try:
            n_hits = int(fields[2])
        except ValueError:
            raise TaxonomyError(
                f"line {number}: n_hits {fields[2]!r} is not an integer", error_key="assignments_row"
            ) from None
        assignments.append(TaxAssignment(read_id=fields[0], taxon=fields[1], n_hits=n_hits))
    return assignments


def render_hierarchy_text(tree: TaxonomyTree, counts: HierarchyCounts) -> str:
    """
    Render counts as an indented tree.

    Each line is ``name<TAB>direct<TAB>cumulative``, indented two spaces per
    depth; children are listed by id. The unclassified count follows the tree.
    """
    lines: list[str] = []
    stack = [tree.root]
    while stack:
        taxon = stack.pop()
        node = tree.nodes[taxon]
        indent = "  " * tree.depths[taxon]
        lines.append(f"{indent}{node.name}\t{counts.direct[taxon]}\t{counts.cumulative[taxon]}")
        stack.extend(reversed(tree.children[taxon]))
    lines.append(f"unclassified\t{counts.unclassified}\t{counts.unclassified}")
    return "\n".join(lines) + "\n"


def hierarchy_document(tree: TaxonomyTree, counts: HierarchyCounts) -> dict[str, Any]:
    """Return the counts as a nested mapping suitable for JSON."""

    def _node(taxon: str) -> dict[str, Any]:
        node = tree.nodes[taxon]
        return {
            "id": taxon,
            "name": node.name,
            "rank": node.rank,
            "direct": counts.direct[taxon],
            "cumulative": counts.cumulative[taxon],
            "children": [_node(child) for child in tree.children[taxon]],
        }

    return {"tree": _node(tree.root), "unclassified": counts.unclassified}


def dump_hierarchy_json(tree: TaxonomyTree, counts: HierarchyCounts) -> str:
    """Serialize :func:`hierarchy_document` deterministically."""
    return json.dumps(hierarchy_document(tree, counts), sort_keys=True, indent=2) + "\n"
