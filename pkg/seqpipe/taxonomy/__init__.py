"""Taxonomy trees, LCA read classification and hierarchical (Krona-style) counts."""

from __future__ import annotations

from .classify import HierarchyCounts, TaxAssignment, classify_reads, hierarchy_counts
from .io import (
    dump_hierarchy_json,
    hierarchy_document,
    read_assignments_tsv,
    read_hits_tsv,
    read_taxonomy_tsv,
    render_hierarchy_text,
    write_assignments_tsv,
)
from .tree import TaxonNode, TaxonomyEdge, TaxonomyTree, build_taxonomy, lca

__all__ = [
    "HierarchyCounts",
    "TaxAssignment",
    "TaxonNode",
    "TaxonomyEdge",
    "TaxonomyTree",
    "build_taxonomy",
    "classify_reads",
    "dump_hierarchy_json",
    "hierarchy_counts",
    "hierarchy_document",
    "lca",
    "read_assignments_tsv",
    "read_hits_tsv",
    "read_taxonomy_tsv",
    "render_hierarchy_text",
    "write_assignments_tsv",
]
