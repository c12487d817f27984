"""
Rooted taxonomy tree and least-common-ancestor queries.

The tree is built once from an edge list and never changes; depths are
precomputed so an LCA query walks each member up to the shared depth and
then climbs both paths together.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

from seqpipe.exceptions import TaxonomyError, UnknownTaxonError

ROOT_RANK = "root"


@dataclass(frozen=True, slots=True)
class TaxonNode:
    """A taxon in the tree."""

    id: str
    name: str
    parent: str | None
    rank: str


@dataclass(frozen=True, slots=True)
class TaxonomyEdge:
    """One row of a taxonomy edge list; ``parent`` is None for the root."""

    child: str
    parent: str | None
    name: str = ""
    rank: str = ""


@dataclass(frozen=True)
class TaxonomyTree:
    """An immutable rooted tree of taxa."""

    nodes: Mapping[str, TaxonNode]
    root: str
    depths: Mapping[str, int]
    children: Mapping[str, tuple[str, ...]] = field(repr=False)

    def __contains__(self, taxon: object) -> bool:
        """Return True if the taxon id is part of the tree."""
        return taxon in self.nodes

    def __len__(self) -> int:
        """Return the number of nodes."""
        return len(self.nodes)

    def node(self, taxon: str) -> TaxonNode:
        """Return a node, raising UnknownTaxonError for unknown ids."""
        try:
            return self.nodes[taxon]
        except KeyError:
            raise UnknownTaxonError(f"unknown taxon id {taxon!r}", placeholders={"taxon": taxon}) from None

    def depth(self, taxon: str) -> int:
        """Distance from the root (root has depth 0)."""
        self.node(taxon)
        return self.depths[taxon]

    def parent(self, taxon: str) -> str | None:
        """Parent id, None for the root."""
        return self.node(taxon).parent

    def lineage(self, taxon: str) -> list[str]:
        """Ids on the path from the root down to ``taxon``, both included."""
        path = [taxon]
        current = self.node(taxon).parent
        while current is not None:
            path.append(current)
            current = self.nodes[current].parent
        path.reverse()
        return path

    def subtree(self, taxon: str) -> list[str]:
        """Ids of ``taxon`` and all its descendants, breadth first."""
        self.node(taxon)
        found: list[str] = []
        queue = deque([taxon])
        while queue:
            current = queue.popleft()
            found.append(current)
            queue.extend(self.children[current])
        return found


def build_taxonomy(edges: Iterable[TaxonomyEdge | tuple[str, str | None, str, str] | tuple[str, str | None]]) -> TaxonomyTree:
    """
    Build and validate a taxonomy from (child, parent, name, rank) rows.

    A parent id that never appears as a child becomes the root when it is the
    only candidate, so ``[(A, root), (B, root)]`` yields three nodes.

    Raises:
        TaxonomyError: Empty edge list, duplicate child id, cycle, orphan
            (parent never defined) or more than one root.
    """
    nodes: dict[str, TaxonNode] = {}
    for raw in edges:
        edge = raw if isinstance(raw, TaxonomyEdge) else TaxonomyEdge(*raw)
        parent = edge.parent or None
        if edge.child in nodes:
            raise TaxonomyError(f"duplicate taxon id {edge.child!r}", error_key="taxonomy_duplicate")
        if parent == edge.child:
            raise TaxonomyError(f"taxon {edge.child!r} is its own parent", error_key="taxonomy_cycle")
        nodes[edge.child] = TaxonNode(id=edge.child, name=edge.name or edge.child, parent=parent, rank=edge.rank)

    if not nodes:
        raise TaxonomyError("taxonomy edge list is empty", error_key="taxonomy_empty")

    explicit_roots = sorted(taxon for taxon, node in nodes.items() if node.parent is None)
    undefined_parents = sorted({node.parent for node in nodes.values() if node.parent and node.parent not in nodes})

    if explicit_roots and undefined_parents:
        raise TaxonomyError(
            f"orphan: parent id {undefined_parents[0]!r} is never defined",
            error_key="taxonomy_orphan",
            placeholders={"parent": undefined_parents[0]},
        )
    if len(explicit_roots) > 1 or len(undefined_parents) > 1:
        roots = explicit_roots or undefined_parents
        raise TaxonomyError(
            f"multiple roots: {', '.join(roots)}",
            error_key="taxonomy_multiple_roots",
            placeholders={"roots": roots},
        )
    if not explicit_roots and not undefined_parents:
        raise TaxonomyError("no root: every taxon has a parent, so the edges contain a cycle", error_key="taxonomy_cycle")

    if undefined_parents:
        root = undefined_parents[0]
        nodes[root] = TaxonNode(id=root, name=root, parent=None, rank=ROOT_RANK)
    else:
        root = explicit_roots[0]

    child_lists: dict[str, list[str]] = {taxon: [] for taxon in nodes}
    for taxon, node in nodes.items():
        if node.parent is not None:
            child_lists[node.parent].append(taxon)

    depths: dict[str, int] = {root: 0}
    queue = deque([root])
    while queue:
        current = queue.popleft()
        for child in child_lists[current]:
            depths[child] = depths[current] + 1
            queue.append(child)

    if len(depths) != len(nodes):
        unreached = sorted(set(nodes) - set(depths))
        raise TaxonomyError(
            f"cycle among taxa: {', '.join(unreached)}",
            error_key="taxonomy_cycle",
            placeholders={"taxa": unreached},
        )

    children = {taxon: tuple(sorted(kids)) for taxon, kids in child_lists.items()}
    return TaxonomyTree(
        nodes=MappingProxyType(nodes),
        root=root,
        depths=MappingProxyType(depths),
        children=MappingProxyType(children),
    )


def lca(tree: TaxonomyTree, taxa: Iterable[str]) -> str:
    """
    Return the deepest node that is an ancestor-or-self of every given taxon.

    Raises:
        TaxonomyError: The set is empty.
        UnknownTaxonError: A taxon is not in the tree.
    """
    members = set(taxa)
    if not members:
        raise TaxonomyError("lca of an empty set is undefined", error_key="taxonomy_empty_query")

    ordered = sorted(members)
    for taxon in ordered:
        tree.node(taxon)

    ancestor = ordered[0]
    for taxon in ordered[1:]:
        ancestor = _pair_lca(tree, ancestor, taxon)
        if ancestor == tree.root:
            break
    return ancestor


def _pair_lca(tree: TaxonomyTree, first: str, second: str) -> str:
    depths = tree.depths
    nodes = tree.nodes
    while depths[first] > depths[second]:
        first = nodes[first].parent  # type: ignore[assignment]
    while depths[second] > depths[first]:
        second = nodes[second].parent  # type: ignore[assignment]
    while first != second:
        first = nodes[first].parent  # type: ignore[assignment]
        second = nodes[second].parent  # type: ignore[assignment]
    return first
