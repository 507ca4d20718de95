"""Lineage graph construction and reachability.

Edges are oriented derived -> source, so walking forward from an artifact
answers "what did this come from". Only the four derivation-flavored
relation kinds become lineage edges; attribution, association, and
delegation ride along as annotations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import UnknownIdError
from .model import ProvDocument, QualifiedName, RelationKind

LINEAGE_KINDS = frozenset(
    {
        RelationKind.USED,
        RelationKind.WAS_GENERATED_BY,
        RelationKind.WAS_DERIVED_FROM,
        RelationKind.WAS_INFORMED_BY,
    }
)


@dataclass
class LineageGraph:
    nodes: set[str] = field(default_factory=set)
    edges: list[tuple[str, str, str]] = field(default_factory=list)  # src, dst, kind
    annotations: list[tuple[str, str, str]] = field(default_factory=list)
    _adjacency: dict[str, list[str]] = field(default_factory=dict)

    def add_edge(self, src: str, dst: str, kind: str) -> None:
        self.nodes.add(src)
        self.nodes.add(dst)
        self.edges.append((src, dst, kind))
        self._adjacency.setdefault(src, []).append(dst)

    def reachable_from(self, start: str) -> set[str]:
        seen = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for succ in self._adjacency.get(node, ()):
                if succ not in seen:
                    seen.add(succ)
                    queue.append(succ)
        return seen


def lineage_graph(doc: ProvDocument) -> LineageGraph:
    """Directed graph over element ids; one edge per lineage relation."""
    graph = LineageGraph()
    graph.nodes.update(doc.element_ids())
    for rel in doc.relations:
        src, dst = str(rel.subject), str(rel.object)
        if rel.kind in LINEAGE_KINDS:
            graph.add_edge(src, dst, rel.kind.value)
        else:
            graph.annotations.append((src, dst, rel.kind.value))
    return graph


def reachable(doc: ProvDocument, from_id: "str | QualifiedName") -> set[str]:
    """Ids reachable from ``from_id`` along lineage edges, including itself."""
    start = str(from_id)
    if not doc.has_id(start):
        raise UnknownIdError(f"no element with id {start}")
    return lineage_graph(doc).reachable_from(start)
