"""Graphviz DOT rendering of a document.

Follows the usual PROV diagram convention: entities are yellow ellipses,
activities blue boxes, agents orange houses. Node statements are emitted
sorted by (kind, id); edges follow relation insertion order and are
labeled with the relation kind. Output is a pure function of the document.
"""

from __future__ import annotations

from .model import Element, ElementKind, ProvDocument, sort_key

_PREAMBLE = (
    "  rankdir=BT;",
    '  node [fontname="Helvetica" fontsize=11];',
    '  edge [fontname="Helvetica" fontsize=9];',
)

_NODE_STYLE = {
    ElementKind.ENTITY: 'shape=ellipse style=filled fillcolor="#FFFC87"',
    ElementKind.ACTIVITY: 'shape=box style=filled fillcolor="#9FB1FC"',
    ElementKind.AGENT: 'shape=house style=filled fillcolor="#FED37F"',
}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _node(element: Element) -> str:
    return f"  {_quote(str(element.id))} [{_NODE_STYLE[element.kind]}];"


def export_dot(doc: ProvDocument) -> str:
    lines = ["digraph prov {", *_PREAMBLE]
    for element in sorted(doc.elements(), key=sort_key):
        lines.append(_node(element))
    for rel in doc.relations:
        lines.append(
            f"  {_quote(str(rel.subject))} -> {_quote(str(rel.object))} "
            f"[label={_quote(rel.kind.value)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
