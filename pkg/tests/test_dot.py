"""DOT export: fixed preamble, ordering, quoting, golden file."""

import provlint as pl
from provlint.model import RelationKind

from conftest import GOLDEN_DIR

EMPTY = """digraph prov {
  rankdir=BT;
  node [fontname="Helvetica" fontsize=11];
  edge [fontname="Helvetica" fontsize=9];
}
"""


def test_empty_document_is_preamble_only():
    assert pl.export_dot(pl.ProvDocument()) == EMPTY


def test_single_entity_one_node_statement():
    doc = pl.ProvDocument({"ex": "u"})
    doc.entity("ex:e1")
    out = pl.export_dot(doc)
    node_lines = [l for l in out.splitlines() if "shape=" in l]
    assert node_lines == ['  "ex:e1" [shape=ellipse style=filled fillcolor="#FFFC87"];']


def test_kind_styles_and_ordering():
    doc = pl.ProvDocument({"ex": "u"})
    doc.agent("ex:who")
    doc.activity("ex:did")
    doc.entity("ex:what")
    lines = [l for l in pl.export_dot(doc).splitlines() if "shape=" in l]
    assert "ellipse" in lines[0] and "ex:what" in lines[0]
    assert "box" in lines[1] and "ex:did" in lines[1]
    assert "house" in lines[2] and "ex:who" in lines[2]


def test_edges_labeled_by_kind_in_insertion_order():
    doc = pl.ProvDocument({"ex": "u"})
    doc.entity("ex:m")
    doc.activity("ex:r")
    doc.relate(RelationKind.WAS_GENERATED_BY, "ex:m", "ex:r")
    out = pl.export_dot(doc)
    assert '  "ex:m" -> "ex:r" [label="wasGeneratedBy"];' in out


def test_quoting_escapes_embedded_quotes():
    doc = pl.ProvDocument({"ex": "u"})
    doc.entity(pl.QualifiedName("ex", 'we"ird'))
    assert '"ex:we\\"ird"' in pl.export_dot(doc)


def test_export_is_pure():
    doc = pl.ProvDocument({"ex": "u"})
    doc.entity("ex:e")
    assert pl.export_dot(doc) == pl.export_dot(doc)


def test_linreg_golden_file(linreg_doc):
    golden = (GOLDEN_DIR / "linreg.dot").read_text(encoding="utf-8")
    assert pl.export_dot(linreg_doc) == golden


def test_linreg_provjson_golden_bytes(linreg_doc):
    golden = (GOLDEN_DIR / "linreg.provjson").read_bytes()
    assert pl.serialize(linreg_doc) == golden
