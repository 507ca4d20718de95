"""Lineage graph and reachability, checked against a brute-force closure."""

import random

import pytest

import provlint as pl
from provlint.errors import UnknownIdError
from provlint.model import RelationKind

from docgen import floyd_warshall_closure, random_document


def chain_doc() -> pl.ProvDocument:
    doc = pl.ProvDocument({"ex": "http://www.example.org/"})
    doc.entity("ex:model")
    doc.activity("ex:run")
    doc.entity("ex:dataset")
    doc.relate(RelationKind.WAS_GENERATED_BY, "ex:model", "ex:run")
    doc.relate(RelationKind.USED, "ex:run", "ex:dataset")
    return doc


def test_two_edge_chain():
    graph = pl.lineage_graph(chain_doc())
    assert ("ex:model", "ex:run", "wasGeneratedBy") in graph.edges
    assert ("ex:run", "ex:dataset", "used") in graph.edges
    assert pl.reachable(chain_doc(), "ex:model") == {"ex:model", "ex:run", "ex:dataset"}


def test_empty_document():
    graph = pl.lineage_graph(pl.ProvDocument())
    assert graph.nodes == set()
    assert graph.edges == []


def test_edges_match_relation_enumeration():
    # edge set must equal a direct per-relation enumeration
    rng = random.Random(20)
    doc = random_document(rng, max_elements=20)
    graph = pl.lineage_graph(doc)
    lineage = {"used", "wasGeneratedBy", "wasDerivedFrom", "wasInformedBy"}
    expected = [
        (str(r.subject), str(r.object), r.kind.value)
        for r in doc.relations
        if r.kind.value in lineage
    ]
    assert graph.edges == expected


def test_one_edge_per_lineage_relation_even_duplicates():
    doc = chain_doc()
    doc.relate(RelationKind.WAS_GENERATED_BY, "ex:model", "ex:run")  # duplicate edge
    assert len(pl.lineage_graph(doc).edges) == 3


def test_annotation_relations_are_not_lineage_edges():
    doc = chain_doc()
    doc.agent("ex:analyst")
    doc.relate(RelationKind.WAS_ASSOCIATED_WITH, "ex:run", "ex:analyst")
    doc.relate(RelationKind.WAS_ATTRIBUTED_TO, "ex:model", "ex:analyst")
    graph = pl.lineage_graph(doc)
    assert len(graph.edges) == 2
    assert len(graph.annotations) == 2
    assert "ex:analyst" not in pl.reachable(doc, "ex:model")


def test_reachable_isolated_node():
    doc = pl.ProvDocument({"ex": "u"})
    doc.entity("ex:x")
    assert pl.reachable(doc, "ex:x") == {"ex:x"}


def test_reachable_unknown_id():
    with pytest.raises(UnknownIdError):
        pl.reachable(pl.ProvDocument(), "ex:ghost")


def test_reachable_matches_brute_force_closure():
    rng = random.Random(99)
    for _ in range(200):
        doc = random_document(rng, max_elements=12)
        closure = floyd_warshall_closure(doc)
        for node in doc.element_ids():
            assert pl.reachable(doc, node) == closure[node]


def test_reachability_is_monotone():
    rng = random.Random(4)
    for _ in range(50):
        doc = random_document(rng, max_elements=10)
        before = {n: pl.reachable(doc, n) for n in doc.element_ids()}
        entities = [e for e in doc.elements(pl.ElementKind.ENTITY)]
        if len(entities) < 2:
            continue
        a, b = rng.sample(entities, 2)
        doc.relate(RelationKind.WAS_DERIVED_FROM, a.id, b.id)
        after = {n: pl.reachable(doc, n) for n in before}
        for node in before:
            assert before[node] <= after[node]
