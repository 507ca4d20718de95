"""PROV-JSON parsing/serialization: round-trips, determinism, diagnostics."""

import json
import random

import pytest

import provlint as pl
from provlint.errors import (
    MalformedJsonError,
    MissingEndpointKeyError,
    UndeclaredPrefixError,
)
from provlint.model import ElementKind, RelationKind
from provlint.provjson import RELATION_ENDPOINT_KEYS

from docgen import PREFIX_MAP, random_document


def test_minimal_entity_document():
    doc, diags = pl.parse('{"prefix":{"ex":"http://www.example.org/"},"entity":{"ex:train_data":{}}}')
    assert diags == []
    assert doc.get(ElementKind.ENTITY, "ex:train_data") is not None
    assert doc.prefixes == {"ex": "http://www.example.org/"}


def test_malformed_json():
    with pytest.raises(MalformedJsonError):
        pl.parse("{")
    with pytest.raises(MalformedJsonError):
        pl.parse("[1,2]")
    with pytest.raises(MalformedJsonError):
        pl.parse(b"\xff\xfe")


def test_typed_decimal_attribute_keeps_lexical_form():
    text = json.dumps({
        "prefix": {"ex": "u"},
        "activity": {"ex:run": {
            "execution_start_time": {"$": "1760554649.3482456", "type": "xsd:decimal"}
        }},
    })
    doc, _ = pl.parse(text)
    run = doc.get(ElementKind.ACTIVITY, "ex:run")
    value = run.attributes.first("execution_start_time")
    assert value == pl.Literal("1760554649.3482456", pl.qname("xsd:decimal"))


def test_bare_number_becomes_decimal_literal():
    doc, _ = pl.parse('{"prefix":{"ex":"u"},"entity":{"ex:e":{"ex:t":1760554649.3482456}}}')
    value = doc.get(ElementKind.ENTITY, "ex:e").attributes.first("ex:t")
    assert value == pl.Literal("1760554649.3482456", pl.qname("xsd:decimal"))


def test_activity_times_decimal_and_iso():
    text = json.dumps({
        "prefix": {"ex": "u"},
        "activity": {
            "ex:a": {"prov:startTime": "1760554649.3482456", "prov:endTime": "1760554687.6064146"},
            "ex:b": {"prov:startTime": "1970-01-01T00:00:01Z"},
        },
    })
    doc, _ = pl.parse(text)
    assert doc.get(ElementKind.ACTIVITY, "ex:a").start_time == 1760554649348245600
    assert doc.get(ElementKind.ACTIVITY, "ex:b").start_time == 10**9


def test_empty_document_canonical_bytes():
    assert pl.serialize(pl.ProvDocument()) == b'{"prefix":{}}'


def test_linreg_round_trip(linreg_doc):
    again, diags = pl.parse(pl.serialize(linreg_doc))
    assert diags == []
    assert again == linreg_doc


def test_random_round_trips_and_idempotence():
    rng = random.Random(11)
    for _ in range(100):
        doc = random_document(rng)
        data = pl.serialize(doc)
        parsed, diags = pl.parse(data)
        assert diags == []
        assert parsed == doc
        assert pl.serialize(parsed) == data


def test_all_relation_kinds_round_trip():
    doc = pl.ProvDocument(dict(PREFIX_MAP))
    doc.entity("ex:e1")
    doc.entity("ex:e2")
    doc.activity("ex:a1")
    doc.activity("ex:a2")
    doc.agent("ex:g1")
    doc.agent("ex:g2")
    endpoints = {
        RelationKind.USED: ("ex:a1", "ex:e1"),
        RelationKind.WAS_GENERATED_BY: ("ex:e1", "ex:a1"),
        RelationKind.WAS_ASSOCIATED_WITH: ("ex:a1", "ex:g1"),
        RelationKind.WAS_ATTRIBUTED_TO: ("ex:e1", "ex:g1"),
        RelationKind.WAS_DERIVED_FROM: ("ex:e2", "ex:e1"),
        RelationKind.WAS_INFORMED_BY: ("ex:a2", "ex:a1"),
        RelationKind.ACTED_ON_BEHALF_OF: ("ex:g2", "ex:g1"),
    }
    for kind, (s, o) in endpoints.items():
        doc.relate(kind, s, o)
    again, _ = pl.parse(pl.serialize(doc))
    assert again == doc
    payload = json.loads(pl.serialize(doc))
    for kind, (s, o) in endpoints.items():
        skey, okey = RELATION_ENDPOINT_KEYS[kind]
        (entry,) = payload[kind.value].values()
        assert entry[skey] == s and entry[okey] == o


def test_duplicate_keys_last_wins_with_diagnostic():
    text = '{"prefix":{"ex":"u"},"entity":{"ex:e":{"ex:k":"first","ex:k":"second"}}}'
    doc, diags = pl.parse(text)
    assert doc.get(ElementKind.ENTITY, "ex:e").attributes.get_all("ex:k") == ["second"]
    assert any(d.code == "duplicate-key" for d in diags)


def test_unknown_top_level_key():
    text = '{"prefix":{},"bundle":{}}'
    _, diags = pl.parse(text)
    assert [d.code for d in diags] == ["unknown-section"]
    assert diags[0].severity is pl.Severity.WARNING
    _, strict_diags = pl.parse(text, strict=True)
    assert strict_diags[0].severity is pl.Severity.ERROR


def test_missing_endpoint_key():
    text = '{"prefix":{"ex":"u"},"used":{"_:r0":{"prov:activity":"ex:a"}}}'
    doc, diags = pl.parse(text)
    assert doc.relations == []
    assert [d.code for d in diags] == ["skipped-entry"]
    with pytest.raises(MissingEndpointKeyError):
        pl.parse(text, strict=True)


def test_lossless_diagnostics_accounting():
    # parsed entries + skipped entries == JSON entries
    text = json.dumps({
        "prefix": {"ex": "u"},
        "entity": {"ex:ok": {}, "ex:bad": "not-an-object"},
        "used": {
            "_:r0": {"prov:activity": "ex:a", "prov:entity": "ex:ok"},
            "_:r1": {"prov:activity": "ex:a"},
        },
    })
    doc, diags = pl.parse(text)
    parsed = len(list(doc.elements())) + len(doc.relations)
    skipped = sum(1 for d in diags if d.code == "skipped-entry")
    assert parsed + skipped == 4


def test_strict_undeclared_prefix_raises_nonstrict_tolerates():
    text = '{"prefix":{},"entity":{"ghost:e":{}}}'
    doc, _ = pl.parse(text)
    assert doc.get(ElementKind.ENTITY, "ghost:e") is not None
    assert pl.has_errors(doc.validate())
    with pytest.raises(UndeclaredPrefixError):
        pl.parse(text, strict=True)


def test_builtin_prefixes_need_no_declaration():
    text = '{"prefix":{"ex":"u"},"entity":{"ex:e":{"prov:type":{"$":"ex:Thing","type":"prov:QUALIFIED_NAME"}}}}'
    doc, diags = pl.parse(text, strict=True)
    assert diags == []
    assert doc.validate(strict=True) == []


def test_bom_is_tolerated_with_warning():
    doc, diags = pl.parse("﻿" + '{"prefix":{}}')
    assert doc == pl.ProvDocument()
    assert [d.code for d in diags] == ["byte-order-mark"]


def test_multivalued_attribute_round_trip():
    doc = pl.ProvDocument({"ex": "u"})
    doc.entity("ex:sel", [("ex:feature", "age"), ("ex:feature", "education")])
    payload = json.loads(pl.serialize(doc))
    assert payload["entity"]["ex:sel"]["ex:feature"] == ["age", "education"]
    again, _ = pl.parse(pl.serialize(doc))
    assert again == doc


def test_serialize_deterministic_across_runs(linreg_doc, tmp_path):
    from conftest import build_linreg_run

    other = build_linreg_run(tmp_path / "other_runs")
    assert pl.serialize(other) == pl.serialize(linreg_doc)
