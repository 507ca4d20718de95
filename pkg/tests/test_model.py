"""Document model: elements, relations, attributes, timestamps, validation."""

import pytest

import provlint as pl
from provlint.diagnostics import Severity, has_errors
from provlint.errors import (
    DuplicateIdError,
    KindMismatchError,
    UndeclaredPrefixError,
)
from provlint.model import (
    Attributes,
    ElementKind,
    RelationKind,
    canonical_decimal,
    coerce_value,
    format_timestamp,
    parse_timestamp,
)


def make_doc() -> pl.ProvDocument:
    return pl.ProvDocument({"ex": "http://www.example.org/"})


class TestQualifiedName:
    def test_parse_prefixed(self):
        q = pl.qname("mlprov:Dataset")
        assert (q.prefix, q.local) == ("mlprov", "Dataset")
        assert str(q) == "mlprov:Dataset"

    def test_default_namespace(self):
        q = pl.qname("execution_start_time")
        assert (q.prefix, q.local) == ("", "execution_start_time")
        assert str(q) == "execution_start_time"

    def test_empty_local_rejected(self):
        with pytest.raises(ValueError):
            pl.QualifiedName("ex", "")


class TestAddElement:
    def test_singleton_insert(self):
        doc = make_doc()
        doc.entity("ex:e1")
        assert doc.get(ElementKind.ENTITY, "ex:e1") is not None
        assert len(list(doc.elements())) == 1

    def test_duplicate_id(self):
        doc = make_doc()
        doc.entity("ex:e1")
        with pytest.raises(DuplicateIdError):
            doc.entity("ex:e1")

    def test_same_id_different_kind_allowed(self):
        doc = make_doc()
        doc.entity("ex:x")
        doc.activity("ex:x")
        assert len(doc.find("ex:x")) == 2

    def test_experiment_name_attribute_retrievable(self):
        # the run-activity attribute layout used by tracker logs
        doc = make_doc()
        doc.add_prefix("yProv4ML", "http://tracker.example.org/ns#")
        doc.activity("ex:run0", {"yProv4ML:experiment_name": "linear_regression_GR0_0"})
        run = doc.get(ElementKind.ACTIVITY, "ex:run0")
        assert run.attributes.first("yProv4ML:experiment_name") == "linear_regression_GR0_0"

    def test_undeclared_prefix(self):
        doc = make_doc()
        with pytest.raises(UndeclaredPrefixError):
            doc.entity("nope:e1")


class TestAddRelation:
    def test_canonical_edge(self):
        doc = make_doc()
        doc.entity("ex:model")
        doc.activity("ex:run")
        rel = doc.relate(RelationKind.WAS_GENERATED_BY, "ex:model", "ex:run")
        assert doc.relations == [rel]

    def test_kind_mismatch_strict(self):
        doc = make_doc()
        doc.entity("ex:d")
        doc.entity("ex:e")
        with pytest.raises(KindMismatchError):
            doc.relate(RelationKind.USED, "ex:d", "ex:e", strict=True)
        # non-strict records it; validate reports later
        doc.relate(RelationKind.USED, "ex:d", "ex:e")
        assert len(doc.relations) == 1

    def test_blank_ids_deterministic(self):
        doc = make_doc()
        doc.entity("ex:e")
        doc.activity("ex:a")
        for _ in range(3):
            doc.relate(RelationKind.USED, "ex:a", "ex:e")
        assert [str(r.id) for r in doc.relations] == ["_:r0", "_:r1", "_:r2"]


class TestAttributes:
    def test_multimap_preserves_insertion_order(self):
        attrs = Attributes()
        attrs.add("ex:feature", "age")
        attrs.add("ex:feature", "education")
        assert attrs.get_all("ex:feature") == ["age", "education"]

    def test_equality_is_order_insensitive_per_key(self):
        a = Attributes([("ex:k", "1"), ("ex:j", "x"), ("ex:k", "2")])
        b = Attributes([("ex:j", "x"), ("ex:k", "2"), ("ex:k", "1")])
        c = Attributes([("ex:k", "1"), ("ex:j", "x")])
        assert a == b
        assert a != c

    def test_coercion(self):
        assert coerce_value("s") == "s"
        assert coerce_value(3) == pl.Literal("3", pl.qname("xsd:decimal"))
        assert coerce_value(2.5) == pl.Literal("2.5", pl.qname("xsd:decimal"))
        assert coerce_value(True) == pl.Literal("true", pl.qname("xsd:boolean"))
        with pytest.raises(ValueError):
            coerce_value(float("nan"))


class TestTimestamps:
    def test_decimal_seconds_round_trip(self):
        ns = parse_timestamp("1760554649.3482456")
        assert ns == 1760554649348245600
        assert format_timestamp(ns) == "1760554649.3482456"

    def test_integer_seconds(self):
        assert format_timestamp(parse_timestamp("1760554649")) == "1760554649"

    def test_iso_8601(self):
        assert parse_timestamp("1970-01-01T00:00:01Z") == 10**9
        assert parse_timestamp("1970-01-01T00:00:01.5+00:00") == 1_500_000_000

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_timestamp("yesterday")

    def test_times_only_on_activities(self):
        with pytest.raises(ValueError):
            pl.Element(pl.qname("ex:e"), ElementKind.ENTITY, Attributes(), 0, 1)


class TestCanonicalDecimal:
    @pytest.mark.parametrize(
        "text,expected",
        [("2.50", "2.5"), ("1E+2", "100"), ("-0", "0"), ("0.125", "0.125"),
         ("1760554649.3482456", "1760554649.3482456"), ("007", "7")],
    )
    def test_canonical(self, text, expected):
        assert canonical_decimal(text) == expected

    def test_non_numbers(self):
        assert canonical_decimal("training") is None
        assert canonical_decimal("NaN") is None
        assert canonical_decimal("Infinity") is None


class TestValidate:
    def test_builder_document_is_clean(self, linreg_doc):
        assert linreg_doc.validate(strict=True) == []

    def test_dangling_reference(self):
        doc = make_doc()
        doc.entity("ex:model")
        doc.relate(RelationKind.WAS_GENERATED_BY, "ex:model", "ex:missing_run")
        loose = doc.validate(strict=False)
        assert [d.code for d in loose] == ["dangling-reference"]
        assert not has_errors(loose)
        strict = doc.validate(strict=True)
        assert has_errors(strict)

    def test_time_order_flags_swapped_times(self):
        doc = make_doc()
        doc.activity(
            "ex:run",
            start_time=parse_timestamp("1760554687.6064146"),
            end_time=parse_timestamp("1760554649.3482456"),
        )
        diags = doc.validate()
        assert [d.code for d in diags] == ["time-order"]
        assert diags[0].severity is Severity.ERROR

    def test_undeclared_prefix_in_attribute(self):
        doc = make_doc()
        e = doc.entity("ex:e")
        e.attributes.add(pl.QualifiedName("ghost", "k"), "v")
        diags = doc.validate()
        assert [d.code for d in diags] == ["undeclared-prefix"]

    def test_invalid_numeric_literal(self):
        doc = make_doc()
        doc.entity("ex:e", {"ex:n": pl.Literal("not-a-number", pl.qname("xsd:decimal"))})
        assert [d.code for d in doc.validate()] == ["invalid-literal"]

    def test_kind_mismatch_severity_depends_on_strictness(self):
        doc = make_doc()
        doc.entity("ex:d")
        doc.entity("ex:e")
        doc.relate(RelationKind.USED, "ex:d", "ex:e")
        assert not has_errors(doc.validate(strict=False))
        assert has_errors(doc.validate(strict=True))

    def test_validate_empty_implies_resolvable(self, linreg_doc):
        # no diagnostics means every endpoint resolves and every prefix is known
        for rel in linreg_doc.relations:
            assert linreg_doc.find(rel.subject)
            assert linreg_doc.find(rel.object)
            assert linreg_doc.declares(rel.subject.prefix)
