"""In-memory PROV document model and structural validation.

The model covers the three starting-point classes (Entity, Activity, Agent),
their attributes, and the seven relations among them. Design points that
matter to callers:

* Attribute maps are ordered multimaps: one key may carry several values,
  insertion order is preserved, and equality is order-insensitive per key.
* Activity timestamps are normalized to integer epoch nanoseconds. Input
  accepts either decimal epoch seconds ("1760554649.3482456") or ISO-8601.
* ``validate`` never raises; it returns :class:`Diagnostic` objects whose
  severity depends on the requested strictness. Dangling relation endpoints
  and endpoint-kind mismatches are warnings in non-strict mode (real logs
  are imperfect) and errors in strict mode; undeclared prefixes, reversed
  activity times, and non-finite numeric literals are always errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Union

from .diagnostics import Diagnostic, Severity
from .errors import (
    DuplicateIdError,
    KindMismatchError,
    UndeclaredPrefixError,
    UnknownIdError,
)

# Prefixes every document may use without declaring them. They are never
# serialized; "_" is the blank namespace used for auto-assigned relation ids.
BUILTIN_PREFIXES = {
    "prov": "http://www.w3.org/ns/prov#",
    "xsd": "http://www.w3.org/2001/XMLSchema#",
    "_": "urn:blank:",
}


@dataclass(frozen=True)
class QualifiedName:
    """A prefixed identifier; an empty prefix means the default namespace."""

    prefix: str
    local: str

    def __post_init__(self):
        if not self.local:
            raise ValueError("qualified name needs a non-empty local part")

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}" if self.prefix else self.local

    @classmethod
    def parse(cls, text: str) -> "QualifiedName":
        prefix, sep, local = text.partition(":")
        if not sep:
            return cls("", text)
        return cls(prefix, local)


def qname(text: "str | QualifiedName") -> QualifiedName:
    """Coerce a ``prefix:local`` string (or pass a QualifiedName through)."""
    if isinstance(text, QualifiedName):
        return text
    return QualifiedName.parse(text)


@dataclass(frozen=True)
class Literal:
    """A typed literal value: lexical form plus datatype."""

    lexical: str
    datatype: QualifiedName


AttrValue = Union[str, Literal, QualifiedName]

XSD_DECIMAL = QualifiedName("xsd", "decimal")
XSD_BOOLEAN = QualifiedName("xsd", "boolean")
PROV_QUALIFIED_NAME = QualifiedName("prov", "QUALIFIED_NAME")
PROV_TYPE = QualifiedName("prov", "type")

# xsd datatypes whose lexical forms must parse as finite numbers.
NUMERIC_DATATYPE_LOCALS = frozenset(
    {"decimal", "double", "float", "integer", "int", "long", "short", "byte",
     "nonNegativeInteger", "unsignedInt", "unsignedLong"}
)


def is_numeric_datatype(datatype: QualifiedName) -> bool:
    return datatype.prefix == "xsd" and datatype.local in NUMERIC_DATATYPE_LOCALS


def canonical_decimal(text: str) -> str | None:
    """Canonical plain-decimal rendering of ``text``, or None if not a finite number.

    "2.50" -> "2.5", "1E+2" -> "100", "-0" -> "0". Used both for literal
    validation and for lexical comparison in the requirement evaluator.
    """
    try:
        d = Decimal(text)
    except (InvalidOperation, ValueError):
        return None
    if not d.is_finite():
        return None
    if d == 0:
        return "0"
    return format(d.normalize(), "f")


def coerce_value(value) -> AttrValue:
    """Turn a plain Python value into an attribute value.

    Strings stay plain strings; bools become xsd:boolean literals; ints,
    floats and Decimals become xsd:decimal literals with a canonical
    lexical form. Literal/QualifiedName pass through.
    """
    if isinstance(value, (Literal, QualifiedName)):
        return value
    if isinstance(value, bool):
        return Literal("true" if value else "false", XSD_BOOLEAN)
    if isinstance(value, int):
        return Literal(str(value), XSD_DECIMAL)
    if isinstance(value, float):
        canon = canonical_decimal(repr(value))
        if canon is None:
            raise ValueError(f"non-finite number not representable: {value!r}")
        return Literal(canon, XSD_DECIMAL)
    if isinstance(value, Decimal):
        canon = canonical_decimal(str(value))
        if canon is None:
            raise ValueError(f"non-finite number not representable: {value!r}")
        return Literal(canon, XSD_DECIMAL)
    if isinstance(value, str):
        return value
    raise TypeError(f"unsupported attribute value type: {type(value).__name__}")


# --- timestamps ---------------------------------------------------------------

_DECIMAL_SECONDS_RE = re.compile(r"^[+-]?\d+(\.\d+)?$")
_ISO_RE = re.compile(
    r"^(?P<head>\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2})?)?)"
    r"(\.(?P<frac>\d+))?(?P<tz>[+-]\d{2}:\d{2})?$"
)
_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def parse_timestamp(text: str) -> int:
    """Parse decimal epoch seconds or ISO-8601 into epoch nanoseconds."""
    text = text.strip()
    if _DECIMAL_SECONDS_RE.match(text):
        ns = (Decimal(text) * 10**9).quantize(Decimal(1))
        return int(ns)
    # fromisoformat on 3.10 is picky about fraction widths; split it off
    iso = text[:-1] + "+00:00" if text.endswith("Z") else text
    match = _ISO_RE.match(iso)
    if not match:
        raise ValueError(f"not a timestamp: {text!r}")
    try:
        dt = datetime.fromisoformat(match["head"] + (match["tz"] or ""))
    except ValueError as exc:
        raise ValueError(f"not a timestamp: {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    delta = dt - _EPOCH
    seconds = delta.days * 86400 + delta.seconds
    frac_ns = int((match["frac"] or "0")[:9].ljust(9, "0"))
    return seconds * 10**9 + delta.microseconds * 1000 + frac_ns


def format_timestamp(ns: int) -> str:
    """Render epoch nanoseconds as canonical decimal seconds."""
    sign = "-" if ns < 0 else ""
    seconds, frac = divmod(abs(ns), 10**9)
    if frac == 0:
        return f"{sign}{seconds}"
    return f"{sign}{seconds}.{str(frac).zfill(9).rstrip('0')}"


def timestamp_ns(value: "int | float | str | Decimal") -> int:
    """Coerce seconds (numeric) or a timestamp string to epoch nanoseconds."""
    if isinstance(value, int):
        return value * 10**9
    if isinstance(value, float):
        return parse_timestamp(repr(value))
    if isinstance(value, Decimal):
        return parse_timestamp(str(value))
    return parse_timestamp(value)


# --- attributes ----------------------------------------------------------------

def _value_token(value: AttrValue) -> tuple:
    if isinstance(value, Literal):
        return ("l", value.lexical, str(value.datatype))
    if isinstance(value, QualifiedName):
        return ("q", str(value))
    return ("s", value)


class Attributes:
    """Ordered multimap of QualifiedName -> attribute value."""

    __slots__ = ("_pairs",)

    def __init__(self, pairs: Iterable[tuple] = ()):
        self._pairs: list[tuple[QualifiedName, AttrValue]] = []
        for key, value in pairs:
            self.add(key, value)

    def add(self, key: "str | QualifiedName", value) -> None:
        self._pairs.append((qname(key), coerce_value(value)))

    def first(self, key: "str | QualifiedName") -> AttrValue | None:
        wanted = str(qname(key))
        for k, v in self._pairs:
            if str(k) == wanted:
                return v
        return None

    def get_all(self, key: "str | QualifiedName") -> list[AttrValue]:
        wanted = str(qname(key))
        return [v for k, v in self._pairs if str(k) == wanted]

    def keys(self) -> list[QualifiedName]:
        return [k for k, _ in self._pairs]

    def items(self) -> list[tuple[QualifiedName, AttrValue]]:
        return list(self._pairs)

    def __iter__(self) -> Iterator[tuple[QualifiedName, AttrValue]]:
        return iter(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __bool__(self) -> bool:
        return bool(self._pairs)

    def canonical(self) -> tuple:
        """Order-insensitive fingerprint: sorted (key, value-token) pairs."""
        return tuple(sorted((str(k), _value_token(v)) for k, v in self._pairs))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Attributes):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __repr__(self) -> str:
        return f"Attributes({self._pairs!r})"


def _as_attributes(attrs) -> Attributes:
    if attrs is None:
        return Attributes()
    if isinstance(attrs, Attributes):
        return attrs
    if isinstance(attrs, dict):
        return Attributes(attrs.items())
    return Attributes(attrs)


# --- elements and relations -----------------------------------------------------

class ElementKind(Enum):
    ENTITY = "entity"
    ACTIVITY = "activity"
    AGENT = "agent"


_KIND_SORT = {ElementKind.ENTITY: 0, ElementKind.ACTIVITY: 1, ElementKind.AGENT: 2}


@dataclass
class Element:
    id: QualifiedName
    kind: ElementKind
    attributes: Attributes = field(default_factory=Attributes)
    start_time: int | None = None  # epoch ns; activities only
    end_time: int | None = None

    def __post_init__(self):
        if self.kind is not ElementKind.ACTIVITY and (
            self.start_time is not None or self.end_time is not None
        ):
            raise ValueError(f"{self.kind.value} {self.id} cannot carry start/end times")


class RelationKind(Enum):
    USED = "used"
    WAS_GENERATED_BY = "wasGeneratedBy"
    WAS_ASSOCIATED_WITH = "wasAssociatedWith"
    WAS_ATTRIBUTED_TO = "wasAttributedTo"
    WAS_DERIVED_FROM = "wasDerivedFrom"
    WAS_INFORMED_BY = "wasInformedBy"
    ACTED_ON_BEHALF_OF = "actedOnBehalfOf"


# subject kind, object kind
RELATION_SIGNATURES: dict[RelationKind, tuple[ElementKind, ElementKind]] = {
    RelationKind.USED: (ElementKind.ACTIVITY, ElementKind.ENTITY),
    RelationKind.WAS_GENERATED_BY: (ElementKind.ENTITY, ElementKind.ACTIVITY),
    RelationKind.WAS_ASSOCIATED_WITH: (ElementKind.ACTIVITY, ElementKind.AGENT),
    RelationKind.WAS_ATTRIBUTED_TO: (ElementKind.ENTITY, ElementKind.AGENT),
    RelationKind.WAS_DERIVED_FROM: (ElementKind.ENTITY, ElementKind.ENTITY),
    RelationKind.WAS_INFORMED_BY: (ElementKind.ACTIVITY, ElementKind.ACTIVITY),
    RelationKind.ACTED_ON_BEHALF_OF: (ElementKind.AGENT, ElementKind.AGENT),
}


@dataclass
class Relation:
    kind: RelationKind
    subject: QualifiedName
    object: QualifiedName
    id: QualifiedName | None = None
    attributes: Attributes = field(default_factory=Attributes)

    def canonical(self) -> tuple:
        return (
            self.kind.value,
            str(self.id) if self.id else "",
            str(self.subject),
            str(self.object),
            self.attributes.canonical(),
        )


# --- document --------------------------------------------------------------------

class ProvDocument:
    """Namespace map plus identified elements and typed relations.

    Build single-threaded via ``add_*``; treat as immutable afterwards.
    ``base_dir`` records where the document came from (or where a run
    writes its outputs) so external dataset payloads can be resolved;
    it is not part of document equality.
    """

    def __init__(self, prefixes: dict[str, str] | None = None):
        self.prefixes: dict[str, str] = dict(prefixes or {})
        self._elements: dict[ElementKind, dict[str, Element]] = {
            kind: {} for kind in ElementKind
        }
        self.relations: list[Relation] = []
        self.base_dir: Path | None = None

    # -- namespaces --

    def add_prefix(self, prefix: str, uri: str) -> None:
        self.prefixes[prefix] = uri

    def declares(self, prefix: str) -> bool:
        return prefix == "" or prefix in self.prefixes or prefix in BUILTIN_PREFIXES

    # -- elements --

    def add_element(self, element: Element, *, require_declared_prefix: bool = True) -> Element:
        if require_declared_prefix and not self.declares(element.id.prefix):
            raise UndeclaredPrefixError(
                f"prefix {element.id.prefix!r} of {element.id} is not declared"
            )
        bucket = self._elements[element.kind]
        key = str(element.id)
        if key in bucket:
            raise DuplicateIdError(f"{element.kind.value} {key} already exists")
        bucket[key] = element
        return element

    def entity(self, id: "str | QualifiedName", attributes=None) -> Element:
        return self.add_element(Element(qname(id), ElementKind.ENTITY, _as_attributes(attributes)))

    def activity(
        self,
        id: "str | QualifiedName",
        attributes=None,
        start_time: int | None = None,
        end_time: int | None = None,
    ) -> Element:
        return self.add_element(
            Element(qname(id), ElementKind.ACTIVITY, _as_attributes(attributes), start_time, end_time)
        )

    def agent(self, id: "str | QualifiedName", attributes=None) -> Element:
        return self.add_element(Element(qname(id), ElementKind.AGENT, _as_attributes(attributes)))

    def get(self, kind: ElementKind, id: "str | QualifiedName") -> Element | None:
        return self._elements[kind].get(str(qname(id)))

    def find(self, id: "str | QualifiedName") -> list[Element]:
        """All elements carrying this id, across kinds."""
        key = str(qname(id))
        return [b[key] for b in self._elements.values() if key in b]

    def has_id(self, id: "str | QualifiedName") -> bool:
        return bool(self.find(id))

    def elements(self, kind: ElementKind | None = None) -> Iterator[Element]:
        kinds = [kind] if kind else list(ElementKind)
        for k in kinds:
            yield from self._elements[k].values()

    def element_ids(self) -> set[str]:
        return {key for bucket in self._elements.values() for key in bucket}

    # -- relations --

    def add_relation(self, relation: Relation, *, strict: bool = False) -> Relation:
        if relation.id is None:
            relation.id = QualifiedName("_", f"r{len(self.relations)}")
        if strict:
            subj_kind, obj_kind = RELATION_SIGNATURES[relation.kind]
            for endpoint, wanted in ((relation.subject, subj_kind), (relation.object, obj_kind)):
                found = self.find(endpoint)
                if found and all(e.kind is not wanted for e in found):
                    raise KindMismatchError(
                        f"{relation.kind.value} endpoint {endpoint} is "
                        f"{found[0].kind.value}, expected {wanted.value}"
                    )
        self.relations.append(relation)
        return relation

    def relate(
        self,
        kind: RelationKind,
        subject: "str | QualifiedName",
        object: "str | QualifiedName",
        attributes=None,
        *,
        strict: bool = False,
    ) -> Relation:
        return self.add_relation(
            Relation(kind, qname(subject), qname(object), None, _as_attributes(attributes)),
            strict=strict,
        )

    # -- validation --

    def validate(self, strict: bool = False) -> list[Diagnostic]:
        """All structural violations; validity = no error-severity findings."""
        diags: list[Diagnostic] = []
        tolerated = Severity.ERROR if strict else Severity.WARNING

        def check_prefix(q: QualifiedName, where: str):
            if not self.declares(q.prefix):
                diags.append(
                    Diagnostic(
                        "undeclared-prefix",
                        f"prefix {q.prefix!r} of {q} is not declared",
                        Severity.ERROR,
                        where,
                    )
                )

        def check_attrs(attrs: Attributes, where: str):
            for key, value in attrs:
                check_prefix(key, where)
                if isinstance(value, QualifiedName):
                    check_prefix(value, where)
                elif isinstance(value, Literal):
                    check_prefix(value.datatype, where)
                    if is_numeric_datatype(value.datatype) and canonical_decimal(value.lexical) is None:
                        diags.append(
                            Diagnostic(
                                "invalid-literal",
                                f"{key} = {value.lexical!r} is not a finite {value.datatype}",
                                Severity.ERROR,
                                where,
                            )
                        )

        for element in self.elements():
            where = str(element.id)
            check_prefix(element.id, where)
            check_attrs(element.attributes, where)
            if (
                element.start_time is not None
                and element.end_time is not None
                and element.start_time > element.end_time
            ):
                diags.append(
                    Diagnostic(
                        "time-order",
                        f"start {format_timestamp(element.start_time)} is after "
                        f"end {format_timestamp(element.end_time)}",
                        Severity.ERROR,
                        where,
                    )
                )

        for relation in self.relations:
            where = str(relation.id) if relation.id else relation.kind.value
            if relation.id is not None:
                check_prefix(relation.id, where)
            check_attrs(relation.attributes, where)
            subj_kind, obj_kind = RELATION_SIGNATURES[relation.kind]
            for endpoint, wanted in ((relation.subject, subj_kind), (relation.object, obj_kind)):
                check_prefix(endpoint, where)
                found = self.find(endpoint)
                if not found:
                    diags.append(
                        Diagnostic(
                            "dangling-reference",
                            f"{relation.kind.value} endpoint {endpoint} names no element",
                            tolerated,
                            where,
                        )
                    )
                elif all(e.kind is not wanted for e in found):
                    diags.append(
                        Diagnostic(
                            "kind-mismatch",
                            f"{relation.kind.value} endpoint {endpoint} is "
                            f"{found[0].kind.value}, expected {wanted.value}",
                            tolerated,
                            where,
                        )
                    )
        return diags

    # -- equality --

    def canonical(self) -> tuple:
        elements = tuple(
            tuple(
                sorted(
                    (
                        key,
                        e.attributes.canonical(),
                        e.start_time,
                        e.end_time,
                    )
                    for key, e in self._elements[kind].items()
                )
            )
            for kind in ElementKind
        )
        relations = tuple(sorted(r.canonical() for r in self.relations))
        return (tuple(sorted(self.prefixes.items())), elements, relations)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProvDocument):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __repr__(self) -> str:
        counts = ", ".join(f"{len(self._elements[k])} {k.value}" for k in ElementKind)
        return f"<ProvDocument {counts}, {len(self.relations)} relations>"


def sort_key(element: Element) -> tuple:
    """Deterministic (kind, id) ordering used by exporters."""
    return (_KIND_SORT[element.kind], str(element.id))
