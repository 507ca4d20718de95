"""PROV-JSON parsing and serialization.

Targets the W3C PROV-JSON member-submission layout: one top-level object
with ``prefix``, ``entity``/``activity``/``agent`` sections, and one
section per relation kind keyed by relation id. Attribute values are bare
strings or ``{"$": lexical, "type": datatype}`` objects; arrays carry
multi-valued keys.

Guarantees:

* ``serialize`` is deterministic and byte-stable: object keys in
  lexicographic order, arrays in insertion order, compact separators,
  UTF-8 without BOM. The ``prefix`` object is always present.
* Bare JSON numbers are preserved as xsd:decimal literals with their exact
  lexical form (no float round-trip), so values like high-resolution epoch
  timestamps survive untouched.
* Duplicate keys inside one JSON object follow last-wins with a diagnostic.
* Non-strict parsing skips undecodable entries with a diagnostic instead of
  failing, and the count of parsed plus skipped entries equals the count of
  JSON entries.

Activity times are emitted as canonical decimal epoch seconds; the parser
also accepts ISO-8601 strings.
"""

from __future__ import annotations

import json
from pathlib import Path

from .diagnostics import Diagnostic, Severity
from .errors import (
    DuplicateIdError,
    MalformedJsonError,
    MissingEndpointKeyError,
    UndeclaredPrefixError,
)
from .model import (
    Attributes,
    Element,
    ElementKind,
    Literal,
    ProvDocument,
    QualifiedName,
    Relation,
    RelationKind,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    format_timestamp,
    parse_timestamp,
    qname,
)

PROV_QUALIFIED_NAME_TYPES = ("prov:QUALIFIED_NAME", "xsd:QName")

# subject key, object key
RELATION_ENDPOINT_KEYS: dict[RelationKind, tuple[str, str]] = {
    RelationKind.USED: ("prov:activity", "prov:entity"),
    RelationKind.WAS_GENERATED_BY: ("prov:entity", "prov:activity"),
    RelationKind.WAS_ASSOCIATED_WITH: ("prov:activity", "prov:agent"),
    RelationKind.WAS_ATTRIBUTED_TO: ("prov:entity", "prov:agent"),
    RelationKind.WAS_DERIVED_FROM: ("prov:generatedEntity", "prov:usedEntity"),
    RelationKind.WAS_INFORMED_BY: ("prov:informed", "prov:informant"),
    RelationKind.ACTED_ON_BEHALF_OF: ("prov:delegate", "prov:responsible"),
}

_ELEMENT_SECTIONS = {
    "entity": ElementKind.ENTITY,
    "activity": ElementKind.ACTIVITY,
    "agent": ElementKind.AGENT,
}
_RELATION_SECTIONS = {kind.value: kind for kind in RelationKind}
_KNOWN_SECTIONS = {"prefix", *_ELEMENT_SECTIONS, *_RELATION_SECTIONS}
_TIME_KEYS = ("prov:startTime", "prov:endTime")


class _JsonNumber(str):
    """Raw JSON number lexeme; subclass of str to keep the exact text."""


def _load_json(data: "bytes | str", diags: list[Diagnostic]):
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJsonError(f"input is not UTF-8: {exc}") from exc
    else:
        text = data
    if text.startswith("﻿"):
        diags.append(Diagnostic("byte-order-mark", "input starts with a BOM", Severity.WARNING))
        text = text.lstrip("﻿")

    def pairs_hook(pairs):
        seen = set()
        for key, _ in pairs:
            if key in seen:
                diags.append(
                    Diagnostic("duplicate-key", f"duplicate key {key!r}, last wins", Severity.WARNING)
                )
            seen.add(key)
        return dict(pairs)

    def reject_constant(token):
        raise ValueError(f"non-finite constant {token}")

    try:
        payload = json.loads(
            text,
            object_pairs_hook=pairs_hook,
            parse_float=_JsonNumber,
            parse_int=_JsonNumber,
            parse_constant=reject_constant,
        )
    except (json.JSONDecodeError, ValueError, RecursionError) as exc:
        raise MalformedJsonError(str(exc)) from exc
    if not isinstance(payload, dict):
        raise MalformedJsonError("top-level JSON value must be an object")
    return payload


def _decode_scalar(raw, where: str, diags: list[Diagnostic]):
    if isinstance(raw, _JsonNumber):
        return Literal(str(raw), XSD_DECIMAL)
    if isinstance(raw, bool):
        return Literal("true" if raw else "false", XSD_BOOLEAN)
    if isinstance(raw, str):
        return raw
    if isinstance(raw, dict) and "$" in raw:
        lex = raw["$"]
        if isinstance(lex, bool):
            lex = "true" if lex else "false"
        else:
            lex = str(lex)
        type_text = raw.get("type")
        if type_text is None:
            return lex
        if str(type_text) in PROV_QUALIFIED_NAME_TYPES:
            try:
                return QualifiedName.parse(lex)
            except ValueError:
                diags.append(
                    Diagnostic("skipped-value", f"bad qualified name {lex!r}", Severity.WARNING, where)
                )
                return None
        return Literal(lex, QualifiedName.parse(str(type_text)))
    diags.append(
        Diagnostic("skipped-value", f"undecodable attribute value {raw!r}", Severity.WARNING, where)
    )
    return None


def _decode_values(raw, where: str, diags: list[Diagnostic]) -> list:
    items = raw if isinstance(raw, list) else [raw]
    values = []
    for item in items:
        if isinstance(item, list):
            diags.append(
                Diagnostic("skipped-value", "nested arrays are not supported", Severity.WARNING, where)
            )
            continue
        value = _decode_scalar(item, where, diags)
        if value is not None:
            values.append(value)
    return values


def _lexical_of(raw) -> str | None:
    if isinstance(raw, (_JsonNumber, str)):
        return str(raw)
    if isinstance(raw, dict) and "$" in raw:
        return str(raw["$"])
    return None


def _require_declared(doc: ProvDocument, q: QualifiedName, strict: bool, context: str):
    if strict and not doc.declares(q.prefix):
        raise UndeclaredPrefixError(f"prefix {q.prefix!r} of {q} is not declared ({context})")


def parse(data: "bytes | str", strict: bool = False) -> tuple[ProvDocument, list[Diagnostic]]:
    """Parse PROV-JSON into a document plus diagnostics.

    Raises MalformedJsonError always; UndeclaredPrefixError and
    MissingEndpointKeyError only in strict mode (non-strict skips or keeps
    the entry and records a diagnostic instead).
    """
    diags: list[Diagnostic] = []
    payload = _load_json(data, diags)
    doc = ProvDocument()

    prefix_section = payload.get("prefix", {})
    if isinstance(prefix_section, dict):
        for prefix, uri in prefix_section.items():
            if isinstance(uri, (str, _JsonNumber)):
                doc.add_prefix(str(prefix), str(uri))
            else:
                diags.append(
                    Diagnostic("skipped-entry", f"prefix {prefix!r} has a non-string URI", Severity.WARNING)
                )
    elif "prefix" in payload:
        diags.append(Diagnostic("skipped-entry", "prefix section is not an object", Severity.WARNING))

    for section_name, kind in _ELEMENT_SECTIONS.items():
        section = payload.get(section_name)
        if section is None:
            continue
        if not isinstance(section, dict):
            diags.append(
                Diagnostic("skipped-entry", f"{section_name} section is not an object", Severity.WARNING)
            )
            continue
        for id_text, body in section.items():
            where = str(id_text)
            if not isinstance(body, dict):
                diags.append(
                    Diagnostic("skipped-entry", f"{section_name} {where} body is not an object",
                               Severity.WARNING, where)
                )
                continue
            try:
                eid = qname(id_text)
            except ValueError:
                diags.append(
                    Diagnostic("skipped-entry", f"bad element id {where!r}", Severity.WARNING, where)
                )
                continue
            _require_declared(doc, eid, strict, f"{section_name} id")
            start = end = None
            attrs = Attributes()
            for key_text, raw in body.items():
                if key_text in _TIME_KEYS:
                    if kind is not ElementKind.ACTIVITY:
                        diags.append(
                            Diagnostic("times-on-non-activity",
                                       f"{key_text} ignored on {section_name} {where}",
                                       Severity.WARNING, where)
                        )
                        continue
                    lexical = _lexical_of(raw)
                    try:
                        ns = parse_timestamp(lexical) if lexical is not None else None
                    except ValueError:
                        ns = None
                    if ns is None:
                        diags.append(
                            Diagnostic("bad-timestamp", f"cannot parse {key_text} {raw!r}",
                                       Severity.WARNING, where)
                        )
                        continue
                    if key_text == "prov:startTime":
                        start = ns
                    else:
                        end = ns
                    continue
                key = QualifiedName.parse(str(key_text))
                _require_declared(doc, key, strict, "attribute key")
                for value in _decode_values(raw, where, diags):
                    if isinstance(value, QualifiedName):
                        _require_declared(doc, value, strict, "attribute value")
                    elif isinstance(value, Literal):
                        _require_declared(doc, value.datatype, strict, "literal datatype")
                    attrs.add(key, value)
            try:
                doc.add_element(
                    Element(eid, kind, attrs, start, end), require_declared_prefix=strict
                )
            except DuplicateIdError:
                diags.append(
                    Diagnostic("skipped-entry", f"duplicate {section_name} id {where}",
                               Severity.WARNING, where)
                )

    for section_name, kind in _RELATION_SECTIONS.items():
        section = payload.get(section_name)
        if section is None:
            continue
        if not isinstance(section, dict):
            diags.append(
                Diagnostic("skipped-entry", f"{section_name} section is not an object", Severity.WARNING)
            )
            continue
        subject_key, object_key = RELATION_ENDPOINT_KEYS[kind]
        for id_text, body in section.items():
            where = str(id_text)
            if not isinstance(body, dict):
                diags.append(
                    Diagnostic("skipped-entry", f"{section_name} {where} body is not an object",
                               Severity.WARNING, where)
                )
                continue
            subject_raw = body.get(subject_key)
            object_raw = body.get(object_key)
            if any(
                not isinstance(raw, str) or isinstance(raw, _JsonNumber)
                for raw in (subject_raw, object_raw)
            ):
                if strict:
                    raise MissingEndpointKeyError(
                        f"{section_name} {where} needs string-valued "
                        f"{subject_key} and {object_key}"
                    )
                diags.append(
                    Diagnostic("skipped-entry",
                               f"{section_name} {where} lacks endpoint keys "
                               f"{subject_key}/{object_key}",
                               Severity.WARNING, where)
                )
                continue
            rid = qname(id_text)
            subject = QualifiedName.parse(str(subject_raw))
            object_ = QualifiedName.parse(str(object_raw))
            for q, ctx in ((rid, "relation id"), (subject, "subject"), (object_, "object")):
                _require_declared(doc, q, strict, ctx)
            attrs = Attributes()
            for key_text, raw in body.items():
                if key_text in (subject_key, object_key):
                    continue
                key = QualifiedName.parse(str(key_text))
                _require_declared(doc, key, strict, "attribute key")
                for value in _decode_values(raw, where, diags):
                    attrs.add(key, value)
            doc.add_relation(Relation(kind, subject, object_, rid, attrs))

    for section_name in payload:
        if section_name not in _KNOWN_SECTIONS:
            diags.append(
                Diagnostic(
                    "unknown-section",
                    f"unsupported top-level key {section_name!r}",
                    Severity.ERROR if strict else Severity.WARNING,
                )
            )
    return doc, diags


def parse_file(path: "str | Path", strict: bool = False) -> tuple[ProvDocument, list[Diagnostic]]:
    path = Path(path)
    doc, diags = parse(path.read_bytes(), strict=strict)
    doc.base_dir = path.parent
    return doc, diags


def _encode_value(value):
    if isinstance(value, Literal):
        return {"$": value.lexical, "type": str(value.datatype)}
    if isinstance(value, QualifiedName):
        return {"$": str(value), "type": "prov:QUALIFIED_NAME"}
    return value


def _encode_attrs(attrs: Attributes, extra: dict | None = None) -> dict:
    grouped: dict[str, list] = {}
    for key, value in attrs:
        grouped.setdefault(str(key), []).append(_encode_value(value))
    out = {k: (v[0] if len(v) == 1 else v) for k, v in grouped.items()}
    if extra:
        out.update(extra)
    return out


def serialize(doc: ProvDocument) -> bytes:
    """Deterministic canonical PROV-JSON bytes; re-parses to an equal document."""
    payload: dict = {"prefix": dict(doc.prefixes)}
    for section_name, kind in _ELEMENT_SECTIONS.items():
        section = {}
        for element in doc.elements(kind):
            extra = {}
            if element.start_time is not None:
                extra["prov:startTime"] = format_timestamp(element.start_time)
            if element.end_time is not None:
                extra["prov:endTime"] = format_timestamp(element.end_time)
            section[str(element.id)] = _encode_attrs(element.attributes, extra)
        if section:
            payload[section_name] = section
    for kind in RelationKind:
        relations = [r for r in doc.relations if r.kind is kind]
        if not relations:
            continue
        subject_key, object_key = RELATION_ENDPOINT_KEYS[kind]
        section = {}
        for rel in relations:
            rid = str(rel.id)
            if rid in section:
                raise ValueError(f"duplicate {kind.value} relation id {rid}")
            entry = {subject_key: str(rel.subject), object_key: str(rel.object)}
            entry.update(_encode_attrs(rel.attributes))
            section[rid] = entry
        payload[kind.value] = section
    text = json.dumps(
        payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    )
    return text.encode("utf-8")


def write_file(doc: ProvDocument, path: "str | Path") -> None:
    Path(path).write_bytes(serialize(doc))
