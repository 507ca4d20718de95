"""Counterfactual-explanation records and input-space summaries.

A logged record pairs one query instance with the counterfactual instances
a generator proposed for it. This module validates records, recovers them
from provenance entities, and summarizes them exactly: per-feature change
frequencies, axis-aligned per-class region bounds, and a flat point cloud
export suitable as plot data. It never queries a live model.

Payload JSON schema (canonical: sorted keys, compact separators)::

    {
      "query": {"<feature>": <number|string>, ...},
      "query_class": "<label>",
      "desired_class": "<label>",
      "counterfactuals": [
        {"values": {"<feature>": <number|string>, ...},
         "predicted_class": "<label>"},
        ...
      ],
      "features_to_vary": ["<feature>", ...]   // optional
    }

A feature counts as changed on any difference: exact equality for strings,
zero tolerance for numbers.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .diagnostics import Diagnostic, Severity
from .errors import (
    EmptyInputError,
    InconsistentFeaturesError,
    MalformedPayloadError,
    NoCeEntitiesError,
    NoPointsForClassError,
    SchemaMismatchError,
    UnknownFeatureError,
)
from .model import Element, ElementKind, Literal, ProvDocument, canonical_decimal

CE_TYPE = "mlprov:CounterfactualExplanation"
PAYLOAD_KEY = "mlprov:cfPayload"


@dataclass
class Counterfactual:
    values: dict
    predicted_class: str


@dataclass
class CfRecord:
    query: dict
    query_class: str
    desired_class: str
    counterfactuals: list[Counterfactual]
    features_to_vary: list[str] | None = None


def _changed_features(record: CfRecord, cf: Counterfactual) -> list[str]:
    return [f for f, v in record.query.items() if cf.values.get(f) != v]


def validate_record(record: CfRecord) -> list[Diagnostic]:
    """All violations in one record; empty means loggable."""
    diags: list[Diagnostic] = []
    if record.desired_class == record.query_class:
        diags.append(
            Diagnostic("desired-equals-query",
                       f"desired class {record.desired_class!r} equals the query class")
        )
    query_keys = set(record.query)
    for i, cf in enumerate(record.counterfactuals):
        where = f"counterfactual {i}"
        if set(cf.values) != query_keys:
            diags.append(
                Diagnostic("schema-mismatch",
                           f"{where} feature keys differ from the query's", subject=where)
            )
            continue
        changed = _changed_features(record, cf)
        if not changed:
            diags.append(
                Diagnostic("identical-cf", f"{where} is identical to the query", subject=where)
            )
        if cf.predicted_class != record.desired_class:
            diags.append(
                Diagnostic("class-mismatch",
                           f"{where} predicted {cf.predicted_class!r}, "
                           f"desired {record.desired_class!r}", subject=where)
            )
        if record.features_to_vary is not None:
            outside = [f for f in changed if f not in record.features_to_vary]
            if outside:
                diags.append(
                    Diagnostic("feature-violation",
                               f"{where} changes {outside} outside features_to_vary",
                               subject=where)
                )
    return diags


def render_cf_payload(record: CfRecord) -> str:
    payload = {
        "query": record.query,
        "query_class": record.query_class,
        "desired_class": record.desired_class,
        "counterfactuals": [
            {"values": cf.values, "predicted_class": cf.predicted_class}
            for cf in record.counterfactuals
        ],
    }
    if record.features_to_vary is not None:
        payload["features_to_vary"] = record.features_to_vary
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _feature_map(raw, what: str) -> dict:
    if not isinstance(raw, dict) or not raw:
        raise MalformedPayloadError(f"{what} must be a non-empty object")
    for feature, value in raw.items():
        if not isinstance(value, (int, float, str)) or isinstance(value, bool):
            raise MalformedPayloadError(f"{what} value for {feature!r} must be number or string")
    return dict(raw)


def parse_cf_payload(entity: Element) -> CfRecord:
    """Decode the payload attribute of a counterfactual-explanation entity."""
    if entity.kind is not ElementKind.ENTITY:
        raise MalformedPayloadError(f"{entity.id} is not an entity")
    type_attr = entity.attributes.first("prov:type")
    if str(type_attr) != CE_TYPE:
        raise MalformedPayloadError(f"{entity.id} is not typed {CE_TYPE}")
    raw = entity.attributes.first(PAYLOAD_KEY)
    if raw is None:
        raise MalformedPayloadError(f"{entity.id} has no {PAYLOAD_KEY} attribute")
    text = raw.lexical if isinstance(raw, Literal) else str(raw)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedPayloadError(f"{entity.id}: {exc}") from exc
    if not isinstance(payload, dict):
        raise MalformedPayloadError(f"{entity.id}: payload must be an object")
    try:
        query = _feature_map(payload["query"], "query")
        query_class = str(payload["query_class"])
        desired_class = str(payload["desired_class"])
        raw_cfs = payload["counterfactuals"]
    except KeyError as exc:
        raise MalformedPayloadError(f"{entity.id}: missing key {exc}") from exc
    if not isinstance(raw_cfs, list):
        raise MalformedPayloadError(f"{entity.id}: counterfactuals must be an array")
    counterfactuals = []
    for i, item in enumerate(raw_cfs):
        if not isinstance(item, dict) or "values" not in item or "predicted_class" not in item:
            raise MalformedPayloadError(f"{entity.id}: counterfactual {i} is malformed")
        values = _feature_map(item["values"], f"counterfactual {i}")
        if set(values) != set(query):
            raise SchemaMismatchError(
                f"{entity.id}: counterfactual {i} feature keys differ from the query's"
            )
        counterfactuals.append(Counterfactual(values, str(item["predicted_class"])))
    features_to_vary = payload.get("features_to_vary")
    if features_to_vary is not None:
        if not isinstance(features_to_vary, list):
            raise MalformedPayloadError(f"{entity.id}: features_to_vary must be an array")
        features_to_vary = [str(f) for f in features_to_vary]
    return CfRecord(query, query_class, desired_class, counterfactuals, features_to_vary)


def collect_records(doc: ProvDocument) -> list[CfRecord]:
    """All counterfactual records in the document, in entity-id order."""
    ce_entities = sorted(
        (
            e
            for e in doc.elements(ElementKind.ENTITY)
            if str(e.attributes.first("prov:type")) == CE_TYPE
        ),
        key=lambda e: str(e.id),
    )
    if not ce_entities:
        raise NoCeEntitiesError("document holds no counterfactual-explanation entities")
    return [parse_cf_payload(e) for e in ce_entities]


def _common_features(records: list[CfRecord]) -> list[str]:
    if not records:
        raise EmptyInputError("no counterfactual records")
    keys = set(records[0].query)
    for record in records[1:]:
        if set(record.query) != keys:
            raise InconsistentFeaturesError("records do not share one feature-key set")
    return list(records[0].query)


def change_frequency(records: list[CfRecord]) -> dict[str, float]:
    """Per feature: fraction of pooled counterfactuals whose value differs
    from their own query's value."""
    features = _common_features(records)
    total = sum(len(r.counterfactuals) for r in records)
    if total == 0:
        raise EmptyInputError("records contain no counterfactuals")
    changed = {f: 0 for f in features}
    for record in records:
        for cf in record.counterfactuals:
            for f in _changed_features(record, cf):
                changed[f] += 1
    return {f: changed[f] / total for f in features}


def region_bounds(records: list[CfRecord], target_class: str) -> dict[str, tuple]:
    """Per-feature (min, max) over counterfactuals predicted as target_class.

    Features with any non-numeric value among those points are omitted
    (bounds are only meaningful on numeric axes).
    """
    features = _common_features(records)
    points = [
        cf
        for record in records
        for cf in record.counterfactuals
        if cf.predicted_class == target_class
    ]
    if not points:
        raise NoPointsForClassError(f"no counterfactual predicted as {target_class!r}")
    bounds = {}
    for f in features:
        values = [cf.values[f] for cf in points]
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            bounds[f] = (min(values), max(values))
    return bounds


def point_counts(records: list[CfRecord]) -> dict[str, int]:
    """Counterfactuals per predicted class."""
    counts: dict[str, int] = {}
    for record in records:
        for cf in record.counterfactuals:
            counts[cf.predicted_class] = counts.get(cf.predicted_class, 0) + 1
    return counts


def coverage_summary(records: list[CfRecord]) -> dict:
    """JSON-ready summary: change_frequency, region_bounds per class, point_count."""
    counts = point_counts(records)
    return {
        "change_frequency": change_frequency(records),
        "region_bounds": {
            cls: {f: list(b) for f, b in region_bounds(records, cls).items()}
            for cls in sorted(counts)
        },
        "point_count": counts,
        "query_count": len(records),
    }


def _render_point(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return canonical_decimal(repr(value))
    return str(value)


def export_points(doc: ProvDocument, features: list[str]) -> str:
    """CSV point cloud over 2-3 feature axes: one row per query and per
    counterfactual, with class and kind columns."""
    if not 2 <= len(features) <= 3:
        raise ValueError("export needs 2 or 3 feature names")
    records = collect_records(doc)
    for record in records:
        for f in features:
            if f not in record.query:
                raise UnknownFeatureError(f"feature {f!r} not present in all records")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([*features, "class", "kind"])
    for record in records:
        writer.writerow([*(_render_point(record.query[f]) for f in features),
                         record.query_class, "query"])
        for cf in record.counterfactuals:
            writer.writerow([*(_render_point(cf.values[f]) for f in features),
                             cf.predicted_class, "cf"])
    return buffer.getvalue()
