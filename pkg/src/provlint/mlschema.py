"""ML provenance vocabulary and the run builder.

The vocabulary lives under the ``mlprov`` prefix and gives every category
of interpretability-relevant provenance an attribute encoding: datasets
with split roles and collection metadata, preprocessing steps as
first-class activities with derived output entities (not run attributes,
which loses ordering and traceability), feature selections, model
parameters/hyperparameters, counterfactual explanations, and free-form
execution-log attributes.

A :class:`RunBuilder` constructs one run's document and guarantees by
construction that the result passes strict validation: every logged model
has a lineage path back to a dataset, preprocessing stages number 0,1,2,..
with no gaps, and all prefixes are declared.

Output layout: ``<save_dir>/<experiment>_<N>/prov.provjson`` (plus
``prov.dot`` when requested). N comes from scanning save_dir for existing
run directories. Dataset payloads are inlined as canonical CSV up to a
size threshold, above which they are written to ``data/<name>.csv`` inside
the run directory and referenced by relative path + SHA-256 digest.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import cfmap
from .diagnostics import Diagnostic, Severity
from .dot import export_dot
from .errors import (
    AlreadyEndedError,
    DuplicateNameError,
    EmptyFeatureListError,
    InvalidCfRecordError,
    InvalidNamespaceError,
    IoFailureError,
    UnknownInputError,
)
from .model import (
    ElementKind,
    ProvDocument,
    QualifiedName,
    RelationKind,
    qname,
    timestamp_ns,
)
from .provjson import serialize

MLPROV_NS = "https://provlint.dev/ns/mlprov#"
PARAMETER_NS = "https://provlint.dev/ns/mlprov/parameter#"
HYPERPARAMETER_NS = "https://provlint.dev/ns/mlprov/hyperparameter#"

# entity/activity classes
DATASET = QualifiedName("mlprov", "Dataset")
PREPROCESSING_STEP = QualifiedName("mlprov", "PreprocessingStep")
FEATURE_SELECTION = QualifiedName("mlprov", "FeatureSelection")
MODEL = QualifiedName("mlprov", "Model")
PREDICTION = QualifiedName("mlprov", "Prediction")
COUNTERFACTUAL_EXPLANATION = QualifiedName("mlprov", "CounterfactualExplanation")
RUN = QualifiedName("mlprov", "Run")

SPLIT_ROLES = ("training", "validation", "testing")
FIDELITY_VALUES = ("real", "synthetic")

DEFAULT_INLINE_LIMIT = 1 << 20  # bytes of canonical CSV kept inline

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")

# dataset metadata keyword -> mlprov attribute key
_DATASET_ATTR_KEYS = {
    "data_kind": "mlprov:dataKind",
    "data_source": "mlprov:dataSource",
    "fidelity": "mlprov:fidelity",
    "collection_method": "mlprov:collectionMethod",
    "collector": "mlprov:collector",
    "collected_on": "mlprov:collectedOn",
    "split_fraction": "mlprov:splitFraction",
}


def _render_cell(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, bool):
        return "true" if cell else "false"
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def _parse_cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class TabularDataset:
    """Column-named rows of numeric-or-missing cells."""

    columns: list[str]
    rows: list[list]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, expected {width}")

    def column(self, name: str) -> list:
        try:
            idx = self.columns.index(name)
        except ValueError as exc:
            raise KeyError(f"no column {name!r}") from exc
        return [row[idx] for row in self.rows]

    def to_csv(self) -> str:
        """Canonical CSV: RFC-4180 quoting, LF endings, repr floats, '' for missing."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_render_cell(cell) for cell in row])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TabularDataset":
        reader = csv.reader(io.StringIO(text))
        rows = list(reader)
        if not rows:
            raise ValueError("empty CSV payload")
        return cls(rows[0], [[_parse_cell(cell) for cell in row] for row in rows[1:]])

    def digest(self) -> str:
        return hashlib.sha256(self.to_csv().encode("utf-8")).hexdigest()


def _canonical_json(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _check_name(name: str, what: str):
    if not isinstance(name, str) or not _NAME_RE.match(name or ""):
        raise InvalidNamespaceError(f"{what} must be a non-empty identifier token, got {name!r}")


def _next_run_index(save_dir: Path, experiment_name: str) -> int:
    pattern = re.compile(rf"^{re.escape(experiment_name)}_(\d+)$")
    taken = [
        int(m.group(1))
        for p in save_dir.iterdir()
        if p.is_dir() and (m := pattern.match(p.name))
    ] if save_dir.is_dir() else []
    return max(taken) + 1 if taken else 0


class RunBuilder:
    """Accumulates one experiment run; use :func:`start_run` to create."""

    def __init__(
        self,
        namespace: str,
        experiment_name: str,
        save_dir: "str | Path",
        *,
        clock: Callable[[], float] | None = None,
        agent: str | None = None,
        source_code_ref: str | None = None,
        environment_ref: str | None = None,
    ):
        if not isinstance(namespace, str) or not namespace.strip():
            raise InvalidNamespaceError("namespace must be a non-empty string")
        _check_name(experiment_name, "experiment name")
        self.namespace = namespace
        self.experiment_name = experiment_name
        self.clock = clock or time.time
        self.save_dir = Path(save_dir)
        self.index = _next_run_index(self.save_dir, experiment_name)
        self.run_dir = self.save_dir / f"{experiment_name}_{self.index}"
        try:
            self.run_dir.mkdir(parents=True, exist_ok=False)
        except OSError as exc:
            raise IoFailureError(f"cannot create run directory {self.run_dir}: {exc}") from exc

        self.doc = ProvDocument(
            {
                "ex": namespace,
                "mlprov": MLPROV_NS,
                "parameter": PARAMETER_NS,
                "hyperparameter": HYPERPARAMETER_NS,
            }
        )
        self.doc.base_dir = self.run_dir
        self.diagnostics: list[Diagnostic] = []
        self._dataset_names: set[str] = set()
        self._stage = 0
        self._cf_count = 0
        self._selection_count = 0
        self._ended = False

        run_attrs = {
            "prov:type": RUN,
            "mlprov:experimentName": experiment_name,
            "mlprov:experimentDir": self.run_dir.name,
            "mlprov:runIndex": self.index,
        }
        if source_code_ref is not None:
            run_attrs["mlprov:sourceCodeRef"] = source_code_ref
        if environment_ref is not None:
            run_attrs["mlprov:environmentRef"] = environment_ref
        self.run_id = QualifiedName("ex", self.run_dir.name)
        self.doc.activity(self.run_id, run_attrs, start_time=timestamp_ns(self.clock()))
        if agent is not None:
            _check_name(agent, "agent name")
            agent_id = QualifiedName("ex", agent)
            self.doc.agent(agent_id, {"prov:type": QualifiedName("prov", "Person")})
            self.doc.relate(RelationKind.WAS_ASSOCIATED_WITH, self.run_id, agent_id)

    # -- helpers --

    def _check_open(self):
        if self._ended:
            raise AlreadyEndedError("run already ended")

    def _entity_input(self, input_id) -> QualifiedName:
        q = qname(input_id)
        if self.doc.get(ElementKind.ENTITY, q) is None:
            raise UnknownInputError(f"no entity {q} in this run")
        return q

    def _attach_payload(self, attrs: dict, name: str, data: TabularDataset, inline_limit: int):
        csv_text = data.to_csv()
        attrs["mlprov:rowCount"] = len(data.rows)
        attrs["mlprov:columnCount"] = len(data.columns)
        attrs["mlprov:contentDigest"] = data.digest()
        if len(csv_text.encode("utf-8")) <= inline_limit:
            attrs["mlprov:payloadCsv"] = csv_text
        else:
            rel_path = Path("data") / f"{name}.csv"
            target = self.run_dir / rel_path
            try:
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(csv_text, encoding="utf-8", newline="")
            except OSError as exc:
                raise IoFailureError(f"cannot write payload {target}: {exc}") from exc
            attrs["mlprov:payloadPath"] = rel_path.as_posix()

    # -- logging API --

    def log_dataset(
        self,
        name: str,
        data: TabularDataset,
        role: str,
        *,
        label_column: str | None = None,
        class_proportions: dict | None = None,
        inline_limit: int = DEFAULT_INLINE_LIMIT,
        **metadata,
    ) -> QualifiedName:
        """Log a split dataset; returns the new entity id.

        ``metadata`` accepts data_kind, data_source, fidelity,
        collection_method, collector, collected_on, split_fraction.
        """
        self._check_open()
        _check_name(name, "dataset name")
        if name in self._dataset_names:
            raise DuplicateNameError(f"dataset {name!r} already logged")
        if role not in SPLIT_ROLES:
            raise ValueError(f"role must be one of {SPLIT_ROLES}, got {role!r}")
        unknown = set(metadata) - set(_DATASET_ATTR_KEYS)
        if unknown:
            raise TypeError(f"unknown dataset metadata: {sorted(unknown)}")
        if metadata.get("fidelity") is not None and metadata["fidelity"] not in FIDELITY_VALUES:
            raise ValueError(f"fidelity must be one of {FIDELITY_VALUES}")
        attrs = {"prov:type": DATASET, "mlprov:role": role}
        if label_column is not None:
            if label_column not in data.columns:
                raise ValueError(f"label column {label_column!r} not in columns")
            attrs["mlprov:labelColumn"] = label_column
        for keyword, attr_key in _DATASET_ATTR_KEYS.items():
            if metadata.get(keyword) is not None:
                attrs[attr_key] = metadata[keyword]
        if class_proportions is not None:
            fractions = list(class_proportions.values())
            if any(not 0.0 <= f <= 1.0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
                raise ValueError("class proportions must lie in [0,1] and sum to 1")
            attrs["mlprov:classProportions"] = _canonical_json(class_proportions)
        self._attach_payload(attrs, name, data, inline_limit)
        dataset_id = QualifiedName("ex", name)
        self.doc.entity(dataset_id, attrs)
        self.doc.relate(RelationKind.USED, self.run_id, dataset_id)
        self._dataset_names.add(name)
        if not data.rows:
            self.diagnostics.append(
                Diagnostic("empty-dataset", f"dataset {name!r} has no rows",
                           Severity.WARNING, str(dataset_id))
            )
        return dataset_id

    def log_preprocessing_step(
        self,
        name: str,
        kind: str,
        params: dict,
        input_id,
        output_data: TabularDataset,
        *,
        inline_limit: int = DEFAULT_INLINE_LIMIT,
    ) -> tuple[QualifiedName, QualifiedName]:
        """Log one pipeline step; returns (step activity id, output entity id)."""
        self._check_open()
        _check_name(name, "step name")
        input_q = self._entity_input(input_id)
        step_id = QualifiedName("ex", name)
        step_attrs = {
            "prov:type": PREPROCESSING_STEP,
            "mlprov:stepKind": kind,
            "mlprov:pipelineStage": self._stage,
        }
        if params:
            step_attrs["mlprov:stepParams"] = _canonical_json(params)
        self.doc.activity(step_id, step_attrs)
        output_id = QualifiedName("ex", f"{name}_output")
        output_attrs = {"prov:type": DATASET}
        self._attach_payload(output_attrs, f"{name}_output", output_data, inline_limit)
        self.doc.entity(output_id, output_attrs)
        self.doc.relate(RelationKind.USED, step_id, input_q)
        self.doc.relate(RelationKind.WAS_GENERATED_BY, output_id, step_id)
        self.doc.relate(RelationKind.WAS_DERIVED_FROM, output_id, input_q)
        self.doc.relate(RelationKind.WAS_INFORMED_BY, step_id, self.run_id)
        self._stage += 1
        return step_id, output_id

    def log_feature_selection(self, features: list[str], input_id) -> QualifiedName:
        self._check_open()
        if not features:
            raise EmptyFeatureListError("feature list is empty")
        if len(set(features)) != len(features):
            raise EmptyFeatureListError(f"duplicate feature names in {features!r}")
        input_q = self._entity_input(input_id)
        suffix = "" if self._selection_count == 0 else f"_{self._selection_count}"
        selection_id = QualifiedName("ex", f"feature_selection{suffix}")
        attrs = [("prov:type", FEATURE_SELECTION)]
        attrs.extend(("mlprov:feature", feature) for feature in features)
        self.doc.entity(selection_id, attrs)
        self.doc.relate(RelationKind.WAS_DERIVED_FROM, selection_id, input_q)
        self.doc.relate(RelationKind.USED, self.run_id, selection_id)
        self._selection_count += 1
        return selection_id

    def log_model(
        self,
        name: str,
        model_kind: str,
        parameters: dict,
        hyperparameters: dict,
        input_id,
    ) -> QualifiedName:
        self._check_open()
        _check_name(name, "model name")
        input_q = self._entity_input(input_id)
        model_id = QualifiedName("ex", name)
        attrs = [("prov:type", MODEL), ("mlprov:modelKind", model_kind)]
        for key, value in parameters.items():
            attrs.append((QualifiedName("parameter", key), value))
        for key, value in hyperparameters.items():
            attrs.append((QualifiedName("hyperparameter", key), value))
        self.doc.entity(model_id, attrs)
        self.doc.relate(RelationKind.WAS_GENERATED_BY, model_id, self.run_id)
        self.doc.relate(RelationKind.WAS_DERIVED_FROM, model_id, input_q)
        if not parameters:
            self.diagnostics.append(
                Diagnostic("missing-parameters", f"model {name!r} logged without parameters",
                           Severity.WARNING, str(model_id))
            )
        return model_id

    def log_counterfactuals(self, record: "cfmap.CfRecord", model_id) -> QualifiedName:
        self._check_open()
        problems = cfmap.validate_record(record)
        if problems:
            raise InvalidCfRecordError("; ".join(d.message for d in problems))
        model_q = self._entity_input(model_id)
        ce_id = QualifiedName("ex", f"counterfactuals_{self._cf_count}")
        self.doc.entity(
            ce_id,
            {
                "prov:type": COUNTERFACTUAL_EXPLANATION,
                cfmap.PAYLOAD_KEY: cfmap.render_cf_payload(record),
            },
        )
        self.doc.relate(RelationKind.WAS_DERIVED_FROM, ce_id, model_q)
        self._cf_count += 1
        return ce_id

    def log_artifact(self, key: str, value) -> None:
        """Free-form run attribute (execution logs, statistics, and the like)."""
        self._check_open()
        _check_name(key, "artifact key")
        run = self.doc.get(ElementKind.ACTIVITY, self.run_id)
        run.attributes.add(QualifiedName("mlprov", key), value)

    def end_run(self, create_graph: bool = False) -> ProvDocument:
        """Close the run, write prov.provjson (+ prov.dot), return the document."""
        self._check_open()
        self._ended = True
        run = self.doc.get(ElementKind.ACTIVITY, self.run_id)
        run.end_time = timestamp_ns(self.clock())
        try:
            (self.run_dir / "prov.provjson").write_bytes(serialize(self.doc))
            if create_graph:
                (self.run_dir / "prov.dot").write_text(export_dot(self.doc), encoding="utf-8")
        except OSError as exc:
            raise IoFailureError(f"cannot write run outputs: {exc}") from exc
        return self.doc


def start_run(
    namespace: str,
    experiment_name: str,
    save_dir: "str | Path",
    *,
    clock: Callable[[], float] | None = None,
    agent: str | None = None,
    source_code_ref: str | None = None,
    environment_ref: str | None = None,
) -> RunBuilder:
    """Open a run: creates ``<save_dir>/<experiment>_<N>`` and the Run activity."""
    return RunBuilder(
        namespace,
        experiment_name,
        save_dir,
        clock=clock,
        agent=agent,
        source_code_ref=source_code_ref,
        environment_ref=environment_ref,
    )
