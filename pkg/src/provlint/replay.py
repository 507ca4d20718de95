"""Pipeline reconstruction and linear-regression replay.

Rebuilds the logged preprocessing pipeline from provenance alone, re-runs
it on the logged training data, fits ordinary least squares on the result,
and compares the coefficients against the ones stored on the model entity.
The verdict is PASS when the largest absolute coefficient difference stays
within the tolerance (default 1e-9: an exact replay of the same pipeline
should agree to near machine precision, so anything above that signals
drift between the log and the computation).

Step params recognized: ``column`` (the column a scaler targets; default is
every non-label column), ``ddof`` (standardize divisor n-ddof; default 0,
population). Only simple one-feature regression is replayed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import (
    BrokenChainError,
    DegenerateInputError,
    EmptyAfterDropError,
    LengthMismatchError,
    MissingModelError,
    MissingTrainingDataError,
    UnknownStepKindError,
    ZeroRangeError,
    ZeroVarianceError,
)
from .mlschema import SPLIT_ROLES, TabularDataset
from .model import ElementKind, Literal, ProvDocument

STEP_KINDS = ("dropna", "standardize", "minmax_normalize", "expand_dims")

DEFAULT_TOLERANCE = 1e-9


@dataclass
class PlanStep:
    activity_id: str
    kind: str
    params: dict
    stage: int
    input_id: str
    output_id: str


@dataclass
class PipelinePlan:
    steps: list[PlanStep]
    dataset_ids: dict[str, list[str]]  # split role -> dataset entity ids
    training_id: str
    label_column: str
    source: TabularDataset
    model_id: str
    logged_slope: float
    logged_intercept: float


@dataclass
class StepTrace:
    activity: str
    kind: str
    stage: int
    rows_in: int
    rows_out: int

    def as_dict(self) -> dict:
        return {
            "activity": self.activity,
            "kind": self.kind,
            "stage": self.stage,
            "rows_in": self.rows_in,
            "rows_out": self.rows_out,
        }


@dataclass
class ReplayResult:
    replayed_slope: float
    replayed_intercept: float
    logged_slope: float
    logged_intercept: float
    tolerance: float
    steps: list[StepTrace] = field(default_factory=list)

    @property
    def max_abs_diff(self) -> float:
        return max(
            abs(self.replayed_slope - self.logged_slope),
            abs(self.replayed_intercept - self.logged_intercept),
        )

    @property
    def passed(self) -> bool:
        return self.max_abs_diff <= self.tolerance

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "max_abs_diff": self.max_abs_diff,
            "tolerance": self.tolerance,
            "replayed": {"slope": self.replayed_slope, "intercept": self.replayed_intercept},
            "logged": {"slope": self.logged_slope, "intercept": self.logged_intercept},
            "steps": [s.as_dict() for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [
            f"{self.verdict} replay (max_abs_diff {self.max_abs_diff:.3e}, "
            f"tolerance {self.tolerance:.3e})",
            f"  replayed: slope {self.replayed_slope!r}, intercept {self.replayed_intercept!r}",
            f"  logged:   slope {self.logged_slope!r}, intercept {self.logged_intercept!r}",
        ]
        for s in self.steps:
            lines.append(f"  step {s.stage} {s.kind} {s.activity}: {s.rows_in} -> {s.rows_out} rows")
        return "\n".join(lines) + "\n"


# --- extraction -----------------------------------------------------------------

def _attr_text(element, key: str) -> str | None:
    value = element.attributes.first(key)
    if value is None:
        return None
    return value.lexical if isinstance(value, Literal) else str(value)


def _attr_float(element, key: str) -> float | None:
    text = _attr_text(element, key)
    if text is None:
        return None
    try:
        return float(text)
    except ValueError:
        return None


def _resolve_payload(doc: ProvDocument, element) -> TabularDataset:
    inline = _attr_text(element, "mlprov:payloadCsv")
    if inline is not None:
        return TabularDataset.from_csv(inline)
    rel_path = _attr_text(element, "mlprov:payloadPath")
    if rel_path is None:
        raise BrokenChainError(f"{element.id} carries no payload")
    if doc.base_dir is None:
        raise BrokenChainError(
            f"{element.id} references external payload {rel_path!r} "
            "but the document has no base directory"
        )
    path = doc.base_dir / rel_path
    try:
        data = TabularDataset.from_csv(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise BrokenChainError(f"cannot read payload {path}: {exc}") from exc
    digest = _attr_text(element, "mlprov:contentDigest")
    if digest is not None and data.digest() != digest:
        raise BrokenChainError(f"payload {path} does not match the logged digest")
    return data


def extract_pipeline(doc: ProvDocument) -> PipelinePlan:
    """Recover the training chain: source dataset, ordered steps, logged model."""
    dataset_ids: dict[str, list[str]] = {role: [] for role in SPLIT_ROLES}
    for entity in doc.elements(ElementKind.ENTITY):
        if str(entity.attributes.first("prov:type")) != "mlprov:Dataset":
            continue
        role = _attr_text(entity, "mlprov:role")
        if role in dataset_ids:
            dataset_ids[role].append(str(entity.id))
    for role in dataset_ids:
        dataset_ids[role].sort()
    if not dataset_ids["training"]:
        raise MissingTrainingDataError("no dataset entity with role=training")
    training_id = dataset_ids["training"][0]
    training = next(
        e for e in doc.elements(ElementKind.ENTITY) if str(e.id) == training_id
    )

    models = sorted(
        (
            e
            for e in doc.elements(ElementKind.ENTITY)
            if str(e.attributes.first("prov:type")) == "mlprov:Model"
            and _attr_text(e, "mlprov:modelKind") == "linear_regression"
        ),
        key=lambda e: str(e.id),
    )
    if not models:
        raise MissingModelError("no linear_regression model entity")
    model = models[0]
    logged_slope = _attr_float(model, "parameter:slope")
    logged_intercept = _attr_float(model, "parameter:intercept")
    if logged_slope is None or logged_intercept is None:
        raise MissingModelError(f"{model.id} has no logged slope/intercept parameters")

    used_by_step: dict[str, str] = {}
    generated_by_step: dict[str, str] = {}
    for rel in doc.relations:
        if rel.kind.value == "used":
            used_by_step.setdefault(str(rel.subject), str(rel.object))
        elif rel.kind.value == "wasGeneratedBy":
            generated_by_step.setdefault(str(rel.object), str(rel.subject))

    steps: list[PlanStep] = []
    for activity in doc.elements(ElementKind.ACTIVITY):
        if str(activity.attributes.first("prov:type")) != "mlprov:PreprocessingStep":
            continue
        aid = str(activity.id)
        stage_text = _attr_text(activity, "mlprov:pipelineStage")
        kind = _attr_text(activity, "mlprov:stepKind")
        if stage_text is None or kind is None:
            raise BrokenChainError(f"step {aid} lacks stage or kind attributes")
        input_id = used_by_step.get(aid)
        output_id = generated_by_step.get(aid)
        if input_id is None or output_id is None:
            raise BrokenChainError(f"step {aid} lacks a used input or generated output")
        params_text = _attr_text(activity, "mlprov:stepParams")
        params = json.loads(params_text) if params_text else {}
        steps.append(PlanStep(aid, kind, params, int(float(stage_text)), input_id, output_id))
    steps.sort(key=lambda s: (s.stage, s.activity_id))

    known_outputs = {s.output_id for s in steps}
    element_ids = doc.element_ids()
    for step in steps:
        if step.input_id not in element_ids and step.input_id not in known_outputs:
            raise BrokenChainError(f"step {step.activity_id} input {step.input_id} resolves to nothing")

    chain: list[PlanStep] = []
    current = training_id
    for step in steps:
        if step.input_id == current:
            chain.append(step)
            current = step.output_id

    source = _resolve_payload(doc, training)
    label_column = _attr_text(training, "mlprov:labelColumn") or source.columns[-1]
    return PipelinePlan(
        steps=chain,
        dataset_ids=dataset_ids,
        training_id=training_id,
        label_column=label_column,
        source=source,
        model_id=str(model.id),
        logged_slope=logged_slope,
        logged_intercept=logged_intercept,
    )


# --- step execution ---------------------------------------------------------------

def _target_columns(params: dict, data: TabularDataset) -> list[str]:
    column = params.get("column")
    if column is not None:
        if column not in data.columns:
            raise ValueError(f"step targets unknown column {column!r}")
        return [column]
    label = params.get("label")
    return [c for c in data.columns if c != label]


def _numeric_column(data: TabularDataset, name: str) -> list[float]:
    values = []
    for cell in data.column(name):
        if cell is None:
            raise ValueError(f"column {name!r} has missing values; dropna first")
        if isinstance(cell, str):
            raise ValueError(f"column {name!r} has non-numeric cell {cell!r}")
        values.append(float(cell))
    return values


def _with_column(data: TabularDataset, name: str, values: list[float]) -> TabularDataset:
    idx = data.columns.index(name)
    rows = [list(row) for row in data.rows]
    for row, value in zip(rows, values):
        row[idx] = value
    return TabularDataset(list(data.columns), rows, dict(data.meta))


def apply_step(kind: str, params: dict, data: TabularDataset) -> TabularDataset:
    """Re-execute one preprocessing step; pure, row-aligned."""
    if kind == "dropna":
        rows = [list(row) for row in data.rows if all(cell is not None for cell in row)]
        if not rows:
            raise EmptyAfterDropError("dropna removed every row")
        return TabularDataset(list(data.columns), rows, dict(data.meta))
    if kind == "standardize":
        out = data
        for name in _target_columns(params, data):
            values = _numeric_column(out, name)
            n = len(values)
            ddof = int(params.get("ddof", 0))
            if n == 0 or n - ddof <= 0:
                raise ZeroVarianceError(f"column {name!r}: not enough rows to standardize")
            mean = math.fsum(values) / n
            sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - ddof))
            if sd == 0.0:
                raise ZeroVarianceError(f"column {name!r} is constant")
            out = _with_column(out, name, [(v - mean) / sd for v in values])
        return out
    if kind == "minmax_normalize":
        out = data
        for name in _target_columns(params, data):
            values = _numeric_column(out, name)
            if not values:
                raise ZeroRangeError(f"column {name!r} has no rows")
            lo, hi = min(values), max(values)
            if hi == lo:
                raise ZeroRangeError(f"column {name!r} is constant")
            out = _with_column(out, name, [(v - lo) / (hi - lo) for v in values])
        return out
    if kind == "expand_dims":
        meta = dict(data.meta)
        meta["column_vector"] = params.get("column", "all")
        return TabularDataset(list(data.columns), [list(r) for r in data.rows], meta)
    raise UnknownStepKindError(f"unsupported step kind {kind!r}")


# --- regression --------------------------------------------------------------------

def fit_linear_regression(x: list[float], y: list[float]) -> tuple[float, float]:
    """Closed-form OLS: slope and intercept minimizing squared error."""
    if len(x) != len(y):
        raise LengthMismatchError(f"x has {len(x)} points, y has {len(y)}")
    n = len(x)
    if n < 2:
        raise DegenerateInputError("need at least two points")
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    sxx = math.fsum((xi - mean_x) ** 2 for xi in x)
    if sxx == 0.0:
        raise DegenerateInputError("x is constant")
    sxy = math.fsum((xi - mean_x) * (yi - mean_y) for xi, yi in zip(x, y))
    slope = sxy / sxx
    return slope, mean_y - slope * mean_x


def replay(doc: ProvDocument, tolerance: float = DEFAULT_TOLERANCE) -> ReplayResult:
    """Re-run the logged pipeline and compare the refit against the log."""
    plan = extract_pipeline(doc)
    table = plan.source
    traces: list[StepTrace] = []
    for step in plan.steps:
        rows_in = len(table.rows)
        params = dict(step.params)
        params.setdefault("label", plan.label_column)
        table = apply_step(step.kind, params, table)
        traces.append(StepTrace(step.activity_id, step.kind, step.stage, rows_in, len(table.rows)))
    features = [c for c in table.columns if c != plan.label_column]
    if len(features) != 1:
        raise DegenerateInputError(
            f"simple regression needs exactly one feature column, found {features}"
        )
    x = _numeric_column(table, features[0])
    y = _numeric_column(table, plan.label_column)
    slope, intercept = fit_linear_regression(x, y)
    return ReplayResult(
        replayed_slope=slope,
        replayed_intercept=intercept,
        logged_slope=plan.logged_slope,
        logged_intercept=plan.logged_intercept,
        tolerance=tolerance,
        steps=traces,
    )
