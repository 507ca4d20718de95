"""provlint: provenance-backed verification of ML interpretability requirements.

Store ML development provenance as PROV-JSON documents, then check it:
structural validation, a requirement DSL with hierarchical rollup, lineage
reachability, linear-regression replay, and counterfactual input-space maps.
"""

from .cfmap import (
    CfRecord,
    Counterfactual,
    change_frequency,
    collect_records,
    coverage_summary,
    export_points,
    parse_cf_payload,
    region_bounds,
    render_cf_payload,
    validate_record,
)
from .diagnostics import Diagnostic, Severity, has_errors
from .dot import export_dot
from .graph import LineageGraph, lineage_graph, reachable
from .mlschema import RunBuilder, TabularDataset, start_run
from .model import (
    Attributes,
    Element,
    ElementKind,
    Literal,
    ProvDocument,
    QualifiedName,
    Relation,
    RelationKind,
    qname,
)
from .provjson import parse, parse_file, serialize, write_file
from .replay import (
    PipelinePlan,
    ReplayResult,
    apply_step,
    extract_pipeline,
    fit_linear_regression,
    replay,
)
from .requirements import (
    RequirementSpec,
    VerificationReport,
    eval_selector,
    parse_reqs,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "Attributes",
    "CfRecord",
    "Counterfactual",
    "Diagnostic",
    "Element",
    "ElementKind",
    "LineageGraph",
    "Literal",
    "PipelinePlan",
    "ProvDocument",
    "QualifiedName",
    "Relation",
    "RelationKind",
    "ReplayResult",
    "RequirementSpec",
    "RunBuilder",
    "Severity",
    "TabularDataset",
    "VerificationReport",
    "apply_step",
    "change_frequency",
    "collect_records",
    "coverage_summary",
    "eval_selector",
    "export_dot",
    "export_points",
    "extract_pipeline",
    "fit_linear_regression",
    "has_errors",
    "lineage_graph",
    "parse",
    "parse_cf_payload",
    "parse_file",
    "parse_reqs",
    "qname",
    "reachable",
    "region_bounds",
    "render_cf_payload",
    "replay",
    "serialize",
    "start_run",
    "validate_record",
    "verify",
    "write_file",
]
