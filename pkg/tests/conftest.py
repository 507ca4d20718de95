"""Shared fixtures: the two experiment documents and JSON-level mutation helpers."""

from __future__ import annotations

import itertools
import json
import random
from pathlib import Path

import pytest

import provlint as pl
from provlint.cfmap import CfRecord, Counterfactual
from provlint.replay import apply_step, fit_linear_regression

GOLDEN_DIR = Path(__file__).parent / "golden"
FIXTURE_DIR = Path(__file__).parent / "fixtures"

LINREG_REQS = (FIXTURE_DIR / "linreg.req").read_text(encoding="utf-8")
CF_REQS = (FIXTURE_DIR / "cf.req").read_text(encoding="utf-8")


def fixed_clock(start: float = 1760554649.0, step: float = 1.0):
    counter = itertools.count()
    return lambda: start + step * next(counter)


def make_table(rng: random.Random, n: int, missing: int) -> pl.TabularDataset:
    """y = 2x + 1 + N(0, 0.5); a few x cells blanked for dropna to remove."""
    xs = [rng.uniform(0.0, 10.0) for _ in range(n)]
    rows = [[x, 2.0 * x + 1.0 + rng.gauss(0.0, 0.5)] for x in xs]
    for i in range(missing):
        rows[(i * 37 + 5) % n][0] = None
    return pl.TabularDataset(["x", "y"], rows)


def build_linreg_run(save_dir: Path, seed: int = 7, n: int = 300) -> pl.ProvDocument:
    """The linear-regression experiment document: datasets, the
    dropna/standardize/expand_dims pipeline for both splits, and the model
    fitted on the preprocessed training data."""
    rng = random.Random(seed)
    run = pl.start_run(
        "http://www.example.org/",
        "linear_regression",
        save_dir,
        clock=fixed_clock(),
        agent="analyst",
        source_code_ref="notebooks/linear_regression.ipynb",
        environment_ref="python-3.10",
    )
    train = make_table(rng, n, missing=3)
    test = make_table(rng, max(2, n // 4), missing=1)
    train_id = run.log_dataset(
        "train_data", train, "training",
        label_column="y", data_kind="tabular", data_source="synthetic-generator",
        fidelity="synthetic", collection_method="simulation", collector="analyst",
        collected_on="2025-10-15", split_fraction=0.8,
    )
    test_id = run.log_dataset(
        "test_data", test, "testing", label_column="y", fidelity="synthetic",
        split_fraction=0.2,
    )

    def pipeline(prefix: str, data: pl.TabularDataset, dataset_id):
        cleaned = apply_step("dropna", {}, data)
        _, out1 = run.log_preprocessing_step(
            f"dropna_{prefix}_data_cleanup", "dropna", {}, dataset_id, cleaned)
        scaled = apply_step("standardize", {"column": "x"}, cleaned)
        _, out2 = run.log_preprocessing_step(
            f"standardize_{prefix}_data", "standardize", {"column": "x"}, out1, scaled)
        expanded = apply_step("expand_dims", {"column": "x"}, scaled)
        _, out3 = run.log_preprocessing_step(
            f"expand_dims_{prefix}_data", "expand_dims", {"column": "x"}, out2, expanded)
        return expanded, out3

    train_final, train_out = pipeline("training", train, train_id)
    pipeline("testing", test, test_id)
    slope, intercept = fit_linear_regression(
        [r[0] for r in train_final.rows], [r[1] for r in train_final.rows]
    )
    run.log_model(
        "lr", "linear_regression",
        {"slope": slope, "intercept": intercept},
        {"method": "ols", "learning_rate": 0.01, "batch_size": 32},
        train_out,
    )
    run.log_artifact("pythonVersion", "3.10")
    return run.end_run(create_graph=True)


def cf_fixture_records() -> list[CfRecord]:
    """Three fixed adult-income-style records; all counterfactuals reach the
    desired class, per-record feature keys identical."""
    f = ["age", "education", "hours per week"]

    def rec(query, cfs, features_to_vary=None):
        return CfRecord(
            query=dict(zip(f, query)),
            query_class="<=50K",
            desired_class=">50K",
            counterfactuals=[Counterfactual(dict(zip(f, v)), ">50K") for v in cfs],
            features_to_vary=features_to_vary,
        )

    return [
        rec([39, 13, 40], [[47, 13, 40], [39, 16, 45]]),
        rec([29, 10, 38], [[29, 14, 38], [45, 10, 60]], features_to_vary=f),
        rec([51, 9, 35], [[51, 13, 35], [51, 9, 55], [58, 12, 42]]),
    ]


def build_cf_run(save_dir: Path) -> pl.ProvDocument:
    """The counterfactual experiment document: classifier run with feature
    selection and three logged explanation records."""
    run = pl.start_run(
        "http://www.example.org/", "income_classifier", save_dir, clock=fixed_clock()
    )
    columns = ["age", "education", "hours per week", "income"]
    train = pl.TabularDataset(columns, [
        [39, 13, 40, 0], [50, 13, 13, 0], [38, 9, 40, 0], [53, 7, 40, 0],
        [28, 13, 40, 1], [37, 14, 40, 1], [49, 5, 16, 0], [52, 9, 45, 1],
    ])
    test = pl.TabularDataset(columns, [[31, 14, 50, 1], [42, 10, 40, 0]])
    train_id = run.log_dataset(
        "train_data", train, "training", label_column="income",
        data_kind="tabular", data_source="census-extract", fidelity="real",
        collection_method="survey", collector="census-bureau", collected_on="1994-05-01",
        class_proportions={"<=50K": 0.625, ">50K": 0.375},
    )
    run.log_dataset("test_data", test, "testing", label_column="income",
                    class_proportions={"<=50K": 0.5, ">50K": 0.5})
    cleaned = apply_step("dropna", {}, train)
    _, cleaned_id = run.log_preprocessing_step(
        "dropna_training_data_cleanup", "dropna", {}, train_id, cleaned)
    selection_id = run.log_feature_selection(
        ["age", "education", "hours per week"], cleaned_id)
    model_id = run.log_model(
        "clf", "binary_classifier",
        {"num_features": 3}, {"learning_rate": 0.01, "batch_size": 32},
        selection_id,
    )
    for record in cf_fixture_records():
        run.log_counterfactuals(record, model_id)
    return run.end_run()


# --- JSON-level mutations (operate on serialized documents) --------------------

def mutated(doc: pl.ProvDocument, edit) -> pl.ProvDocument:
    payload = json.loads(pl.serialize(doc))
    edit(payload)
    out, _ = pl.parse(json.dumps(payload))
    return out


def delete_element(section: str, element_id: str):
    def edit(payload):
        del payload[section][element_id]
    return edit


def strip_attr_prefix(element_id: str, prefix: str):
    def edit(payload):
        entry = payload["entity"][element_id]
        payload["entity"][element_id] = {
            k: v for k, v in entry.items() if not k.startswith(prefix)
        }
    return edit


def shift_parameter(element_id: str, key: str, delta: float):
    def edit(payload):
        cell = payload["entity"][element_id][key]
        cell["$"] = repr(float(cell["$"]) + delta)
    return edit


# --- fixtures -------------------------------------------------------------------

@pytest.fixture()
def linreg_doc(tmp_path) -> pl.ProvDocument:
    return build_linreg_run(tmp_path / "runs")


@pytest.fixture()
def cf_doc(tmp_path) -> pl.ProvDocument:
    return build_cf_run(tmp_path / "runs")


@pytest.fixture()
def linreg_reqs():
    return pl.parse_reqs(LINREG_REQS)


@pytest.fixture()
def cf_reqs():
    return pl.parse_reqs(CF_REQS)
