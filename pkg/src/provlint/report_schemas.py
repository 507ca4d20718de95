"""Published JSON Schemas for the machine-readable CLI reports.

These are the stable contracts for ``--format json`` output (and the cfmap
summary file). Field names here are frozen; additions are allowed, removals
are not.
"""

_DIAGNOSTIC = {
    "type": "object",
    "required": ["severity", "code", "message"],
    "properties": {
        "severity": {"enum": ["warning", "error"]},
        "code": {"type": "string"},
        "message": {"type": "string"},
        "subject": {"type": "string"},
    },
    "additionalProperties": False,
}

VALIDATE_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["valid", "diagnostics"],
    "properties": {
        "valid": {"type": "boolean"},
        "strict": {"type": "boolean"},
        "diagnostics": {"type": "array", "items": _DIAGNOSTIC},
    },
    "additionalProperties": False,
}

VERIFY_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["passed", "requirements"],
    "properties": {
        "passed": {"type": "boolean"},
        "requirements": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "id", "description", "verdict",
                    "witnesses", "counterexamples", "children",
                ],
                "properties": {
                    "id": {"type": "string"},
                    "description": {"type": "string"},
                    "verdict": {"enum": ["PASS", "FAIL"]},
                    "witnesses": {"type": "array", "items": {"type": "string"}},
                    "counterexamples": {"type": "array", "items": {"type": "string"}},
                    "children": {"type": "array", "items": {"type": "string"}},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

REPLAY_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["verdict", "max_abs_diff", "replayed", "logged", "steps"],
    "properties": {
        "verdict": {"enum": ["PASS", "FAIL"]},
        "max_abs_diff": {"type": "number"},
        "tolerance": {"type": "number"},
        "replayed": {
            "type": "object",
            "required": ["slope", "intercept"],
            "properties": {"slope": {"type": "number"}, "intercept": {"type": "number"}},
        },
        "logged": {
            "type": "object",
            "required": ["slope", "intercept"],
            "properties": {"slope": {"type": "number"}, "intercept": {"type": "number"}},
        },
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["activity", "kind", "stage", "rows_in", "rows_out"],
                "properties": {
                    "activity": {"type": "string"},
                    "kind": {"type": "string"},
                    "stage": {"type": "integer"},
                    "rows_in": {"type": "integer"},
                    "rows_out": {"type": "integer"},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

CFMAP_SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["change_frequency", "region_bounds", "point_count"],
    "properties": {
        "change_frequency": {
            "type": "object",
            "additionalProperties": {"type": "number", "minimum": 0, "maximum": 1},
        },
        "region_bounds": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
        },
        "point_count": {
            "type": "object",
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "query_count": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}
