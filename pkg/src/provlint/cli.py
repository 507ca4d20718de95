"""Command-line interface.

Subcommands: validate, verify, graph, replay, cfmap. Exit codes follow the
CI contract: 0 success, 1 verification/validation/replay failure, 2 invalid
input or environment. Reports go to stdout, errors to stderr. Setting
PROVLINT_NO_COLOR (or piping output) disables ANSI styling.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

from . import cfmap as cfmap_mod
from . import provjson
from .diagnostics import Diagnostic, Severity, has_errors
from .dot import export_dot
from .errors import ProvlintError
from .replay import DEFAULT_TOLERANCE, replay
from .requirements import parse_reqs, verify

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

_GREEN, _RED, _YELLOW, _RESET = "\x1b[32m", "\x1b[31m", "\x1b[33m", "\x1b[0m"


def _color_enabled() -> bool:
    if os.environ.get("PROVLINT_NO_COLOR"):
        return False
    return sys.stdout.isatty()


def _paint(text: str) -> str:
    if not _color_enabled():
        return text
    out = []
    for line in text.splitlines():
        for word, color in (("PASS", _GREEN), ("FAIL", _RED),
                            ("error:", _RED), ("warning:", _YELLOW)):
            if line.startswith(word):
                line = color + word + _RESET + line[len(word):]
                break
        out.append(line)
    return "\n".join(out) + ("\n" if text.endswith("\n") else "")


def _load(path: str):
    return provjson.parse_file(Path(path), strict=False)


def cmd_validate(args) -> int:
    doc, diags = _load(args.document)
    if args.strict:
        diags = [
            Diagnostic(d.code, d.message, Severity.ERROR, d.subject)
            if d.code == "unknown-section" else d
            for d in diags
        ]
    diags = diags + doc.validate(strict=args.strict)
    valid = not has_errors(diags)
    if args.format == "json":
        report = {
            "valid": valid,
            "strict": bool(args.strict),
            "diagnostics": [d.as_dict() for d in diags],
        }
        print(json.dumps(report, indent=2))
    else:
        for d in diags:
            print(_paint(d.render()))
        print(_paint(f"{'PASS' if valid else 'FAIL'} validate {args.document}"))
    return EXIT_OK if valid else EXIT_FAIL


def cmd_verify(args) -> int:
    doc, _ = _load(args.document)
    reqs = parse_reqs(Path(args.reqs).read_text(encoding="utf-8"))
    report = verify(doc, reqs)
    if args.format == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(_paint(report.to_text()))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_graph(args) -> int:
    doc, _ = _load(args.document)
    Path(args.output).write_text(export_dot(doc), encoding="utf-8")
    if args.svg:
        renderer = shutil.which("dot")
        if renderer is None:
            print("error: no 'dot' renderer on PATH; DOT file was still written",
                  file=sys.stderr)
            return EXIT_USAGE
        result = subprocess.run(
            [renderer, "-Tsvg", str(args.output), "-o", str(args.svg)],
            capture_output=True,
            text=True,
        )
        if result.returncode != 0:
            print(f"error: dot failed: {result.stderr.strip()}", file=sys.stderr)
            return EXIT_USAGE
    return EXIT_OK


def cmd_replay(args) -> int:
    doc, _ = _load(args.document)
    result = replay(doc, tolerance=args.tolerance)
    if args.format == "json":
        sys.stdout.write(result.to_json())
    else:
        sys.stdout.write(_paint(result.to_text()))
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_cfmap(args) -> int:
    doc, _ = _load(args.document)
    features = [f.strip() for f in args.features.split(",") if f.strip()]
    csv_text = cfmap_mod.export_points(doc, features)
    Path(args.out).write_text(csv_text, encoding="utf-8", newline="")
    if args.summary:
        summary = cfmap_mod.coverage_summary(cfmap_mod.collect_records(doc))
        Path(args.summary).write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="provlint",
        description="Verify ML interpretability requirements from PROV-JSON provenance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structural validation of a document")
    p.add_argument("document")
    p.add_argument("--strict", action="store_true",
                   help="treat dangling references and kind mismatches as errors")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("verify", help="evaluate a requirement file against a document")
    p.add_argument("document")
    p.add_argument("--reqs", required=True, help="requirement file (.req)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("graph", help="export the document as Graphviz DOT")
    p.add_argument("document")
    p.add_argument("-o", "--output", required=True, help="DOT output path")
    p.add_argument("--svg", help="also render SVG via the external 'dot' tool")
    p.set_defaults(handler=cmd_graph)

    p = sub.add_parser("replay", help="re-run the logged pipeline and compare the fit")
    p.add_argument("document")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_replay)

    p = sub.add_parser("cfmap", help="export counterfactual points and summaries")
    p.add_argument("document")
    p.add_argument("--features", required=True, help="2-3 comma-separated feature names")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--summary", help="also write a coverage summary JSON")
    p.set_defaults(handler=cmd_cfmap)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ProvlintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
