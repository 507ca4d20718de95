"""Requirement DSL: parsing, clause evaluation, and hierarchical rollup.

Line-oriented grammar (``#`` starts a comment, blank lines are skipped)::

    REQ <id> "<description>" [PARENT <id>] : <clause> {AND <clause>}
    REQ <id> "<description>" [PARENT <id>]          # rollup-only node

    clause := EXISTS <kind> WHERE <pred> {, <pred>}
            | COUNT  <kind> WHERE <pred> {, <pred>} (>=|=|<=) <n>
            | TRACE FROM <pred> {, <pred>} TO <pred> {, <pred>}
    pred   := <attribute-key> (=|~=) <value>

Kinds are entity/activity/agent; TRACE predicates select entities. Values
are bare tokens or double-quoted strings (quote values containing spaces
or commas; ``\\"`` and ``\\\\`` escape inside quotes). ``=`` compares
lexical forms after canonical decimal normalization, so ``2.0`` matches a
stored ``2``; ``~=`` is a case-sensitive substring test, and ``~= ""``
doubles as a key-presence check. Unknown attribute keys match nothing.

Verdict semantics: a leaf passes iff all its clauses hold; a parent passes
iff its own clauses hold and every child passes. TRACE is universally
quantified over targets and existentially over sources: every target must
reach at least one source along lineage edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

from .errors import (
    DslSyntaxError,
    DuplicateRequirementIdError,
    ParentCycleError,
    UnknownParentError,
)
from .graph import lineage_graph
from .model import (
    AttrValue,
    Element,
    ElementKind,
    Literal,
    ProvDocument,
    QualifiedName,
    canonical_decimal,
)

PASS, FAIL = "PASS", "FAIL"


@dataclass(frozen=True)
class Predicate:
    key: str
    op: str  # "=" or "~="
    value: str


@dataclass(frozen=True)
class ExistsClause:
    kind: ElementKind
    predicates: tuple[Predicate, ...]


@dataclass(frozen=True)
class CountClause:
    kind: ElementKind
    predicates: tuple[Predicate, ...]
    comparator: str  # ">=", "=", "<="
    count: int


@dataclass(frozen=True)
class TraceClause:
    sources: tuple[Predicate, ...]
    targets: tuple[Predicate, ...]


Clause = Union[ExistsClause, CountClause, TraceClause]


@dataclass
class RequirementSpec:
    id: str
    description: str
    parent: str | None = None
    clauses: tuple[Clause, ...] = ()


# --- tokenizer -------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    type: str  # WORD, STRING, COMMA
    text: str
    column: int


def _tokenize(line: str, lineno: int) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(line)
    while i < n:
        c = line[i]
        if c.isspace():
            i += 1
            continue
        if c == "#":
            break
        col = i + 1
        if c == '"':
            i += 1
            buf: list[str] = []
            while i < n and line[i] != '"':
                if line[i] == "\\" and i + 1 < n:
                    i += 1
                buf.append(line[i])
                i += 1
            if i >= n:
                raise DslSyntaxError("unterminated string", lineno, col)
            i += 1
            tokens.append(_Token("STRING", "".join(buf), col))
        elif c == ",":
            tokens.append(_Token("COMMA", ",", col))
            i += 1
        else:
            j = i
            while j < n and not line[j].isspace() and line[j] not in '",#':
                j += 1
            tokens.append(_Token("WORD", line[i:j], col))
            i = j
    return tokens


class _LineParser:
    def __init__(self, tokens: list[_Token], lineno: int, length: int):
        self.tokens = tokens
        self.lineno = lineno
        self.length = length
        self.pos = 0

    def fail(self, message: str) -> DslSyntaxError:
        column = self.tokens[self.pos].column if self.pos < len(self.tokens) else self.length + 1
        return DslSyntaxError(message, self.lineno, column)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> _Token:
        token = self.peek()
        if token is None:
            raise self.fail("unexpected end of line")
        self.pos += 1
        return token

    def expect_word(self, text: str) -> None:
        token = self.take()
        if token.type != "WORD" or token.text != text:
            raise self.fail(f"expected {text!r}, got {token.text!r}")

    def word(self, what: str) -> str:
        token = self.take()
        if token.type != "WORD":
            raise self.fail(f"expected {what}, got {token.text!r}")
        return token.text


_KINDS = {k.value: k for k in ElementKind}
_COMPARATORS = (">=", "=", "<=")


def _parse_predicates(parser: _LineParser) -> tuple[Predicate, ...]:
    predicates = []
    while True:
        key = parser.word("attribute key")
        op_token = parser.take()
        if op_token.type != "WORD" or op_token.text not in ("=", "~="):
            raise parser.fail(f"expected = or ~=, got {op_token.text!r}")
        value_token = parser.take()
        if value_token.type not in ("WORD", "STRING"):
            raise parser.fail(f"expected a value, got {value_token.text!r}")
        predicates.append(Predicate(key, op_token.text, value_token.text))
        nxt = parser.peek()
        if nxt is not None and nxt.type == "COMMA":
            parser.take()
            continue
        break
    return tuple(predicates)


def _parse_clause(parser: _LineParser) -> Clause:
    head = parser.word("clause keyword")
    if head == "EXISTS" or head == "COUNT":
        kind_text = parser.word("element kind")
        if kind_text not in _KINDS:
            raise parser.fail(f"unknown element kind {kind_text!r}")
        parser.expect_word("WHERE")
        predicates = _parse_predicates(parser)
        if head == "EXISTS":
            return ExistsClause(_KINDS[kind_text], predicates)
        comparator = parser.word("comparator")
        if comparator not in _COMPARATORS:
            raise parser.fail(f"expected one of {_COMPARATORS}, got {comparator!r}")
        count_text = parser.word("count")
        if not count_text.isdigit():
            raise parser.fail(f"expected a non-negative integer, got {count_text!r}")
        return CountClause(_KINDS[kind_text], predicates, comparator, int(count_text))
    if head == "TRACE":
        parser.expect_word("FROM")
        sources = _parse_predicates(parser)
        parser.expect_word("TO")
        targets = _parse_predicates(parser)
        return TraceClause(sources, targets)
    raise parser.fail(f"unknown clause keyword {head!r}")


def parse_reqs(text: str) -> list[RequirementSpec]:
    """Parse requirement source; raises DslSyntaxError and forest errors."""
    specs: list[RequirementSpec] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line, lineno)
        if not tokens:
            continue
        parser = _LineParser(tokens, lineno, len(line))
        parser.expect_word("REQ")
        req_id = parser.word("requirement id")
        desc_token = parser.take()
        if desc_token.type != "STRING":
            raise parser.fail("expected a quoted description")
        parent = None
        nxt = parser.peek()
        if nxt is not None and nxt.type == "WORD" and nxt.text == "PARENT":
            parser.take()
            parent = parser.word("parent id")
            nxt = parser.peek()
        clauses: list[Clause] = []
        if nxt is not None:
            if nxt.type != "WORD" or nxt.text != ":":
                raise parser.fail(f"expected ':' or end of line, got {nxt.text!r}")
            parser.take()
            clauses.append(_parse_clause(parser))
            while (tok := parser.peek()) is not None:
                if tok.type != "WORD" or tok.text != "AND":
                    raise parser.fail(f"expected AND or end of line, got {tok.text!r}")
                parser.take()
                clauses.append(_parse_clause(parser))
        specs.append(RequirementSpec(req_id, desc_token.text, parent, tuple(clauses)))

    seen = set()
    for spec in specs:
        if spec.id in seen:
            raise DuplicateRequirementIdError(f"requirement id {spec.id!r} appears twice")
        seen.add(spec.id)
    by_id = {spec.id: spec for spec in specs}
    for spec in specs:
        if spec.parent is not None and spec.parent not in by_id:
            raise UnknownParentError(f"{spec.id} names unknown parent {spec.parent!r}")
    for spec in specs:
        chain = {spec.id}
        node = spec
        while node.parent is not None:
            if node.parent in chain:
                raise ParentCycleError(f"PARENT links cycle through {node.parent}")
            chain.add(node.parent)
            node = by_id[node.parent]
    return specs


# --- evaluation ------------------------------------------------------------------

def _canonical_lexical(value: AttrValue) -> str:
    if isinstance(value, QualifiedName):
        return str(value)
    text = value.lexical if isinstance(value, Literal) else value
    canon = canonical_decimal(text)
    return canon if canon is not None else text


def _matches(element: Element, predicate: Predicate) -> bool:
    values = element.attributes.get_all(predicate.key)
    if predicate.op == "=":
        wanted = canonical_decimal(predicate.value)
        if wanted is None:
            wanted = predicate.value
        return any(_canonical_lexical(v) == wanted for v in values)
    return any(predicate.value in _canonical_lexical(v) for v in values)


def eval_selector(doc: ProvDocument, kind: ElementKind, predicates) -> set[str]:
    """Ids of elements of ``kind`` satisfying every predicate."""
    return {
        str(e.id)
        for e in doc.elements(kind)
        if all(_matches(e, p) for p in predicates)
    }


@dataclass
class RequirementResult:
    id: str
    description: str
    passed: bool
    witnesses: list[str] = field(default_factory=list)
    counterexamples: list[str] = field(default_factory=list)
    children: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return PASS if self.passed else FAIL

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "verdict": self.verdict,
            "witnesses": self.witnesses,
            "counterexamples": self.counterexamples,
            "children": self.children,
        }


@dataclass
class VerificationReport:
    results: list[RequirementResult]
    passed: bool

    def result(self, req_id: str) -> RequirementResult:
        for r in self.results:
            if r.id == req_id:
                return r
        raise KeyError(req_id)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "requirements": [r.as_dict() for r in self.results]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            lines.append(f"{r.verdict} {r.id} {r.description}")
            for cx in r.counterexamples:
                lines.append(f"  counterexample: {cx}")
        return "\n".join(lines) + "\n"


_COMPARE = {">=": lambda a, b: a >= b, "=": lambda a, b: a == b, "<=": lambda a, b: a <= b}


def verify(doc: ProvDocument, reqs: list[RequirementSpec]) -> VerificationReport:
    """Evaluate requirements against the document and roll verdicts up."""
    graph = lineage_graph(doc)
    children: dict[str, list[str]] = {r.id: [] for r in reqs}
    for r in reqs:
        if r.parent is not None:
            children[r.parent].append(r.id)

    own: dict[str, tuple[bool, set[str], set[str]]] = {}
    for r in reqs:
        ok = True
        witnesses: set[str] = set()
        counterexamples: set[str] = set()
        for clause in r.clauses:
            if isinstance(clause, ExistsClause):
                ids = eval_selector(doc, clause.kind, clause.predicates)
                ok = ok and bool(ids)
                witnesses.update(ids)
            elif isinstance(clause, CountClause):
                ids = eval_selector(doc, clause.kind, clause.predicates)
                ok = ok and _COMPARE[clause.comparator](len(ids), clause.count)
                witnesses.update(ids)
            else:
                sources = eval_selector(doc, ElementKind.ENTITY, clause.sources)
                targets = eval_selector(doc, ElementKind.ENTITY, clause.targets)
                unreachable = {
                    t for t in targets if not (graph.reachable_from(t) & sources)
                }
                if unreachable:
                    ok = False
                    counterexamples.update(unreachable)
                else:
                    witnesses.update(targets)
        own[r.id] = (ok, witnesses, counterexamples)

    verdicts: dict[str, bool] = {}

    def rollup(req_id: str) -> bool:
        if req_id not in verdicts:
            child_ok = all(rollup(c) for c in sorted(children[req_id]))
            verdicts[req_id] = own[req_id][0] and child_ok
        return verdicts[req_id]

    results = []
    for r in sorted(reqs, key=lambda r: r.id):
        ok, witnesses, counterexamples = own[r.id]
        results.append(
            RequirementResult(
                r.id,
                r.description,
                rollup(r.id),
                sorted(witnesses),
                sorted(counterexamples),
                sorted(children[r.id]),
            )
        )
    roots = [r.id for r in reqs if r.parent is None]
    return VerificationReport(results, all(rollup(rid) for rid in roots))
