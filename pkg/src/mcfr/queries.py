"""Temporal query language: a single top-level path quantifier over a
boolean state predicate.

Supported quantifier forms (with accepted synonyms):

    E<>  phi   -- some reachable state satisfies phi        (synonym: EF)
    A[]  phi   -- phi holds in every reachable state        (synonym: AG)
    E[]  phi   -- some maximal path satisfies phi globally
    A<>  phi   -- every maximal path eventually reaches phi

Nested quantifiers are rejected.  The predicate grammar is shared with model
guards; `->` is accepted as a synonym for `imply`, and dataset-style atoms
like `completed[prereq]` or `completed(prereq)` lex to flat identifiers that
resolve only through an alias table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import BOOL, Expr, LocAtom, Model, Name, VarRef
from .dsl import (
    Diagnostic,
    SourceSpan,
    TokenCursor,
    _ParseAbort,
    parse_expression,
    render_expr,
    resolve_expr,
    tokenize,
    typecheck_expr,
)

EXISTS_EVENTUALLY = "E<>"
FORALL_ALWAYS = "A[]"
EXISTS_ALWAYS = "E[]"
FORALL_EVENTUALLY = "A<>"

QUANTIFIERS = (EXISTS_EVENTUALLY, FORALL_ALWAYS, EXISTS_ALWAYS, FORALL_EVENTUALLY)

_QUANTIFIER_RE = re.compile(r"\s*(E<>|A\[\]|E\[\]|A<>|\bEF\b|\bAG\b)\s*")
_SYNONYMS = {"EF": EXISTS_EVENTUALLY, "AG": FORALL_ALWAYS}
_NESTED_RE = re.compile(r"(E<>|A\[\]|E\[\]|A<>|\bEF\b|\bAG\b)")


@dataclass(frozen=True)
class Query:
    """A parsed but unbound query."""

    quantifier: str
    predicate: Expr

    def render(self) -> str:
        return f"{self.quantifier} ({render_expr(self.predicate)})"


@dataclass
class BoundQuery:
    """A query whose atoms all resolved against a specific model."""

    query: Query
    model: Model
    predicate: Expr  # resolved and type-checked
    bindings: dict = field(default_factory=dict)  # source text -> resolved target

    @property
    def quantifier(self) -> str:
        return self.query.quantifier

    def render(self) -> str:
        return f"{self.quantifier} ({render_expr(self.predicate)})"


@dataclass
class QueryParseResult:
    query: Query | None
    diagnostics: list

    @property
    def ok(self) -> bool:
        return self.query is not None


@dataclass
class BindResult:
    bound: BoundQuery | None
    diagnostics: list

    @property
    def ok(self) -> bool:
        return self.bound is not None

    def unknown_names(self) -> list:
        out = []
        for d in self.diagnostics:
            if d.code == "unknown-identifier":
                m = re.search(r"'(.*)'", d.message)
                if m:
                    out.append(m.group(1))
        return out


def parse_query(text: str) -> QueryParseResult:
    """Parse a query string into a quantifier plus predicate AST."""
    diags: list = []
    m = _QUANTIFIER_RE.match(text)
    if not m:
        span = SourceSpan(1, 1, 1, max(len(text), 1), 0, len(text))
        diags.append(Diagnostic("error", "syntax",
                                "query must start with E<>, A[], E[] or A<> "
                                "(or the synonyms EF / AG)", span))
        return QueryParseResult(None, diags)
    quantifier = _SYNONYMS.get(m.group(1), m.group(1))
    rest = text[m.end():]
    nested = _NESTED_RE.search(rest)
    if nested:
        offset = m.end() + nested.start()
        span = SourceSpan(1, offset + 1, 1, offset + 1 + len(nested.group(1)),
                          offset, offset + len(nested.group(1)))
        diags.append(Diagnostic("error", "nesting",
                                f"nested quantifier '{nested.group(1)}' is not supported",
                                span))
        return QueryParseResult(None, diags)
    tokens, lex_diags = tokenize(rest)
    diags.extend(lex_diags)
    if any(d.severity == "error" for d in diags):
        return QueryParseResult(None, diags)
    cur = TokenCursor(tokens, diags)
    try:
        predicate = parse_expression(cur)
        if not cur.at("eof"):
            cur.error(f"trailing input after predicate: {cur.current.value!r}")
    except _ParseAbort:
        return QueryParseResult(None, diags)
    return QueryParseResult(Query(quantifier, predicate), diags)


def bind_query(query: Query, model: Model, aliases: dict | None = None) -> BindResult:
    """Resolve every identifier in the predicate against a model.

    Precedence: alias map, then dotted `Process.Location` atoms, then model
    variables.  All unknown identifiers are reported (named verbatim), not
    just the first, so a failed translation surfaces every bad atom at once.
    """
    diags: list = []
    vars_by_name = {v.name: v for v in model.vars}
    process_locations = {p.name: set(p.locations) for p in model.processes}
    resolved = resolve_expr(query.predicate, vars_by_name, process_locations,
                            aliases or {}, diags)
    if resolved is None:
        return BindResult(None, diags)
    t = typecheck_expr(resolved, vars_by_name, diags)
    if t is None:
        return BindResult(None, diags)
    if t != BOOL:
        span = getattr(query.predicate, "span", None) or SourceSpan(1, 1, 1, 1, 0, 0)
        diags.append(Diagnostic("error", "type", "query predicate must be boolean", span))
        return BindResult(None, diags)
    bindings = {}
    _collect_bindings(query.predicate, resolved, bindings)
    return BindResult(BoundQuery(query, model, resolved, bindings), diags)


def _collect_bindings(original, resolved, into: dict):
    from .core import Binary, Not

    if isinstance(original, Name):
        if isinstance(resolved, VarRef):
            into[original.text] = ("variable", resolved.name)
        elif isinstance(resolved, LocAtom):
            into[original.text] = ("location", resolved.process, resolved.location)
    elif isinstance(original, Not):
        _collect_bindings(original.operand, resolved.operand, into)
    elif isinstance(original, Binary):
        _collect_bindings(original.left, resolved.left, into)
        _collect_bindings(original.right, resolved.right, into)


def parse_and_bind(text: str, model: Model, aliases: dict | None = None) -> BindResult:
    """Convenience: parse then bind, pooling diagnostics."""
    parsed = parse_query(text)
    if not parsed.ok:
        return BindResult(None, parsed.diagnostics)
    result = bind_query(parsed.query, model, aliases)
    return BindResult(result.bound, parsed.diagnostics + result.diagnostics)
