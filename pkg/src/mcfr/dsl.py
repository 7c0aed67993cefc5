"""Text format for model definitions (`.mcm` files) and the shared
expression grammar.

The format is line-oriented and block-structured:

    model <name>
    var int[<lo>,<hi>] <name> = <int>;
    var bool <name> = true|false;
    process <name> {
      init <location>;
      loc <l1>, <l2>, ...;
      trans <src> -> <dst> { guard <expr>; update <v> = <expr>, ...; label "<text>"; }
    }

Guard defaults to `true`, updates to none, label to `src->dst`.  Comments run
from `//` to end of line.  The expression grammar is shared verbatim with the
query language so model guards and temporal queries read identically; see the
README's DSL reference for the full grammar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import core
from .core import (
    BOOL,
    INT,
    Binary,
    BoolLit,
    Expr,
    IntLit,
    LocAtom,
    Model,
    Name,
    Not,
    Process,
    Transition,
    VarDecl,
    VarRef,
)

KEYWORDS = frozenset(
    ["model", "var", "int", "bool", "true", "false", "process", "init", "loc",
     "trans", "guard", "update", "label", "imply"]
)

TWO_CHAR_OPS = ("&&", "||", "==", "!=", "<=", ">=", "->")
ONE_CHAR_OPS = "!<>+-*(){}[];,=."


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    end_line: int
    end_column: int
    start: int
    end: int

    def merge(self, other: "SourceSpan") -> "SourceSpan":
        a, b = (self, other) if self.start <= other.start else (other, self)
        return SourceSpan(a.line, a.column, b.end_line, b.end_column, a.start, b.end)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: SourceSpan

    def format(self, filename: str = "<input>") -> str:
        return (
            f"{filename}:{self.span.line}:{self.span.column}: "
            f"{self.severity}[{self.code}]: {self.message}"
        )


@dataclass
class ParseResult:
    model: Model | None
    diagnostics: list

    @property
    def ok(self) -> bool:
        return self.model is not None

    def errors(self) -> list:
        return [d for d in self.diagnostics if d.severity == "error"]


class _Token:
    __slots__ = ("kind", "value", "span")

    def __init__(self, kind, value, span):
        self.kind = kind  # "ident" | "int" | "string" | "op" | "eof"
        self.value = value
        self.span = span

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r})"


class _ParseAbort(Exception):
    """Internal: stop at the first syntax error."""


def tokenize(text: str) -> tuple[list, list]:
    """Lex the input; returns (tokens, diagnostics)."""
    tokens = []
    diags = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def span_from(start_i, start_line, start_col):
        return SourceSpan(start_line, start_col, line, col, start_i, i)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        start_i, start_line, start_col = i, line, col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            val = int(text[i:j])
            col += j - i
            i = j
            tokens.append(_Token("int", val, span_from(start_i, start_line, start_col)))
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            col += j - i
            i = j
            tokens.append(_Token("ident", word, span_from(start_i, start_line, start_col)))
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                col += j - i
                i = j
                diags.append(
                    Diagnostic("error", "syntax", "unterminated string literal",
                               span_from(start_i, start_line, start_col))
                )
                break
            value = text[i + 1 : j]
            col += j + 1 - i
            i = j + 1
            tokens.append(_Token("string", value, span_from(start_i, start_line, start_col)))
            continue
        two = text[i : i + 2]
        if two in TWO_CHAR_OPS:
            i += 2
            col += 2
            tokens.append(_Token("op", two, span_from(start_i, start_line, start_col)))
            continue
        if c in ONE_CHAR_OPS:
            i += 1
            col += 1
            tokens.append(_Token("op", c, span_from(start_i, start_line, start_col)))
            continue
        i += 1
        col += 1
        diags.append(
            Diagnostic("error", "syntax", f"unexpected character {c!r}",
                       span_from(start_i, start_line, start_col))
        )
    eof_span = SourceSpan(line, col, line, col, n, n)
    tokens.append(_Token("eof", None, eof_span))
    return tokens, diags


class TokenCursor:
    """Recursive-descent helper over a token list."""

    def __init__(self, tokens, diagnostics):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics = diagnostics

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def at(self, kind, value=None) -> bool:
        tok = self.current
        return tok.kind == kind and (value is None or tok.value == value)

    def advance(self) -> _Token:
        tok = self.current
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message, span=None, code="syntax"):
        self.diagnostics.append(
            Diagnostic("error", code, message, span or self.current.span)
        )
        raise _ParseAbort()

    def expect(self, kind, value=None, what=None) -> _Token:
        if self.at(kind, value):
            return self.advance()
        wanted = what or (value if value is not None else kind)
        got = self.current.value if self.current.kind != "eof" else "end of input"
        self.error(f"expected {wanted!r}, got {got!r}")

    def expect_ident(self, what="identifier") -> _Token:
        tok = self.current
        if tok.kind == "ident" and tok.value not in KEYWORDS:
            return self.advance()
        self.error(f"expected {what}, got {tok.value!r}")


# ---------------------------------------------------------------------------
# Expression grammar (shared with the query language)
#
#   expr    := or_expr ( ("imply" | "->") expr )?          right-associative
#   or_expr := and_expr ( "||" and_expr )*
#   and_expr:= cmp_expr ( "&&" cmp_expr )*
#   cmp_expr:= sum ( ("=="|"!="|"<"|"<="|">"|">=") sum )?   non-associative
#   sum     := term ( ("+"|"-") term )*
#   term    := factor ( "*" factor )*
#   factor  := "!" factor | atom
#   atom    := INT | "true" | "false" | name | "(" expr ")"
#   name    := IDENT ( "." IDENT | "[" IDENT "]" | "(" IDENT ")" )?
#
# `name[arg]` and `name(arg)` are dataset-style parameterized atoms; both
# normalize to the flat identifier `name[arg]`, resolvable only through an
# alias table (the transition model itself has no arrays).


def parse_expression(cur: TokenCursor) -> Expr:
    left = _parse_or(cur)
    if cur.at("ident", "imply") or cur.at("op", "->"):
        op_tok = cur.advance()
        right = parse_expression(cur)
        return Binary("imply", left, right, span=_merge_spans(left, right, op_tok))
    return left


def _merge_spans(left: Expr, right: Expr, tok: _Token):
    ls = getattr(left, "span", None)
    rs = getattr(right, "span", None)
    if ls is not None and rs is not None:
        return ls.merge(rs)
    return tok.span


def _parse_or(cur):
    left = _parse_and(cur)
    while cur.at("op", "||"):
        tok = cur.advance()
        right = _parse_and(cur)
        left = Binary("||", left, right, span=_merge_spans(left, right, tok))
    return left


def _parse_and(cur):
    left = _parse_cmp(cur)
    while cur.at("op", "&&"):
        tok = cur.advance()
        right = _parse_cmp(cur)
        left = Binary("&&", left, right, span=_merge_spans(left, right, tok))
    return left


def _parse_cmp(cur):
    left = _parse_sum(cur)
    if cur.at("op") and cur.current.value in core.COMPARISON_OPS:
        tok = cur.advance()
        right = _parse_sum(cur)
        return Binary(tok.value, left, right, span=_merge_spans(left, right, tok))
    return left


def _parse_sum(cur):
    left = _parse_term(cur)
    while cur.at("op", "+") or cur.at("op", "-"):
        tok = cur.advance()
        right = _parse_term(cur)
        left = Binary(tok.value, left, right, span=_merge_spans(left, right, tok))
    return left


def _parse_term(cur):
    left = _parse_factor(cur)
    while cur.at("op", "*"):
        tok = cur.advance()
        right = _parse_factor(cur)
        left = Binary("*", left, right, span=_merge_spans(left, right, tok))
    return left


def _parse_factor(cur):
    if cur.at("op", "!"):
        tok = cur.advance()
        operand = _parse_factor(cur)
        os = getattr(operand, "span", None)
        return Not(operand, span=tok.span.merge(os) if os else tok.span)
    return _parse_atom(cur)


def _parse_atom(cur):
    tok = cur.current
    if tok.kind == "int":
        cur.advance()
        return IntLit(tok.value, span=tok.span)
    if tok.kind == "ident" and tok.value == "true":
        cur.advance()
        return BoolLit(True, span=tok.span)
    if tok.kind == "ident" and tok.value == "false":
        cur.advance()
        return BoolLit(False, span=tok.span)
    if tok.kind == "ident" and tok.value not in KEYWORDS:
        cur.advance()
        text = tok.value
        span = tok.span
        if cur.at("op", "."):
            cur.advance()
            part = cur.expect_ident("location name")
            text = f"{text}.{part.value}"
            span = span.merge(part.span)
        elif cur.at("op", "["):
            cur.advance()
            arg = cur.expect_ident("atom argument")
            close = cur.expect("op", "]")
            text = f"{text}[{arg.value}]"
            span = span.merge(close.span)
        elif cur.at("op", "(") and _looks_like_call(cur):
            cur.advance()
            arg = cur.expect_ident("atom argument")
            close = cur.expect("op", ")")
            text = f"{text}[{arg.value}]"
            span = span.merge(close.span)
        return Name(text, span=span)
    if cur.at("op", "("):
        cur.advance()
        inner = parse_expression(cur)
        cur.expect("op", ")")
        return inner
    got = tok.value if tok.kind != "eof" else "end of input"
    cur.error(f"expected an expression, got {got!r}")


def _looks_like_call(cur):
    # IDENT "(" IDENT ")" and nothing else counts as a parameterized atom.
    t1 = cur.tokens[cur.pos + 1] if cur.pos + 1 < len(cur.tokens) else None
    t2 = cur.tokens[cur.pos + 2] if cur.pos + 2 < len(cur.tokens) else None
    return (
        t1 is not None and t1.kind == "ident" and t1.value not in KEYWORDS
        and t2 is not None and t2.kind == "op" and t2.value == ")"
    )


def parse_expr_text(text: str) -> Expr:
    """Parse a standalone expression; raises ValueError on bad input."""
    tokens, diags = tokenize(text)
    if diags:
        raise ValueError(diags[0].format())
    cur = TokenCursor(tokens, diags)
    try:
        expr = parse_expression(cur)
    except _ParseAbort:
        raise ValueError(diags[-1].format()) from None
    if not cur.at("eof"):
        raise ValueError(f"trailing input at {cur.current.value!r}")
    return expr


# ---------------------------------------------------------------------------
# Name resolution and type checking with diagnostics


def resolve_expr(expr, vars_by_name, process_locations, aliases, diags) -> Expr | None:
    """Rewrite Name atoms into VarRef/LocAtom nodes.

    Resolution precedence: alias map, then dotted Process.Location atoms,
    then model variables.  Unknown identifiers are reported verbatim; all
    failures in one expression are collected before giving up.
    """
    ok = True

    def walk(e):
        nonlocal ok
        if isinstance(e, Name):
            text = aliases.get(e.text, e.text) if aliases else e.text
            if "." in text:
                proc, _, loc = text.partition(".")
                locations = process_locations.get(proc)
                if locations is not None and loc in locations:
                    return LocAtom(proc, loc, span=e.span)
                diags.append(
                    Diagnostic("error", "unknown-identifier",
                               f"unknown identifier '{e.text}'", e.span)
                )
                ok = False
                return e
            if text in vars_by_name:
                return VarRef(text, span=e.span)
            diags.append(
                Diagnostic("error", "unknown-identifier",
                           f"unknown identifier '{e.text}'", e.span)
            )
            ok = False
            return e
        if isinstance(e, Not):
            return Not(walk(e.operand), span=e.span)
        if isinstance(e, Binary):
            return Binary(e.op, walk(e.left), walk(e.right), span=e.span)
        return e

    resolved = walk(expr)
    return resolved if ok else None


def typecheck_expr(expr, vars_by_name, diags) -> str | None:
    """Infer int/bool for a resolved expression, reporting mismatches."""

    def check(e):
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, BoolLit):
            return BOOL
        if isinstance(e, VarRef):
            return vars_by_name[e.name].kind
        if isinstance(e, LocAtom):
            return BOOL
        if isinstance(e, Not):
            t = check(e.operand)
            if t is not None and t != BOOL:
                diags.append(Diagnostic("error", "type", "operand of '!' must be boolean",
                                        e.span))
                return None
            return BOOL if t else None
        if isinstance(e, Binary):
            lt = check(e.left)
            rt = check(e.right)
            if lt is None or rt is None:
                return None
            if e.op in core.LOGICAL_OPS:
                want, result = BOOL, BOOL
            elif e.op in core.COMPARISON_OPS:
                want, result = INT, BOOL
            else:
                want, result = INT, INT
            if lt != want or rt != want:
                diags.append(
                    Diagnostic("error", "type",
                               f"operands of '{e.op}' must be {want}", e.span)
                )
                return None
            return result
        return None

    return check(expr)


# ---------------------------------------------------------------------------
# Model parsing


def parse_model(text: str) -> ParseResult:
    """Parse and validate a model definition.

    Returns either a fully validated Model (all core invariants hold) or at
    least one error diagnostic — never both.  Warnings may accompany a model.
    """
    tokens, diags = tokenize(text)
    if any(d.severity == "error" for d in diags):
        return ParseResult(None, diags)
    cur = TokenCursor(tokens, diags)
    try:
        model = _parse_model_body(cur)
    except _ParseAbort:
        return ParseResult(None, diags)
    if any(d.severity == "error" for d in diags):
        return ParseResult(None, diags)
    return ParseResult(model, diags)


@dataclass
class _RawVar:
    decl: VarDecl
    span: SourceSpan
    init_span: SourceSpan


def _parse_signed_int(cur) -> tuple[int, SourceSpan]:
    if cur.at("op", "-"):
        minus = cur.advance()
        tok = cur.expect("int", what="integer")
        return -tok.value, minus.span.merge(tok.span)
    tok = cur.expect("int", what="integer")
    return tok.value, tok.span


def _parse_model_body(cur: TokenCursor) -> Model | None:
    diags = cur.diagnostics
    cur.expect("ident", "model")
    name_tok = cur.expect_ident("model name")
    raw_vars: list[_RawVar] = []
    raw_procs = []  # (name token, init token, loc tokens, raw transitions)

    while not cur.at("eof"):
        if cur.at("ident", "var"):
            raw_vars.append(_parse_var(cur))
        elif cur.at("ident", "process"):
            raw_procs.append(_parse_process(cur))
        else:
            cur.error(f"expected 'var' or 'process', got {cur.current.value!r}")

    # Namespace checks: variables and processes share one namespace.
    names = {}
    for rv in raw_vars:
        if rv.decl.name in names:
            diags.append(Diagnostic("error", "duplicate-name",
                                    f"duplicate name '{rv.decl.name}'", rv.span))
        names[rv.decl.name] = rv
    for proc in raw_procs:
        pname = proc["name"].value
        if pname in names:
            diags.append(Diagnostic("error", "duplicate-name",
                                    f"duplicate name '{pname}'", proc["name"].span))
        names[pname] = proc

    vars_by_name = {}
    for rv in raw_vars:
        decl = rv.decl
        if decl.kind == INT:
            if decl.lower > decl.upper:
                diags.append(Diagnostic("error", "bound",
                                        f"empty range [{decl.lower},{decl.upper}] "
                                        f"for '{decl.name}'", rv.span))
            elif not (decl.lower <= decl.initial <= decl.upper):
                diags.append(Diagnostic(
                    "error", "bound",
                    f"initial value {decl.initial} of '{decl.name}' outside "
                    f"[{decl.lower},{decl.upper}]", rv.init_span))
        vars_by_name[decl.name] = decl

    if not raw_procs:
        diags.append(Diagnostic("error", "syntax", "a model needs at least one process",
                                name_tok.span))
        return None

    process_locations = {}
    for proc in raw_procs:
        loc_names = []
        for tok in proc["locs"]:
            if tok.value in loc_names:
                diags.append(Diagnostic("error", "duplicate-name",
                                        f"duplicate location '{tok.value}' in process "
                                        f"'{proc['name'].value}'", tok.span))
            else:
                loc_names.append(tok.value)
        process_locations[proc["name"].value] = set(loc_names)
        proc["loc_names"] = loc_names

    referenced = set()
    processes = []
    for proc in raw_procs:
        pname = proc["name"].value
        locs = set(proc["loc_names"])
        init_tok = proc["init"]
        if init_tok.value not in locs:
            diags.append(Diagnostic("error", "unknown-identifier",
                                    f"initial location '{init_tok.value}' is not declared",
                                    init_tok.span))
        transitions = []
        for raw_t in proc["trans"]:
            for endpoint in (raw_t["src"], raw_t["dst"]):
                if endpoint.value not in locs:
                    diags.append(Diagnostic("error", "unknown-identifier",
                                            f"unknown location '{endpoint.value}'",
                                            endpoint.span))
            guard = raw_t["guard"]
            if guard is None:
                guard = BoolLit(True)
            else:
                guard = _check_bool_expr(guard, vars_by_name, process_locations,
                                         diags, referenced)
            updates = []
            seen_updates = set()
            for var_tok, uexpr in raw_t["updates"]:
                vname = var_tok.value
                decl = vars_by_name.get(vname)
                if decl is None:
                    diags.append(Diagnostic("error", "unknown-identifier",
                                            f"unknown variable '{vname}'", var_tok.span))
                    continue
                if vname in seen_updates:
                    diags.append(Diagnostic("error", "duplicate-name",
                                            f"variable '{vname}' updated twice",
                                            var_tok.span))
                    continue
                seen_updates.add(vname)
                resolved = resolve_expr(uexpr, vars_by_name, process_locations, None, diags)
                if resolved is None:
                    continue
                _collect_var_refs(resolved, referenced)
                utype = typecheck_expr(resolved, vars_by_name, diags)
                if utype is not None and utype != decl.kind:
                    diags.append(Diagnostic(
                        "error", "type",
                        f"update of '{vname}' must be {decl.kind}, got {utype}",
                        getattr(uexpr, "span", var_tok.span) or var_tok.span))
                    continue
                updates.append((vname, resolved))
            label = raw_t["label"] if raw_t["label"] is not None else \
                f"{raw_t['src'].value}->{raw_t['dst'].value}"
            transitions.append(Transition(raw_t["src"].value, raw_t["dst"].value,
                                          guard or BoolLit(True), tuple(updates), label))
        if any(d.severity == "error" for d in diags):
            continue
        processes.append(Process(pname, tuple(proc["loc_names"]), init_tok.value,
                                 tuple(transitions)))

    for rv in raw_vars:
        if rv.decl.name not in referenced:
            diags.append(Diagnostic("warning", "unused-variable",
                                    f"variable '{rv.decl.name}' is never referenced",
                                    rv.span))

    if any(d.severity == "error" for d in diags):
        return None
    return Model(name_tok.value, [rv.decl for rv in raw_vars], processes)


def _check_bool_expr(expr, vars_by_name, process_locations, diags, referenced):
    resolved = resolve_expr(expr, vars_by_name, process_locations, None, diags)
    if resolved is None:
        return None
    _collect_var_refs(resolved, referenced)
    t = typecheck_expr(resolved, vars_by_name, diags)
    if t is not None and t != BOOL:
        diags.append(Diagnostic("error", "type", "guard must be boolean",
                                getattr(expr, "span", None)
                                or SourceSpan(1, 1, 1, 1, 0, 0)))
        return None
    return resolved


def _collect_var_refs(expr, into: set):
    if isinstance(expr, VarRef):
        into.add(expr.name)
    elif isinstance(expr, Not):
        _collect_var_refs(expr.operand, into)
    elif isinstance(expr, Binary):
        _collect_var_refs(expr.left, into)
        _collect_var_refs(expr.right, into)


def _parse_var(cur) -> _RawVar:
    start = cur.expect("ident", "var")
    if cur.at("ident", "int"):
        cur.advance()
        cur.expect("op", "[")
        lower, _ = _parse_signed_int(cur)
        cur.expect("op", ",")
        upper, _ = _parse_signed_int(cur)
        cur.expect("op", "]")
        name_tok = cur.expect_ident("variable name")
        cur.expect("op", "=")
        initial, init_span = _parse_signed_int(cur)
        semi = cur.expect("op", ";")
        return _RawVar(VarDecl(name_tok.value, INT, lower, upper, initial),
                       start.span.merge(semi.span), init_span)
    if cur.at("ident", "bool"):
        cur.advance()
        name_tok = cur.expect_ident("variable name")
        cur.expect("op", "=")
        if cur.at("ident", "true") or cur.at("ident", "false"):
            val_tok = cur.advance()
            initial = val_tok.value == "true"
        else:
            cur.error("expected 'true' or 'false'")
        semi = cur.expect("op", ";")
        return _RawVar(VarDecl(name_tok.value, BOOL, 0, 1, initial),
                       start.span.merge(semi.span), val_tok.span)
    cur.error("expected 'int' or 'bool' after 'var'")


def _parse_process(cur) -> dict:
    cur.expect("ident", "process")
    name_tok = cur.expect_ident("process name")
    cur.expect("op", "{")
    cur.expect("ident", "init")
    init_tok = cur.expect_ident("location name")
    cur.expect("op", ";")
    cur.expect("ident", "loc")
    locs = [cur.expect_ident("location name")]
    while cur.at("op", ","):
        cur.advance()
        locs.append(cur.expect_ident("location name"))
    cur.expect("op", ";")
    transitions = []
    while cur.at("ident", "trans"):
        transitions.append(_parse_transition(cur))
    cur.expect("op", "}")
    return {"name": name_tok, "init": init_tok, "locs": locs, "trans": transitions}


def _parse_transition(cur) -> dict:
    cur.expect("ident", "trans")
    src = cur.expect_ident("source location")
    cur.expect("op", "->")
    dst = cur.expect_ident("target location")
    cur.expect("op", "{")
    guard = None
    updates = []
    label = None
    if cur.at("ident", "guard"):
        cur.advance()
        guard = parse_expression(cur)
        cur.expect("op", ";")
    if cur.at("ident", "update"):
        cur.advance()
        while True:
            var_tok = cur.expect_ident("variable name")
            cur.expect("op", "=")
            updates.append((var_tok, parse_expression(cur)))
            if cur.at("op", ","):
                cur.advance()
                continue
            break
        cur.expect("op", ";")
    if cur.at("ident", "label"):
        cur.advance()
        label_tok = cur.expect("string", what="label string")
        label = label_tok.value
        cur.expect("op", ";")
    cur.expect("op", "}")
    return {"src": src, "dst": dst, "guard": guard, "updates": updates, "label": label}


# ---------------------------------------------------------------------------
# Canonical rendering

_PRECEDENCE = {
    "imply": 1,
    "||": 2,
    "&&": 3,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6,
}
_UNARY_PRECEDENCE = 7


def render_expr(expr: Expr) -> str:
    """Canonical expression text: minimal parentheses, single spaces."""
    text, _ = _render(expr)
    return text


def _render(expr) -> tuple[str, int]:
    if isinstance(expr, IntLit):
        return str(expr.value), 9
    if isinstance(expr, BoolLit):
        return ("true" if expr.value else "false"), 9
    if isinstance(expr, Name):
        return expr.text, 9
    if isinstance(expr, VarRef):
        return expr.name, 9
    if isinstance(expr, LocAtom):
        return f"{expr.process}.{expr.location}", 9
    if isinstance(expr, Not):
        inner, prec = _render(expr.operand)
        if prec < _UNARY_PRECEDENCE:
            inner = f"({inner})"
        return f"!{inner}", _UNARY_PRECEDENCE
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        left, lp = _render(expr.left)
        right, rp = _render(expr.right)
        # imply is right-associative; everything else groups left.
        if expr.op == "imply":
            if lp <= prec:
                left = f"({left})"
            if rp < prec:
                right = f"({right})"
        else:
            if lp < prec:
                left = f"({left})"
            if rp <= prec:
                right = f"({right})"
        return f"{left} {expr.op} {right}", prec
    raise ValueError(f"cannot render {type(expr).__name__}")


def render_model(model: Model) -> str:
    """Deterministic canonical text that re-parses to a structurally equal model."""
    lines = [f"model {model.name}", ""]
    for v in model.vars:
        if v.kind == INT:
            lines.append(f"var int[{v.lower},{v.upper}] {v.name} = {v.initial};")
        else:
            lines.append(f"var bool {v.name} = {'true' if v.initial else 'false'};")
    if model.vars:
        lines.append("")
    for proc in model.processes:
        lines.append(f"process {proc.name} {{")
        lines.append(f"  init {proc.initial};")
        lines.append(f"  loc {', '.join(proc.locations)};")
        for t in proc.transitions:
            parts = []
            if t.guard != BoolLit(True):
                parts.append(f"guard {render_expr(t.guard)};")
            if t.updates:
                ups = ", ".join(f"{name} = {render_expr(e)}" for name, e in t.updates)
                parts.append(f"update {ups};")
            if t.label and t.label != f"{t.source}->{t.target}":
                parts.append(f'label "{t.label}";')
            body = (" " + " ".join(parts) + " ") if parts else " "
            lines.append(f"  trans {t.source} -> {t.target} {{{body}}}")
        lines.append("}")
        lines.append("")
    return "\n".join(lines)
