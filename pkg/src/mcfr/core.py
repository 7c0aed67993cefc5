"""Transition-system data model and small-step semantics.

A model is a network of processes, each a finite automaton over named
locations, coupled through shared bounded variables.  Transitions carry a
boolean guard and a list of variable updates; one transition of one process
fires per step (interleaving), and update right-hand sides are evaluated
against the pre-state (simultaneous assignment).

Everything here is immutable after construction and all operations are pure,
so models and states can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

INT = "int"
BOOL = "bool"


class ModelError(Exception):
    """A structural or typing violation in a model definition."""


class RangeViolation(ModelError):
    """An update pushed a bounded integer outside its declared range."""

    def __init__(self, variable: str, value: int):
        super().__init__(f"variable '{variable}' left its declared bounds (value {value})")
        self.variable = variable
        self.value = value


# ---------------------------------------------------------------------------
# Expression AST
#
# Parsers produce Name atoms; resolution rewrites them into VarRef/LocAtom
# nodes so that evaluation is total.  Nodes compare structurally; source
# spans ride along for diagnostics but do not participate in equality.

class Expr:
    """Base class for expression nodes."""


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Name(Expr):
    """An unresolved identifier: bare, dotted, or a bracketed dataset atom."""

    text: str
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class VarRef(Expr):
    name: str
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class LocAtom(Expr):
    """True iff the named process currently sits at the named location."""

    process: str
    location: str
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    span: object = field(default=None, compare=False, repr=False)


LOGICAL_OPS = ("&&", "||", "imply")
COMPARISON_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITHMETIC_OPS = ("+", "-", "*")


# ---------------------------------------------------------------------------
# Model structure


@dataclass(frozen=True)
class VarDecl:
    """A bounded integer or boolean state variable."""

    name: str
    kind: str  # INT or BOOL
    lower: int = 0
    upper: int = 0
    initial: Union[int, bool] = 0

    def check(self):
        if self.kind == INT:
            if not (self.lower <= self.initial <= self.upper):
                raise ModelError(
                    f"initial value {self.initial} of '{self.name}' outside "
                    f"[{self.lower},{self.upper}]"
                )
        elif self.kind == BOOL:
            if not isinstance(self.initial, bool):
                raise ModelError(f"boolean variable '{self.name}' needs a boolean initial value")
        else:
            raise ModelError(f"unknown variable kind '{self.kind}'")


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    guard: Expr = BoolLit(True)
    updates: tuple = ()  # ordered (variable name, Expr) pairs
    label: str = ""

    def display_label(self) -> str:
        return self.label or f"{self.source}->{self.target}"


@dataclass
class Process:
    name: str
    locations: tuple
    initial: str
    transitions: tuple = ()

    location_index: dict = field(init=False, repr=False, compare=False)
    _by_source: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.locations = tuple(self.locations)
        self.transitions = tuple(self.transitions)
        self.location_index = {name: i for i, name in enumerate(self.locations)}
        by_source = {i: [] for i in range(len(self.locations))}
        for ti, t in enumerate(self.transitions):
            if t.source in self.location_index:
                by_source[self.location_index[t.source]].append((ti, t))
        self._by_source = by_source

    def transitions_from(self, location_idx: int):
        """Outgoing transitions of a location, in declaration order."""
        return self._by_source[location_idx]


@dataclass
class Model:
    name: str
    vars: list
    processes: list

    var_index: dict = field(init=False, repr=False, compare=False)
    process_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.vars = list(self.vars)
        self.processes = list(self.processes)
        self.var_index = {v.name: i for i, v in enumerate(self.vars)}
        self.process_index = {p.name: i for i, p in enumerate(self.processes)}
        validate_model(self)


class State(NamedTuple):
    """One location index per process plus the full variable valuation.

    States are canonical: equal states compare equal, hash equal, and render
    the same canonical key, so they can index visited sets exactly.
    """

    locs: tuple
    vals: tuple

    def canonical_key(self) -> bytes:
        return repr((self.locs, self.vals)).encode("ascii")


def format_state(model: Model, state: State) -> str:
    locs = ",".join(
        p.locations[state.locs[i]] for i, p in enumerate(model.processes)
    )
    vals = ", ".join(
        f"{v.name}={_fmt_value(state.vals[i])}" for i, v in enumerate(model.vars)
    )
    return f"{locs}; {vals}" if vals else locs


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# ---------------------------------------------------------------------------
# Validation

def validate_model(model: Model):
    """Raise ModelError on any structural, naming, or typing violation."""
    if not model.processes:
        raise ModelError("a model needs at least one process")
    seen = {}
    for v in model.vars:
        v.check()
        if v.name in seen:
            raise ModelError(f"duplicate name '{v.name}'")
        seen[v.name] = "variable"
    for p in model.processes:
        if p.name in seen:
            raise ModelError(f"duplicate name '{p.name}'")
        seen[p.name] = "process"
    for p in model.processes:
        if not p.locations:
            raise ModelError(f"process '{p.name}' has no locations")
        if len(set(p.locations)) != len(p.locations):
            raise ModelError(f"duplicate location in process '{p.name}'")
        if p.initial not in p.location_index:
            raise ModelError(f"initial location '{p.initial}' not declared in '{p.name}'")
        for t in p.transitions:
            if t.source not in p.location_index or t.target not in p.location_index:
                raise ModelError(
                    f"transition {t.source}->{t.target} references an unknown "
                    f"location in process '{p.name}'"
                )
            if infer_type(t.guard, model) != BOOL:
                raise ModelError(f"guard of {t.source}->{t.target} is not boolean")
            updated = set()
            for name, expr in t.updates:
                if name not in model.var_index:
                    raise ModelError(f"update assigns unknown variable '{name}'")
                if name in updated:
                    raise ModelError(f"variable '{name}' updated twice on one transition")
                updated.add(name)
                decl = model.vars[model.var_index[name]]
                if infer_type(expr, model) != decl.kind:
                    raise ModelError(
                        f"update of '{name}' has the wrong type (expected {decl.kind})"
                    )


def infer_type(expr: Expr, model: Model) -> str:
    """Type of a resolved expression; raises ModelError on any mismatch."""
    if isinstance(expr, IntLit):
        return INT
    if isinstance(expr, BoolLit):
        return BOOL
    if isinstance(expr, VarRef):
        if expr.name not in model.var_index:
            raise ModelError(f"unknown variable '{expr.name}'")
        return model.vars[model.var_index[expr.name]].kind
    if isinstance(expr, LocAtom):
        pi = model.process_index.get(expr.process)
        if pi is None or expr.location not in model.processes[pi].location_index:
            raise ModelError(f"unknown location atom '{expr.process}.{expr.location}'")
        return BOOL
    if isinstance(expr, Not):
        if infer_type(expr.operand, model) != BOOL:
            raise ModelError("operand of '!' is not boolean")
        return BOOL
    if isinstance(expr, Binary):
        lt = infer_type(expr.left, model)
        rt = infer_type(expr.right, model)
        if expr.op in LOGICAL_OPS:
            if lt != BOOL or rt != BOOL:
                raise ModelError(f"operands of '{expr.op}' must be boolean")
            return BOOL
        if expr.op in COMPARISON_OPS:
            if lt != INT or rt != INT:
                raise ModelError(f"operands of '{expr.op}' must be integers")
            return BOOL
        if expr.op in ARITHMETIC_OPS:
            if lt != INT or rt != INT:
                raise ModelError(f"operands of '{expr.op}' must be integers")
            return INT
        raise ModelError(f"unknown operator '{expr.op}'")
    if isinstance(expr, Name):
        raise ModelError(f"unresolved identifier '{expr.text}'")
    raise ModelError(f"unknown expression node {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Small-step semantics


def initial_state(model: Model) -> State:
    """Every process at its initial location, every variable at its initial value."""
    locs = tuple(p.location_index[p.initial] for p in model.processes)
    vals = tuple(v.initial for v in model.vars)
    return State(locs, vals)


def eval_expr(expr: Expr, state: State, model: Model):
    """Evaluate a resolved expression against a state.

    Total by construction: binding guarantees every identifier resolves and
    types line up, and there is no division.
    """
    if isinstance(expr, (IntLit, BoolLit)):
        return expr.value
    if isinstance(expr, VarRef):
        return state.vals[model.var_index[expr.name]]
    if isinstance(expr, LocAtom):
        pi = model.process_index[expr.process]
        return state.locs[pi] == model.processes[pi].location_index[expr.location]
    if isinstance(expr, Not):
        return not eval_expr(expr.operand, state, model)
    if isinstance(expr, Binary):
        op = expr.op
        if op == "&&":
            return eval_expr(expr.left, state, model) and eval_expr(expr.right, state, model)
        if op == "||":
            return eval_expr(expr.left, state, model) or eval_expr(expr.right, state, model)
        if op == "imply":
            return (not eval_expr(expr.left, state, model)) or eval_expr(
                expr.right, state, model
            )
        lv = eval_expr(expr.left, state, model)
        rv = eval_expr(expr.right, state, model)
        if op == "==":
            return lv == rv
        if op == "!=":
            return lv != rv
        if op == "<":
            return lv < rv
        if op == "<=":
            return lv <= rv
        if op == ">":
            return lv > rv
        if op == ">=":
            return lv >= rv
        if op == "+":
            return lv + rv
        if op == "-":
            return lv - rv
        if op == "*":
            return lv * rv
    raise ModelError(f"cannot evaluate {type(expr).__name__}")


def enabled_transitions(model: Model, state: State) -> list:
    """Transitions firable from a state, as (process index, transition index).

    Order is deterministic: process index first, then transition declaration
    order within the process.
    """
    out = []
    for pi, proc in enumerate(model.processes):
        for ti, t in proc.transitions_from(state.locs[pi]):
            if eval_expr(t.guard, state, model):
                out.append((pi, ti))
    return out


def apply_transition(model: Model, state: State, ref: tuple) -> State:
    """Fire an enabled transition; update RHS values read the pre-state."""
    pi, ti = ref
    proc = model.processes[pi]
    t = proc.transitions[ti]
    new_vals = state.vals
    if t.updates:
        vals = list(state.vals)
        for name, expr in t.updates:
            vi = model.var_index[name]
            value = eval_expr(expr, state, model)
            decl = model.vars[vi]
            if decl.kind == INT and not (decl.lower <= value <= decl.upper):
                raise RangeViolation(name, value)
            vals[vi] = value
        new_vals = tuple(vals)
    target = proc.location_index[t.target]
    if target == state.locs[pi]:
        new_locs = state.locs
    else:
        new_locs = state.locs[:pi] + (target,) + state.locs[pi + 1 :]
    return State(new_locs, new_vals)


# ---------------------------------------------------------------------------
# Compilation to native Python
#
# The checker walks state spaces with hundreds of thousands of states, so the
# per-state work is compiled once per model into a flat successor function.
# Tests cross-check the compiled path against the interpreted semantics above.


def expr_to_python(expr: Expr, model: Model) -> str:
    """Render a resolved expression as a Python source fragment.

    The fragment reads `locs` and `vals` tuples; identifiers are replaced by
    integer indexes, so no user-controlled text reaches the generated code.
    """
    if isinstance(expr, IntLit):
        return repr(expr.value)
    if isinstance(expr, BoolLit):
        return "True" if expr.value else "False"
    if isinstance(expr, VarRef):
        return f"vals[{model.var_index[expr.name]}]"
    if isinstance(expr, LocAtom):
        pi = model.process_index[expr.process]
        li = model.processes[pi].location_index[expr.location]
        return f"(locs[{pi}] == {li})"
    if isinstance(expr, Not):
        return f"(not {expr_to_python(expr.operand, model)})"
    if isinstance(expr, Binary):
        left = expr_to_python(expr.left, model)
        right = expr_to_python(expr.right, model)
        if expr.op == "&&":
            return f"({left} and {right})"
        if expr.op == "||":
            return f"({left} or {right})"
        if expr.op == "imply":
            return f"((not {left}) or {right})"
        return f"({left} {expr.op} {right})"
    raise ModelError(f"cannot compile {type(expr).__name__}")


def compile_predicate(expr: Expr, model: Model):
    """Compile a boolean expression into a fast fn(State) -> bool."""
    src = (
        "def _pred(state):\n"
        "    locs = state.locs\n"
        "    vals = state.vals\n"
        f"    return bool({expr_to_python(expr, model)})\n"
    )
    ns = {}
    exec(compile(src, "<predicate>", "exec"), ns)
    return ns["_pred"]


def compile_successors(model: Model):
    """Compile the whole transition relation into fn(State) -> list.

    Returns successors as (State, process index, transition index) triples in
    exactly the order enabled_transitions + apply_transition would produce.
    """
    n_vars = len(model.vars)
    n_procs = len(model.processes)
    lines = [
        "def _successors(state):",
        "    locs = state.locs",
        "    vals = state.vals",
        "    out = []",
    ]

    def emit_transition(pi, proc, ti, t, indent):
        pad = " " * indent
        body = []
        new_parts = [f"vals[{k}]" for k in range(n_vars)]
        for name, uexpr in t.updates:
            k = model.var_index[name]
            decl = model.vars[k]
            tmp = f"u{k}"
            body.append(f"{pad}{tmp} = {expr_to_python(uexpr, model)}")
            if decl.kind == INT:
                body.append(
                    f"{pad}if {tmp} < {decl.lower} or {tmp} > {decl.upper}: "
                    f"raise RangeViolation({decl.name!r}, {tmp})"
                )
            new_parts[k] = tmp
        if t.updates:
            inner = ", ".join(new_parts)
            new_vals = f"({inner},)" if n_vars == 1 else f"({inner})"
        else:
            new_vals = "vals"
        target = proc.location_index[t.target]
        if target == proc.location_index[t.source]:
            new_locs = "locs"
        elif n_procs == 1:
            new_locs = f"({target},)"
        else:
            new_locs = f"locs[:{pi}] + ({target},) + locs[{pi + 1}:]"
        body.append(f"{pad}out.append((State({new_locs}, {new_vals}), {pi}, {ti}))")
        return body

    for pi, proc in enumerate(model.processes):
        first = True
        for li in range(len(proc.locations)):
            outgoing = proc.transitions_from(li)
            if not outgoing:
                continue
            kw = "if" if first else "elif"
            first = False
            lines.append(f"    {kw} locs[{pi}] == {li}:")
            emitted = False
            for ti, t in outgoing:
                if t.guard == BoolLit(False):
                    continue
                if t.guard == BoolLit(True):
                    lines.extend(emit_transition(pi, proc, ti, t, 8))
                else:
                    lines.append(f"        if {expr_to_python(t.guard, model)}:")
                    lines.extend(emit_transition(pi, proc, ti, t, 12))
                emitted = True
            if not emitted:
                lines.append("        pass")
    lines.append("    return out")
    src = "\n".join(lines) + "\n"
    ns = {"State": State, "RangeViolation": RangeViolation}
    exec(compile(src, "<model-successors>", "exec"), ns)
    return ns["_successors"]
