"""Explicit-state exploration and query evaluation with witness traces.

Exploration is breadth-first in a fixed deterministic order (successor order
equals enabled-transition order), so `E<>` witnesses are shortest paths and
verdicts are reproducible byte-for-byte across runs and worker counts.
Visited-set keys are the full canonical states; nothing is hashed lossily.

`E[]` uses the deadlock-or-lasso convention for maximal paths: a state
qualifies when the predicate holds and the state either has a qualifying
successor or no successor at all.  `A[]` and `A<>` are evaluated through
their duals.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import (
    Model,
    Not,
    State,
    apply_transition,
    compile_predicate,
    compile_successors,
    enabled_transitions,
    eval_expr,
    format_state,
    initial_state,
)
from .queries import (
    EXISTS_ALWAYS,
    EXISTS_EVENTUALLY,
    FORALL_ALWAYS,
    FORALL_EVENTUALLY,
    BoundQuery,
)


class TargetUnreachable(Exception):
    """The requested state is not part of the explored space."""


@dataclass
class ExploreLimits:
    """Resource bounds for exploration."""

    max_states: int = 5_000_000
    max_depth: Optional[int] = None
    time_budget: Optional[float] = None  # wall-clock seconds

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")


@dataclass
class CheckStats:
    states: int = 0
    edges: int = 0
    peak_frontier: int = 0
    elapsed: float = 0.0

    def to_record(self) -> dict:
        # elapsed intentionally omitted: structured verdicts must be
        # byte-identical across runs.
        return {"states": self.states, "edges": self.edges,
                "peak_frontier": self.peak_frontier}


@dataclass
class Trace:
    """An initial-state-rooted execution, replayable step by step."""

    model: Model
    states: list
    labels: list  # one label per step; len(states) == len(labels) + 1

    def __len__(self):
        return len(self.labels)

    def location_sequence(self) -> list:
        """Visited location vectors with self-loop steps collapsed."""
        seq = [self._loc_name(self.states[0])]
        for st in self.states[1:]:
            name = self._loc_name(st)
            if name != seq[-1]:
                seq.append(name)
        return seq

    def _loc_name(self, state: State) -> str:
        return ",".join(
            p.locations[state.locs[i]] for i, p in enumerate(self.model.processes)
        )

    def final_values(self) -> dict:
        last = self.states[-1]
        return {v.name: last.vals[i] for i, v in enumerate(self.model.vars)}

    def final_locations(self) -> dict:
        last = self.states[-1]
        return {
            p.name: p.locations[last.locs[i]]
            for i, p in enumerate(self.model.processes)
        }

    def render(self) -> str:
        arrows = " -> ".join(self.location_sequence())
        vals = ", ".join(
            f"{name}={_fmt(value)}" for name, value in self.final_values().items()
        )
        return f"{arrows}; {vals}" if vals else arrows

    def to_record(self) -> dict:
        return {
            "length": len(self.labels),
            "labels": list(self.labels),
            "locations": self.location_sequence(),
            "final": {
                "locations": self.final_locations(),
                "vars": self.final_values(),
            },
            "rendered": self.render(),
        }


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


@dataclass
class Verdict:
    """Outcome of a check: satisfied / unsatisfied / inconclusive."""

    satisfied: Optional[bool]  # None means inconclusive
    evidence: Optional[Trace]
    stats: CheckStats
    complete: bool

    @property
    def verdict(self) -> str:
        if self.satisfied is None:
            return "inconclusive"
        return "yes" if self.satisfied else "no"

    def to_record(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "verdict": self.verdict,
            "trace": self.evidence.to_record() if self.evidence else None,
            "stats": self.stats.to_record(),
        }


@dataclass
class StateSpace:
    """The reachable fragment of a model, BFS-ordered.

    State 0 is the initial state; `parent` links form the BFS tree used for
    shortest-path witness recovery; `complete` is true iff no resource limit
    truncated the enumeration.
    """

    model: Model
    states: list
    index: dict
    edges: list  # per state: ordered (successor id, process idx, transition idx)
    parent: list  # per state: (predecessor id, process idx, transition idx) or None
    depth: list
    expanded: list
    complete: bool
    peak_frontier: int = 0
    elapsed: float = 0.0
    edge_count: int = 0

    def __len__(self):
        return len(self.states)


class _Search:
    """Result of one BFS run (internal)."""

    __slots__ = ("states", "index", "parents", "depths", "edges", "expanded",
                 "complete", "peak_frontier", "edge_count", "elapsed", "hit")

    def __init__(self):
        self.states = []
        self.index = {}
        self.parents = []
        self.depths = []
        self.edges = None
        self.expanded = []
        self.complete = True
        self.peak_frontier = 0
        self.edge_count = 0
        self.elapsed = 0.0
        self.hit = None


def _bfs(model: Model, limits: ExploreLimits, workers: int = 1,
         predicate: Callable = None, want_edges: bool = False) -> _Search:
    """Deterministic BFS; stops early at the first predicate hit or a limit.

    With workers > 1, successor lists of one frontier level are computed in
    parallel and merged in frontier order, which keeps the discovery order,
    the first hit, and all statistics identical to the serial run.
    """
    start = time.perf_counter()
    succ_fn = compile_successors(model)
    res = _Search()
    init = initial_state(model)
    res.states.append(init)
    res.index[init] = 0
    res.parents.append(None)
    res.depths.append(0)
    res.expanded.append(False)
    if want_edges:
        res.edges = [[]]
    if predicate is not None and predicate(init):
        res.hit = 0
        res.peak_frontier = 1
        res.elapsed = time.perf_counter() - start
        return res

    frontier = [0]
    res.peak_frontier = 1
    depth = 0
    truncated = False
    done = False
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while frontier and not done:
            if limits.max_depth is not None and depth >= limits.max_depth:
                truncated = True
                break
            if (limits.time_budget is not None
                    and time.perf_counter() - start > limits.time_budget):
                truncated = True
                break
            if executor is not None:
                succ_lists = executor.map(
                    succ_fn, [res.states[sid] for sid in frontier], chunksize=64
                )
            else:
                succ_lists = (succ_fn(res.states[sid]) for sid in frontier)
            next_frontier = []
            for sid, succs in zip(frontier, succ_lists):
                res.expanded[sid] = True
                for ns, pi, ti in succs:
                    res.edge_count += 1
                    nid = res.index.get(ns)
                    if nid is None:
                        if len(res.states) >= limits.max_states:
                            truncated = True
                            done = True
                            break
                        nid = len(res.states)
                        res.index[ns] = nid
                        res.states.append(ns)
                        res.parents.append((sid, pi, ti))
                        res.depths.append(depth + 1)
                        res.expanded.append(False)
                        if want_edges:
                            res.edges.append([])
                        next_frontier.append(nid)
                        if predicate is not None and predicate(ns):
                            res.hit = nid
                            done = True
                            break
                    if want_edges:
                        res.edges[sid].append((nid, pi, ti))
                if done:
                    break
            frontier = next_frontier
            depth += 1
            if len(frontier) > res.peak_frontier:
                res.peak_frontier = len(frontier)
    finally:
        if executor is not None:
            executor.shutdown(wait=True, cancel_futures=True)
    res.complete = not truncated
    res.elapsed = time.perf_counter() - start
    return res


def explore(model: Model, limits: ExploreLimits = None, workers: int = 1) -> StateSpace:
    """Enumerate the reachable state space breadth-first."""
    limits = limits or ExploreLimits()
    res = _bfs(model, limits, workers=workers, want_edges=True)
    return StateSpace(
        model=model,
        states=res.states,
        index=res.index,
        edges=res.edges,
        parent=res.parents,
        depth=res.depths,
        expanded=res.expanded,
        complete=res.complete,
        peak_frontier=res.peak_frontier,
        elapsed=res.elapsed,
        edge_count=res.edge_count,
    )


def _stats(res) -> CheckStats:
    return CheckStats(states=len(res.states), edges=res.edge_count,
                      peak_frontier=res.peak_frontier, elapsed=res.elapsed)


def _trace_from_parents(model, res, target_id: int) -> Trace:
    ids = []
    cur = target_id
    while cur is not None:
        ids.append(cur)
        link = res.parents[cur]
        cur = link[0] if link else None
    ids.reverse()
    states = [res.states[i] for i in ids]
    labels = []
    for i in ids[1:]:
        _, pi, ti = res.parents[i]
        labels.append(model.processes[pi].transitions[ti].display_label())
    return Trace(model, states, labels)


def check(model: Model, q: BoundQuery, limits: ExploreLimits = None,
          workers: int = 1) -> Verdict:
    """Evaluate a bound query; attach a witness or counterexample when one exists.

    Pure function of its inputs: identical verdicts (including traces and
    statistics) across runs and worker counts.
    """
    if q.model is not model:
        raise ValueError("query was bound against a different model")
    limits = limits or ExploreLimits()
    quant = q.quantifier

    if quant == EXISTS_EVENTUALLY:
        return _check_reach(model, q.predicate, limits, workers, negate=False)
    if quant == FORALL_ALWAYS:
        return _check_reach(model, q.predicate, limits, workers, negate=True)
    if quant == EXISTS_ALWAYS:
        return _check_globally(model, q.predicate, limits, workers, negate=False)
    if quant == FORALL_EVENTUALLY:
        return _check_globally(model, q.predicate, limits, workers, negate=True)
    raise ValueError(f"unknown quantifier {quant!r}")


def _check_reach(model, predicate_expr, limits, workers, negate: bool) -> Verdict:
    # E<> phi directly; A[] phi as the dual of E<> !phi.
    target = Not(predicate_expr) if negate else predicate_expr
    pred = compile_predicate(target, model)
    res = _bfs(model, limits, workers=workers, predicate=pred)
    stats = _stats(res)
    if res.hit is not None:
        trace = _trace_from_parents(model, res, res.hit)
        if negate:
            return Verdict(False, trace, stats, res.complete)
        return Verdict(True, trace, stats, res.complete)
    if not res.complete:
        return Verdict(None, None, stats, False)
    if negate:
        return Verdict(True, None, stats, True)
    return Verdict(False, None, stats, True)


def _check_globally(model, predicate_expr, limits, workers, negate: bool) -> Verdict:
    # E[] phi directly; A<> phi as the dual of E[] !phi.
    target = Not(predicate_expr) if negate else predicate_expr
    pred = compile_predicate(target, model)
    res = _bfs(model, limits, workers=workers, want_edges=True)
    stats = _stats(res)
    phi = [pred(s) for s in res.states]

    if res.complete:
        qualified = _eg_fixpoint(res, phi, optimistic=False)
        holds = qualified[0]
        trace = _eg_witness(model, res, qualified) if holds else None
        if negate:
            return Verdict(not holds, trace, stats, True)
        return Verdict(holds, trace, stats, True)

    # Truncated space: decide only what the visited fragment already decides.
    lower = _eg_fixpoint(res, phi, optimistic=False)
    if lower[0]:
        trace = _eg_witness(model, res, lower)
        return Verdict(not negate if negate else True, trace, stats, False) \
            if not negate else Verdict(False, trace, stats, False)
    upper = _eg_fixpoint(res, phi, optimistic=True)
    if not upper[0]:
        return Verdict(True if negate else False, None, stats, False)
    return Verdict(None, None, stats, False)


def _eg_fixpoint(res, phi: list, optimistic: bool) -> list:
    """Greatest fixpoint of: phi and (deadlock or some qualifying successor).

    Unexpanded frontier states have unknown successors; `optimistic` keeps
    them qualifying (upper bound) while the default drops them (lower bound).
    """
    n = len(res.states)
    pinned = [False] * n  # never removable
    qualified = [False] * n
    succ_count = [0] * n
    preds = [[] for _ in range(n)]

    for sid in range(n):
        if not phi[sid]:
            continue
        if not res.expanded[sid]:
            if optimistic:
                qualified[sid] = True
                pinned[sid] = True
            continue
        qualified[sid] = True
        if not res.edges[sid]:
            pinned[sid] = True  # deadlock sustains the path

    for sid in range(n):
        if not qualified[sid] or pinned[sid]:
            continue
        for tid, _, _ in res.edges[sid]:
            if qualified[tid]:
                succ_count[sid] += 1
                preds[tid].append(sid)

    worklist = [s for s in range(n)
                if qualified[s] and not pinned[s] and succ_count[s] == 0]
    while worklist:
        s = worklist.pop()
        if not qualified[s]:
            continue
        qualified[s] = False
        for p in preds[s]:
            if qualified[p] and not pinned[p]:
                succ_count[p] -= 1
                if succ_count[p] == 0:
                    worklist.append(p)
    return qualified


def _eg_witness(model, res, qualified: list) -> Trace:
    """A deadlock-terminated path or a lasso inside the qualifying subgraph."""
    path = [0]
    on_path = {0}
    cur = 0
    while True:
        nxt = None
        link = None
        for tid, pi, ti in res.edges[cur]:
            if qualified[tid]:
                nxt = tid
                link = (pi, ti)
                break
        if nxt is None:
            break  # deadlock state ends the maximal path
        path.append(nxt)
        if nxt in on_path:
            break  # lasso closed: final state revisits the path
        on_path.add(nxt)
        cur = nxt
    states = [res.states[i] for i in path]
    labels = []
    for prev, here in zip(path, path[1:]):
        for tid, pi, ti in res.edges[prev]:
            if tid == here:
                labels.append(model.processes[pi].transitions[ti].display_label())
                break
    return Trace(model, states, labels)


def extract_witness(space: StateSpace, target: State) -> Trace:
    """Shortest initial-to-target trace via BFS parent links.

    Every step is re-validated against the small-step semantics before the
    trace is returned.
    """
    tid = space.index.get(target)
    if tid is None:
        raise TargetUnreachable(f"state not in explored space: {target!r}")
    ids = []
    cur = tid
    while cur is not None:
        ids.append(cur)
        link = space.parent[cur]
        cur = link[0] if link else None
    ids.reverse()
    model = space.model
    states = [space.states[i] for i in ids]
    labels = []
    for here in ids[1:]:
        pid, pi, ti = space.parent[here]
        prev = space.states[pid]
        if (pi, ti) not in enabled_transitions(model, prev):
            raise TargetUnreachable("parent link references a disabled transition")
        if apply_transition(model, prev, (pi, ti)) != space.states[here]:
            raise TargetUnreachable("parent link does not reproduce the child state")
        labels.append(model.processes[pi].transitions[ti].display_label())
    return Trace(model, states, labels)


def replay(trace: Trace) -> bool:
    """Re-run a trace from the initial state through the public semantics."""
    model = trace.model
    state = initial_state(model)
    if trace.states[0] != state:
        return False
    for step, expected in enumerate(trace.states[1:]):
        moved = False
        for ref in enabled_transitions(model, state):
            pi, ti = ref
            t = model.processes[pi].transitions[ti]
            if t.display_label() != trace.labels[step]:
                continue
            candidate = apply_transition(model, state, ref)
            if candidate == expected:
                state = candidate
                moved = True
                break
        if not moved:
            return False
    return True
