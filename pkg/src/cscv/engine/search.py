"""Breadth-first exploration of the context-carrying transition system."""

from __future__ import annotations

import itertools
import logging
import time
from collections import deque
from dataclasses import replace
from typing import Callable, Iterator

from ..analysis import access_sets
from ..context import Context
from ..errors import ReplayDivergence
from ..frontend import ast as A
from ..frontend.snapshot import BlockSnapshot
from ..optimization import HeuristicSet, InstrumentedContract
from ..solver import SolverHandle, make_handle, solve_or_fallback
from ..solver.bounded import Sat
from ..solver.terms import INT, Const, Sym, mk, negate
from .interpreter import OK, REQUIRE_FAILED, TRAP, VIOLATED, Machine, SymbolicTrace, property_holds
from .state import (
    AttackVector,
    Budget,
    GlobalState,
    Invocation,
    Stats,
    Unknown,
    Verdict,
    Verified,
    Violated,
    canonical_hash,
    canonical_serialization,
    initial_state,
)

log = logging.getLogger(__name__)

SEED_CAP = 64
NESTED_CAP = 16


class _TimeUp(Exception):
    pass


def _int_literals(exprs) -> set[int]:
    out = set()
    for e in exprs:
        for x in A.walk_expr(e):
            if isinstance(x, A.IntLit) and x.value >= 0:
                out.add(x.value)
    return out


def _has_old(pred: A.Expr) -> bool:
    return any(isinstance(x, (A.Old, A.Captured)) for x in A.walk_expr(pred))


def _order_by_spread(choices: list[list], cap: int) -> list[tuple]:
    """Up to ``cap`` combinations, small indices in every position first."""
    if not choices:
        return [()]
    sizes = [len(c) for c in choices]
    idx = sorted(itertools.product(*(range(n) for n in sizes)), key=lambda t: (max(t), sum(t), t))
    return [tuple(c[i] for c, i in zip(choices, t)) for t in idx[:cap]]


class _FunctionInfo:
    """Per-function facts the seed rule needs, computed once."""

    def __init__(self, contract: A.ContractAST, f: A.FunctionDecl, prop_literals: set[int]):
        funcs = {g.name: g for g in contract.functions}
        state = set(contract.var_names)
        self.decl = f
        guards: list[A.Expr] = []
        everything: list[A.Expr] = []
        views: set[str] = set()

        def collect(body, into_guards: bool):
            for s in A.walk_stmts(body):
                exprs = list(A.stmt_exprs(s))
                everything.extend(exprs)
                if isinstance(s, (A.Require, A.If)):
                    guards.append(s.cond)
                elif into_guards and isinstance(s, A.Return) and s.value is not None:
                    guards.append(s.value)
                for e in exprs:
                    for x in A.walk_expr(e):
                        if isinstance(x, A.Call) and x.name not in views:
                            views.add(x.name)
                            collect(funcs[x.name].body, True)

        collect(f.body, False)
        self.literals = prop_literals | _int_literals(guards)
        self.reads_value = any(isinstance(x, A.MsgValue) for e in everything for x in A.walk_expr(e))
        compared: set[str] = set()
        for g in guards:
            for x in A.walk_expr(g):
                if isinstance(x, A.Binary) and x.op in ("<", "<=", ">", ">=", "==", "!="):
                    for y in A.walk_expr(x):
                        if isinstance(y, A.Name) and y.id in state:
                            compared.add(y.id)
                        elif isinstance(y, A.Index):
                            compared.add(y.base)
                        elif isinstance(y, A.Call):
                            compared |= _view_state_reads(funcs, y.name, state)
        self.compared = sorted(compared)
        self.reads: set[str] = set()
        for e in everything:
            for x in A.walk_expr(e):
                if isinstance(x, A.Name) and x.id in state:
                    self.reads.add(x.id)
                elif isinstance(x, A.Index):
                    self.reads.add(x.base)


def _view_state_reads(funcs, name: str, state: set[str], seen=None) -> set[str]:
    seen = seen if seen is not None else set()
    if name in seen:
        return set()
    seen.add(name)
    out = set()
    for s in A.walk_stmts(funcs[name].body):
        for e in A.stmt_exprs(s):
            for x in A.walk_expr(e):
                if isinstance(x, A.Name) and x.id in state:
                    out.add(x.id)
                elif isinstance(x, A.Index):
                    out.add(x.base)
                elif isinstance(x, A.Call):
                    out |= _view_state_reads(funcs, x.name, state, seen)
    return out


class Explorer:
    """One verification run: owns its machine, solver handle and statistics."""

    def __init__(
        self,
        context: Context,
        instrumented: InstrumentedContract,
        snapshot: BlockSnapshot,
        budget: Budget | None = None,
        solver: SolverHandle | None = None,
        on_trace: Callable[[GlobalState, Invocation, SymbolicTrace], None] | None = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.context = context
        self.instrumented = instrumented
        self.contract = instrumented.base
        self.snapshot = snapshot
        self.budget = budget or Budget()
        self.solver = solver or make_handle("builtin")
        self.on_trace = on_trace
        self.clock = clock
        self.heuristics: HeuristicSet = context.heuristics or HeuristicSet()
        self.actors = tuple(snapshot.actors)
        self.attacker = snapshot.attacker
        self.machine = Machine(
            self.contract,
            self.actors,
            self.attacker,
            self.budget.reentry_depth,
            instrumented.pre_capture,
            instrumented.postcondition,
        )
        prop_lits = _int_literals([context.property.pred])
        self.info = {f.name: _FunctionInfo(self.contract, f, prop_lits) for f in self.contract.externals}
        self.sets = access_sets(self.contract)
        self.transitions = 0
        self.deadline = None

    # -- inputs ---------------------------------------------------------------

    def _check_time(self) -> None:
        if self.deadline is not None and self.clock() > self.deadline:
            raise _TimeUp

    def seed_pool(self, state: GlobalState, f: str) -> list[int]:
        info = self.info[f]
        pool: dict[int, None] = {}
        for v in self.heuristics.arg_seeds(f):
            pool.setdefault(v, None)
        for name, extra in self.heuristics.state_seed_vars(sorted(info.reads)):
            for v in _int_values(state.valuation.get(name)) + extra:
                pool.setdefault(v, None)
        default = {0, 1} | info.literals
        for name in info.compared:
            default.update(_int_values(state.valuation.get(name)))
        for v in sorted(default):
            pool.setdefault(v, None)
        return [v for v in pool if v >= 0]

    def _choices(self, f: str, pool: list[int]) -> list[list]:
        info = self.info[f]
        others = [a for a in self.actors if a != self.attacker]
        choices = []
        for p in info.decl.params:
            if p.type == A.INT:
                choices.append(pool)
            elif p.type == A.BOOL:
                choices.append([False, True])
            else:
                choices.append([self.attacker] + others)
        choices.append(pool if info.reads_value else [0])
        return choices

    def seed_invocations(self, state: GlobalState, f: str, pool: list[int] | None = None, cap: int = SEED_CAP):
        pool = self.seed_pool(state, f) if pool is None else pool
        out = []
        for combo in _order_by_spread(self._choices(f, pool), cap):
            out.append(Invocation(f, self.attacker, combo[-1], tuple(combo[:-1])))
        return out

    def reentry_variants(self, state: GlobalState, inv: Invocation) -> list[Invocation]:
        f = inv.function
        targets: list[str] = []
        for g in self.heuristics.reentry_targets(f) + [f] + list(self.context.relevance.ranking.get(f, ())):
            if g in self.info and g not in targets:
                targets.append(g)
        outer_pool = self.seed_pool(state, f)
        out = []
        for g in targets:
            pool = list(dict.fromkeys(outer_pool + self.seed_pool(state, g)))
            for nested in self.seed_invocations(state, g, pool, NESTED_CAP):
                out.append(replace(inv, reentry=(nested,)))
        return out

    def _side_conditions(self, trace: SymbolicTrace) -> list:
        side = []
        for name, sort, _ in trace.symbols:
            if sort == INT:
                side.append(mk(">=", Sym(name, INT), Const(0, INT)))
        if not self.info[trace.function].reads_value:
            side.append(mk("==", Sym("msg.value", INT), Const(0, INT)))
        return side

    def _solve(self, query: list):
        self._check_time()
        return solve_or_fallback(query, self.solver)

    def _from_model(self, inv: Invocation, model: dict) -> Invocation:
        params = self.info[inv.function].decl.params
        args = tuple(model.get(f"arg.{p.name}", v) for p, v in zip(params, inv.args))
        return Invocation(
            inv.function,
            model.get("msg.sender", inv.sender),
            model.get("msg.value", inv.value),
            args,
            inv.reentry,
        )

    def flip_candidates(self, inv: Invocation, trace: SymbolicTrace, start: int, attempted: set, limit: int):
        """Negate flippable constraints of ``trace`` from index ``start`` downwards.

        Yields ``(next_start, invocation_or_None)`` after each solver call, so the
        caller can interleave execution and stop at its flip budget.
        """
        side = self._side_conditions(trace)
        cs = trace.constraints
        i = start
        while i >= 0 and limit > 0:
            c = cs[i]
            i -= 1
            if not c.flippable:
                continue
            flipped = negate(c.term)
            if isinstance(flipped, Const):
                continue
            query = [x.term for x in cs[: i + 1]] + [flipped]
            key = tuple(query)
            if key in attempted:
                continue
            attempted.add(key)
            limit -= 1
            result = self._solve(query + side)
            new = self._from_model(inv, result.model) if isinstance(result, Sat) else None
            yield i, new

    def falsify(self, inv: Invocation, trace: SymbolicTrace, attempted: set) -> Invocation | None:
        """Solve path and not-postcondition; the model still has to be executed."""
        post = trace.post_term
        if post is None or isinstance(post, Const):
            return None
        query = trace.path_constraints + [negate(post)]
        key = ("post",) + tuple(query)
        if key in attempted:
            return None
        attempted.add(key)
        result = self._solve(query + self._side_conditions(trace))
        return self._from_model(inv, result.model) if isinstance(result, Sat) else None

    def generate_inputs(self, state: GlobalState, f: str, trace_history: list[tuple[Invocation, SymbolicTrace]]):
        """Seed invocations plus one generation of branch flips over ``trace_history``."""
        out = list(self.seed_invocations(state, f))
        attempted: set = set()
        budget = self.budget.branch_flips
        for inv, trace in trace_history:
            for _, new in self.flip_candidates(inv, trace, len(trace.constraints) - 1, attempted, budget):
                budget -= 1
                if new is not None and new not in out:
                    out.append(new)
            if budget <= 0:
                break
        return out

    # -- transitions ------------------------------------------------------------

    def step(self, state: GlobalState, inv: Invocation):
        self._check_time()
        post, trace, outcome = self.machine.run(state, inv)
        self.transitions += 1
        if self.on_trace is not None:
            self.on_trace(state, inv, trace)
        return post, trace, outcome

    def successors(self, state: GlobalState, f: str) -> Iterator[tuple[Invocation, GlobalState, SymbolicTrace, str]]:
        """Execute candidates for ``f`` at ``state`` lazily, in generation order."""
        queue = deque(self.seed_invocations(state, f))
        done: set[Invocation] = set()
        attempted: set = set()
        history: list[tuple[Invocation, SymbolicTrace]] = []
        cursor = 0
        flip_pos: int | None = None
        flips_left = self.budget.branch_flips
        reenter = self.budget.reentry_depth > 0
        while True:
            if queue:
                inv = queue.popleft()
                if inv in done:
                    continue
                done.add(inv)
                post, trace, outcome = self.step(state, inv)
                history.append((inv, trace))
                yield inv, post, trace, outcome
                if outcome == OK and flips_left > 0:
                    new = self.falsify(inv, trace, attempted)
                    if new is not None and new not in done:
                        queue.appendleft(new)
                if reenter and trace.attacker_calls and not inv.reentry:
                    queue.extend(v for v in self.reentry_variants(state, inv) if v not in done)
                continue
            if flips_left <= 0 or cursor >= len(history):
                return
            inv, trace = history[cursor]
            if flip_pos is None:
                flip_pos = len(trace.constraints) - 1
            produced = False
            for flip_pos, new in self.flip_candidates(inv, trace, flip_pos, attempted, 1):
                flips_left -= 1
                produced = True
                if new is not None and new not in done:
                    queue.append(new)
            if not produced:
                cursor += 1
                flip_pos = None

    # -- exploration ------------------------------------------------------------

    def _stats(self, start: float, states: int) -> Stats:
        return Stats(self.transitions, states, self.solver.calls - self._calls0, self.clock() - start)

    def explore(self) -> Verdict:
        start = self.clock()
        self.deadline = start + self.budget.time_limit
        self._calls0 = self.solver.calls
        unknowns0 = self.solver.unknowns
        s0 = initial_state(self.context, self.contract, self.snapshot)
        pred = self.instrumented.postcondition
        if not _has_old(pred) and not property_holds(pred, self.contract, s0):
            vector = AttackVector((s0,), (), 0)
            self._validate(vector)
            return Violated(vector, self._stats(start, 1))
        h0 = canonical_hash(s0)
        seen: dict[str, GlobalState] = {h0: s0}
        parent: dict[str, tuple[str, Invocation] | None] = {h0: None}
        frontier: list[tuple[GlobalState, str, str | None]] = [(s0, h0, None)]
        level = 0
        try:
            while frontier:
                if level >= self.budget.diameter:
                    return Unknown("diameter-exhausted", self._stats(start, len(seen)))
                nxt = []
                for s, h, via in frontier:
                    for f in self.context.relevance.order_after(via):
                        for inv, post, trace, outcome in self.successors(s, f):
                            if outcome == VIOLATED:
                                vector = self._vector(seen, parent, h, inv, post)
                                self._validate(vector)
                                return Violated(vector, self._stats(start, len(seen)))
                            if outcome != OK:
                                continue
                            hp = canonical_hash(post)
                            if hp in seen:
                                if canonical_serialization(seen[hp]) != canonical_serialization(post):
                                    raise RuntimeError("state digest collision")
                                continue
                            seen[hp] = post
                            parent[hp] = (h, inv)
                            nxt.append((post, hp, f))
                frontier = nxt
                level += 1
        except _TimeUp:
            return Unknown("time-exhausted", self._stats(start, len(seen)))
        if self.solver.unknowns > unknowns0:
            return Unknown("solver-unknown", self._stats(start, len(seen)))
        return Verified(self._stats(start, len(seen)))

    def _vector(self, seen, parent, h: str, inv: Invocation, post: GlobalState) -> AttackVector:
        states = [post]
        invs = [inv]
        while parent[h] is not None:
            ph, pinv = parent[h]
            states.append(seen[h])
            invs.append(pinv)
            h = ph
        states.append(seen[h])
        states.reverse()
        invs.reverse()
        return AttackVector(tuple(states), tuple(invs), len(invs))

    def _validate(self, vector: AttackVector) -> None:
        if not replay(vector, self.instrumented, self.snapshot, self.context):
            raise ReplayDivergence(vector.violating_index, "reported vector does not replay")


def _int_values(v) -> list[int]:
    if isinstance(v, dict):
        return [x for x in v.values() if isinstance(x, int) and not isinstance(x, bool)]
    if isinstance(v, int) and not isinstance(v, bool):
        return [v]
    return []


def _nesting(inv: Invocation) -> int:
    return 1 + max((_nesting(r) for r in inv.reentry), default=0) if inv.reentry else 0


def generate_inputs(
    state: GlobalState,
    f: str,
    context: Context,
    trace_history: list[tuple[Invocation, SymbolicTrace]],
    budget: Budget,
    solver: SolverHandle,
    instrumented: InstrumentedContract,
    snapshot: BlockSnapshot,
) -> list[Invocation]:
    ex = Explorer(context, instrumented, snapshot, budget, solver)
    return ex.generate_inputs(state, f, trace_history)


def explore(
    context: Context,
    instrumented: InstrumentedContract,
    snapshot: BlockSnapshot,
    budget: Budget | None = None,
    solver: SolverHandle | None = None,
    on_trace=None,
) -> Verdict:
    return Explorer(context, instrumented, snapshot, budget, solver, on_trace).explore()


def step_concolic(
    state: GlobalState,
    inv: Invocation,
    instrumented: InstrumentedContract,
    budget: Budget | None = None,
):
    """Execute ``inv`` at ``state``; returns ``(post, trace, outcome)``."""
    budget = budget or Budget()
    if _nesting(inv) > budget.reentry_depth:
        raise ValueError("reentry nesting exceeds the budget")
    m = Machine(
        instrumented.base,
        state.actors,
        state.attacker,
        budget.reentry_depth,
        instrumented.pre_capture,
        instrumented.postcondition,
    )
    return m.run(state, inv)


def replay(
    vector: AttackVector,
    instrumented: InstrumentedContract,
    snapshot: BlockSnapshot,
    context: Context,
) -> bool:
    """Re-execute the vector concretely from s0.

    Returns True iff every state matches and the postcondition first fails at
    ``violating_index``. A reverting invocation raises :class:`ReplayDivergence`.
    """
    contract = instrumented.base
    s = initial_state(context, contract, snapshot)
    if canonical_serialization(s) != canonical_serialization(vector.states[0]):
        return False
    k = vector.violating_index
    if not 0 <= k <= len(vector.invocations):
        return False
    pred = instrumented.postcondition
    if not _has_old(pred) and not property_holds(pred, contract, s):
        return k == 0
    if k == 0:
        return False
    depth = max((_nesting(i) for i in vector.invocations), default=0)
    m = Machine(contract, s.actors, s.attacker, depth, instrumented.pre_capture, pred)
    for step, inv in enumerate(vector.invocations, 1):
        post, _, outcome = m.run(s, inv, symbolic=False)
        if outcome in (REQUIRE_FAILED, TRAP):
            raise ReplayDivergence(step, f"{inv} ended in {outcome}")
        if canonical_serialization(post) != canonical_serialization(vector.states[step]):
            return False
        if outcome == VIOLATED:
            return step == k
        s = post
    return False
