"""Read/write sets and state-variable dependencies of MCL contracts.

Maps are tracked as whole variables. View calls are inlined transitively, so
everything here is a syntactic fixpoint over the validated AST.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import SameFunction
from .frontend import ast as A


@dataclass(frozen=True)
class AccessSets:
    reads: dict[str, frozenset[str]]
    writes: dict[str, frozenset[str]]

    def touched(self, f: str) -> frozenset[str]:
        return self.reads[f] | self.writes[f]

    def to_json(self) -> dict:
        return {
            f: {"reads": sorted(self.reads[f]), "writes": sorted(self.writes[f])}
            for f in sorted(self.reads)
        }


@dataclass(frozen=True)
class DependencyGraph:
    """Edge ``(v, w)``: the value of ``v`` after some function may depend on ``w``."""

    edges: frozenset[tuple[str, str]]

    def successors(self, v: str) -> set[str]:
        return {w for (x, w) in self.edges if x == v}

    def to_json(self) -> list[list[str]]:
        return [list(e) for e in sorted(self.edges)]


class _Scanner:
    """Per-contract helper that memoizes view inlining."""

    def __init__(self, contract: A.ContractAST):
        self.contract = contract
        self.state = set(contract.var_names)
        self.funcs = {f.name: f for f in contract.functions}
        self._view_reads: dict[str, frozenset[str]] = {}

    def view_reads(self, name: str) -> frozenset[str]:
        if name not in self._view_reads:
            g = self.funcs[name]
            out: set[str] = set()
            for s in A.walk_stmts(g.body):
                for e in A.stmt_exprs(s):
                    out |= self.expr_reads(e)
            self._view_reads[name] = frozenset(out)
        return self._view_reads[name]

    def expr_reads(self, e: A.Expr) -> set[str]:
        out: set[str] = set()
        for x in A.walk_expr(e):
            if isinstance(x, A.Name) and x.id in self.state:
                out.add(x.id)
            elif isinstance(x, A.Index):
                out.add(x.base)
            elif isinstance(x, A.Call):
                out |= self.view_reads(x.name)
        return out

    def expr_params(self, e: A.Expr, params: set[str]) -> set[str]:
        return {x.id for x in A.walk_expr(e) if isinstance(x, A.Name) and x.id in params}

    def view_has_require(self, name: str, seen: frozenset = frozenset()) -> bool:
        g = self.funcs[name]
        for s in A.walk_stmts(g.body):
            if isinstance(s, A.Require):
                return True
            for e in A.stmt_exprs(s):
                for x in A.walk_expr(e):
                    if isinstance(x, A.Call) and x.name not in seen:
                        if self.view_has_require(x.name, seen | {name}):
                            return True
        return False


def access_sets(contract: A.ContractAST) -> AccessSets:
    sc = _Scanner(contract)
    reads: dict[str, frozenset[str]] = {}
    writes: dict[str, frozenset[str]] = {}
    for f in contract.functions:
        r: set[str] = set()
        w: set[str] = set()
        for s in A.walk_stmts(f.body):
            for e in A.stmt_exprs(s):
                r |= sc.expr_reads(e)
            if isinstance(s, A.Assign):
                t = s.target
                if isinstance(t, A.Index):
                    w.add(t.base)
                elif t.id in sc.state:
                    w.add(t.id)
        reads[f.name] = frozenset(r)
        writes[f.name] = frozenset(w)
    return AccessSets(reads, writes)


def _function_edges(sc: _Scanner, f: A.FunctionDecl) -> set[tuple[str, str]]:
    params = {p.name for p in f.params}
    param_deps: dict[str, set[str]] = {p: set() for p in params}

    def deps(e: A.Expr) -> set[str]:
        out = sc.expr_reads(e)
        for p in sc.expr_params(e, params):
            out |= param_deps[p]
        return out

    # Guards that can revert the whole invocation control every assignment in it.
    def global_control() -> set[str]:
        out: set[str] = set()

        def visit(body) -> bool:
            reverts = False
            for s in body:
                if isinstance(s, A.Require):
                    out.update(deps(s.cond))
                    reverts = True
                if isinstance(s, A.If):
                    inner = visit(s.then)
                    if s.orelse is not None:
                        inner = visit(s.orelse) or inner
                    if inner:
                        out.update(deps(s.cond))
                        reverts = True
                for e in A.stmt_exprs(s):
                    for x in A.walk_expr(e):
                        if isinstance(x, A.Call) and sc.view_has_require(x.name):
                            out.update(deps(e))
                            reverts = True
            return reverts

        visit(f.body)
        return out

    def assignments(body, conds: list[A.Expr]):
        for s in body:
            if isinstance(s, A.Assign):
                yield s, conds
            elif isinstance(s, A.If):
                yield from assignments(s.then, conds + [s.cond])
                if s.orelse is not None:
                    yield from assignments(s.orelse, conds + [s.cond])

    # Parameters reassigned as locals carry their sources' dependencies.
    changed = True
    while changed:
        changed = False
        ctrl = global_control()
        for s, conds in assignments(f.body, []):
            t = s.target
            if isinstance(t, A.Name) and t.id in params:
                new = deps(s.value) | ctrl
                for c in conds:
                    new |= deps(c)
                if not new <= param_deps[t.id]:
                    param_deps[t.id] |= new
                    changed = True

    ctrl = global_control()
    edges: set[tuple[str, str]] = set()
    for s, conds in assignments(f.body, []):
        t = s.target
        if isinstance(t, A.Index):
            v = t.base
            src = deps(s.value) | deps(t.index)
        elif t.id in sc.state:
            v = t.id
            src = deps(s.value)
        else:
            continue
        src |= ctrl
        for c in conds:
            src |= deps(c)
        edges.update((v, w) for w in src)
    return edges


def dependency_graph(contract: A.ContractAST) -> DependencyGraph:
    return _dependency_graph_cached(contract)


@lru_cache(maxsize=128)
def _dependency_graph_cached(contract: A.ContractAST) -> DependencyGraph:
    sc = _Scanner(contract)
    edges: set[tuple[str, str]] = set()
    for f in contract.functions:
        if f.kind == "external":
            edges |= _function_edges(sc, f)
    return DependencyGraph(frozenset(edges))


def dependency_closure(seed_vars, contract: A.ContractAST) -> frozenset[str]:
    """Least fixpoint of ``seed_vars`` under dependency edges."""
    graph = dependency_graph(contract)
    succ: dict[str, set[str]] = {}
    for v, w in graph.edges:
        succ.setdefault(v, set()).add(w)
    closure = set(seed_vars)
    work = list(closure)
    while work:
        v = work.pop()
        for w in succ.get(v, ()):
            if w not in closure:
                closure.add(w)
                work.append(w)
    return frozenset(closure)


def shared_variable_count(f: str, g: str, sets: AccessSets) -> int:
    if f == g:
        raise SameFunction(f)
    return len(sets.touched(f) & sets.touched(g))


def property_vars(pred: A.Expr) -> frozenset[str]:
    """State variables a property predicate mentions (inside or outside ``old``)."""
    out = set()
    for x in A.walk_expr(pred):
        if isinstance(x, A.Name):
            out.add(x.id)
        elif isinstance(x, A.Index):
            out.add(x.base)
    return frozenset(out)
