"""Context optimizations: property spatialization, function constantization and heuristics."""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .analysis import access_sets, dependency_closure
from .context import Context, RelevanceFunction
from .errors import MissingValue, UnsupportedForm
from .frontend import ast as A

CLASSES = ("BF", "RE", "PM", "IV", "AF", "UE")
KINDS = ("priority-boost", "arg-seed", "state-seed", "reentry-target")
SWEEP_GRID = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


# -- spatialization ---------------------------------------------------------


@dataclass(frozen=True)
class InstrumentedContract:
    """A contract whose external functions all carry the same transaction-level check.

    ``pre_capture`` lists the lvalues recorded at invocation entry; the
    postcondition refers to them through :class:`~cscv.frontend.ast.Captured`.
    """

    base: A.ContractAST
    pre_capture: tuple[A.Expr, ...]
    postcondition: A.Expr
    functions: tuple[str, ...]

    def check_for(self, f: str) -> tuple[tuple[A.Expr, ...], A.Expr]:
        if f not in self.functions:
            raise KeyError(f)
        return self.pre_capture, self.postcondition


def _replace_old(e: A.Expr, slots: dict[A.Expr, int]) -> A.Expr:
    if isinstance(e, A.Old):
        return A.Captured(slots[e.target], e.pos)
    if isinstance(e, A.Unary):
        return A.Unary(e.op, _replace_old(e.operand, slots), e.pos)
    if isinstance(e, A.Binary):
        return A.Binary(e.op, _replace_old(e.left, slots), _replace_old(e.right, slots), e.pos)
    return e


def spatialize(prop: A.TemporalProperty, contract: A.ContractAST) -> InstrumentedContract:
    if prop.form != "always":
        raise UnsupportedForm(prop.form)
    slots: dict[A.Expr, int] = {}
    for x in A.walk_expr(prop.pred):
        if isinstance(x, A.Old) and x.target not in slots:
            slots[x.target] = len(slots)
    post = _replace_old(prop.pred, slots)
    captures = tuple(sorted(slots, key=slots.__getitem__))
    return InstrumentedContract(contract, captures, post, contract.external_names)


# -- constantization ----------------------------------------------------------


def _called_views(contract: A.ContractAST) -> set[str]:
    out = set()
    for f in contract.functions:
        for s in A.walk_stmts(f.body):
            for e in A.stmt_exprs(s):
                out |= {x.name for x in A.walk_expr(e) if isinstance(x, A.Call)}
    return out


def constantizable(contract: A.ContractAST) -> list[str]:
    """Called parameterless views whose read closure no external function writes."""
    called = _called_views(contract)
    sets = access_sets(contract)
    written = set()
    for f in contract.externals:
        written |= sets.writes[f.name]
    return [
        g.name
        for g in contract.views
        if g.name in called and not g.params and not (dependency_closure(sets.reads[g.name], contract) & written)
    ]


def _literal(value, pos) -> A.Literal:
    if isinstance(value, bool):
        return A.BoolLit(value, pos)
    if isinstance(value, int):
        return A.IntLit(value, pos)
    return A.AddrLit(value, pos)


def _subst_expr(e: A.Expr, consts: dict[str, object]) -> A.Expr:
    if isinstance(e, A.Call):
        if e.name in consts and not e.args:
            return _literal(consts[e.name], e.pos)
        return A.Call(e.name, tuple(_subst_expr(a, consts) for a in e.args), e.pos)
    if isinstance(e, A.Index):
        return A.Index(e.base, _subst_expr(e.index, consts), e.pos)
    if isinstance(e, A.Unary):
        return A.Unary(e.op, _subst_expr(e.operand, consts), e.pos)
    if isinstance(e, A.Binary):
        return A.Binary(e.op, _subst_expr(e.left, consts), _subst_expr(e.right, consts), e.pos)
    return e


def _subst_body(body, consts):
    out = []
    for s in body:
        if isinstance(s, A.Require):
            s = A.Require(_subst_expr(s.cond, consts), s.pos)
        elif isinstance(s, A.Assign):
            target = s.target
            if isinstance(target, A.Index):
                target = A.Index(target.base, _subst_expr(target.index, consts), target.pos)
            s = A.Assign(target, _subst_expr(s.value, consts), s.pos)
        elif isinstance(s, A.CallStmt):
            s = A.CallStmt(_subst_expr(s.target, consts), _subst_expr(s.amount, consts), s.pos)
        elif isinstance(s, A.If):
            orelse = None if s.orelse is None else _subst_body(s.orelse, consts)
            s = A.If(_subst_expr(s.cond, consts), _subst_body(s.then, consts), orelse, s.pos)
        elif isinstance(s, A.Return) and s.value is not None:
            s = A.Return(_subst_expr(s.value, consts), s.pos)
        out.append(s)
    return tuple(out)


def constantize(contract: A.ContractAST, context: Context, default_zero: bool = False) -> A.ContractAST:
    """Replace calls to state-constant nullary views by their value under the context."""
    from .engine.interpreter import evaluate_view

    candidates = constantizable(contract)
    if not candidates:
        return contract
    sets = access_sets(contract)
    valuation = dict(context.evaluation.valuation)
    consts: dict[str, object] = {}
    for g in candidates:
        for name in sorted(sets.reads[g]):
            if name in valuation:
                continue
            decl = contract.var(name)
            if decl.type == A.MAP:
                valuation[name] = {}
            elif decl.init is not None:
                valuation[name] = decl.init.value
            elif default_zero:
                from .context import zero_value

                valuation[name] = zero_value(decl.type)
            else:
                raise MissingValue(name)
        value = evaluate_view(contract, g, valuation)
        if value is not None:
            consts[g] = value
    if not consts:
        return contract
    functions = tuple(replace(f, body=_subst_body(f.body, consts)) for f in contract.functions)
    return replace(contract, functions=functions)


# -- heuristics ---------------------------------------------------------------


@dataclass(frozen=True)
class Heuristic:
    id: str
    cls: str
    kind: str
    match: dict = field(hash=False)
    payload: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"heuristic {self.id}: unknown class {self.cls!r}")
        if self.kind not in KINDS:
            raise ValueError(f"heuristic {self.id}: unknown kind {self.kind!r}")
        want = "variable" if self.kind == "state-seed" else "function"
        if set(self.match) != {want}:
            raise ValueError(f"heuristic {self.id}: {self.kind} matches on {want!r}")
        p = self.payload
        if self.kind == "priority-boost" and not isinstance(p.get("delta"), int):
            raise ValueError(f"heuristic {self.id}: priority-boost needs an integer 'delta'")
        if self.kind in ("arg-seed", "state-seed"):
            vals = p.get("values", [])
            if not isinstance(vals, list) or not all(type(v) is int for v in vals):
                raise ValueError(f"heuristic {self.id}: 'values' must be a list of integers")
            if self.kind == "arg-seed" and not vals:
                raise ValueError(f"heuristic {self.id}: arg-seed needs at least one value")
        if self.kind == "reentry-target" and not isinstance(p.get("target"), str):
            raise ValueError(f"heuristic {self.id}: reentry-target needs a 'target' function name")

    def matches(self, name: str) -> bool:
        pattern = self.match.get("function") or self.match.get("variable")
        return re.fullmatch(pattern, name) is not None

    @classmethod
    def from_json(cls, d: dict) -> "Heuristic":
        return cls(d["id"], d["class"], d["kind"], dict(d["match"]), dict(d.get("payload", {})))

    def to_json(self) -> dict:
        return {"id": self.id, "class": self.cls, "kind": self.kind, "match": self.match, "payload": self.payload}


@dataclass(frozen=True)
class HeuristicSet:
    selected: tuple[Heuristic, ...] = ()
    base_size: int = 0
    proportion: Fraction = Fraction(0)
    rng_seed: int = 0

    def of_kind(self, kind: str):
        return [h for h in self.selected if h.kind == kind]

    def arg_seeds(self, f: str) -> list[int]:
        out: list[int] = []
        for h in self.of_kind("arg-seed"):
            if h.matches(f):
                out += h.payload["values"]
        return out

    def state_seed_vars(self, names) -> list[tuple[str, list[int]]]:
        out = []
        for h in self.of_kind("state-seed"):
            for n in names:
                if h.matches(n):
                    out.append((n, list(h.payload.get("values", []))))
        return out

    def reentry_targets(self, f: str) -> list[str]:
        return [h.payload["target"] for h in self.of_kind("reentry-target") if h.matches(f)]


def load_heuristic_base(path: str | Path) -> list[Heuristic]:
    data = json.loads(Path(path).read_text())
    records = data["heuristics"] if isinstance(data, dict) else data
    base = [Heuristic.from_json(r) for r in records]
    ids = [h.id for h in base]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate heuristic ids in base")
    return base


def as_fraction(p) -> Fraction:
    if isinstance(p, Fraction):
        return p
    if isinstance(p, float):
        return Fraction(p).limit_denominator(10**6)
    return Fraction(p)


def select_heuristics(base, proportion, rng_seed: int) -> HeuristicSet:
    """Uniformly sample ``floor(proportion * len(base))`` heuristics, reproducibly."""
    p = as_fraction(proportion)
    if not 0 <= p <= 1:
        raise ValueError(f"proportion {proportion} outside [0, 1]")
    base = list(base)
    k = int(p * len(base))  # floor for non-negative rationals
    picked = sorted(random.Random(rng_seed).sample(range(len(base)), k))
    return HeuristicSet(tuple(base[i] for i in picked), len(base), p, rng_seed)


def _boost(order: tuple[str, ...], h: Heuristic) -> tuple[str, ...]:
    out = list(order)
    delta = h.payload["delta"]
    for name in [n for n in order if h.matches(n)]:
        i = out.index(name)
        out.insert(max(0, i - delta), out.pop(i))
    return tuple(out)


def apply_heuristics(context: Context, hs: HeuristicSet) -> Context:
    if not hs.selected:
        return context
    rel = context.relevance
    ranking = dict(rel.ranking)
    initial = rel.initial
    for h in hs.of_kind("priority-boost"):
        initial = _boost(initial, h)
        ranking = {f: _boost(r, h) for f, r in ranking.items()}
    return replace(context, relevance=RelevanceFunction(ranking, initial), heuristics=hs)
