"""Syntax trees for MCL contracts and properties.

All nodes are frozen dataclasses. Source positions are excluded from equality,
so structurally identical trees compare equal regardless of layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

INT = "int"
BOOL = "bool"
ADDRESS = "address"
MAP = "map"
SCALAR_TYPES = (INT, BOOL, ADDRESS)


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class AddrLit:
    value: str
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Name:
    id: str
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Index:
    base: str
    index: "Expr"
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class MsgSender:
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class MsgValue:
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Attacker:
    """The snapshot's designated attacker address (properties only)."""

    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Old:
    """Pre-transition value of an lvalue (properties only)."""

    target: "Expr"
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Captured:
    """Reference to the ``slot``-th value captured at invocation entry."""

    slot: int
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...] = ()
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: "Expr"
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: tuple[int, int] = _pos()


Expr = Union[IntLit, BoolLit, AddrLit, Name, Index, MsgSender, MsgValue, Attacker, Old, Captured, Call, Unary, Binary]
Literal = Union[IntLit, BoolLit, AddrLit]


@dataclass(frozen=True)
class Require:
    cond: Expr
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Assign:
    target: Union[Name, Index]
    value: Expr
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class CallStmt:
    target: Expr
    amount: Expr
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] | None = None
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Return:
    value: Expr | None = None
    pos: tuple[int, int] = _pos()


Stmt = Union[Require, Assign, CallStmt, If, Return]


@dataclass(frozen=True)
class StateVar:
    name: str
    type: str
    init: Literal | None = None
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    pos: tuple[int, int] = _pos()


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    kind: str  # "external" or "view"
    params: tuple[Param, ...]
    return_type: str | None
    body: tuple[Stmt, ...]
    pos: tuple[int, int] = _pos()

    @property
    def is_external(self) -> bool:
        return self.kind == "external"


@dataclass(frozen=True)
class ContractAST:
    name: str
    state_vars: tuple[StateVar, ...] = ()
    functions: tuple[FunctionDecl, ...] = ()
    wrap256: bool = False

    def var(self, name: str) -> StateVar | None:
        for v in self.state_vars:
            if v.name == name:
                return v
        return None

    def function(self, name: str) -> FunctionDecl | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.state_vars)

    @property
    def externals(self) -> tuple[FunctionDecl, ...]:
        return tuple(f for f in self.functions if f.kind == "external")

    @property
    def external_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.functions if f.kind == "external")

    @property
    def views(self) -> tuple[FunctionDecl, ...]:
        return tuple(f for f in self.functions if f.kind == "view")


@dataclass(frozen=True)
class TemporalProperty:
    form: str  # "always" (spatializable) or "eventually"
    pred: Expr
    source: str = field(default="", compare=False)


def walk_expr(e: Expr):
    """Yield ``e`` and all its subexpressions, pre-order."""
    yield e
    if isinstance(e, Index):
        yield from walk_expr(e.index)
    elif isinstance(e, Old):
        yield from walk_expr(e.target)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_expr(a)
    elif isinstance(e, Unary):
        yield from walk_expr(e.operand)
    elif isinstance(e, Binary):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)


def walk_stmts(body):
    """Yield every statement in ``body``, descending into if/else blocks."""
    for s in body:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            if s.orelse is not None:
                yield from walk_stmts(s.orelse)


def stmt_exprs(s: Stmt) -> list[Expr]:
    if isinstance(s, Require):
        return [s.cond]
    if isinstance(s, Assign):
        out = [s.value]
        if isinstance(s.target, Index):
            out.append(s.target.index)
        return out
    if isinstance(s, CallStmt):
        return [s.target, s.amount]
    if isinstance(s, If):
        return [s.cond]
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    return []
