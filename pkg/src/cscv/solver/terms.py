"""Constraint terms: the expression trees the engine records and the solver decides.

Terms are immutable and hashable. Constructors go through :func:`mk`, which
folds constant subterms so that fully concrete computations never reach the
solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Union

INT = "int"
BOOL = "bool"


@dataclass(frozen=True)
class AddressSort:
    """Addresses drawn from a finite, ordered actor list."""

    domain: tuple[str, ...]

    def __str__(self) -> str:
        return "address"


Sort = Union[str, AddressSort]
Value = Union[int, bool, str]


@dataclass(frozen=True)
class Const:
    value: Value
    sort: Sort

    def __str__(self) -> str:
        if self.sort == BOOL:
            return "true" if self.value else "false"
        return str(self.value)


@dataclass(frozen=True)
class Sym:
    name: str
    sort: Sort = INT

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Op:
    op: str
    args: tuple["Term", ...]

    def __str__(self) -> str:
        if self.op in ("not", "neg"):
            sym = "!" if self.op == "not" else "-"
            return f"{sym}{self.args[0]}"
        if self.op == "ite":
            c, a, b = self.args
            return f"ite({c}, {a}, {b})"
        return "(" + f" {_INFIX.get(self.op, self.op)} ".join(map(str, self.args)) + ")"


Term = Union[Const, Sym, Op]

_INFIX = {"and": "&&", "or": "||", "=>": "->", "div": "/", "mod": "%"}

ARITH = frozenset({"+", "-", "*", "div", "mod"})
COMPARE = frozenset({"<", "<=", ">", ">="})
EQUALITY = frozenset({"==", "!="})
CONNECTIVES = frozenset({"and", "or", "=>"})

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)


def const(value: Value, sort: Sort | None = None) -> Const:
    if sort is None:
        if isinstance(value, bool):
            sort = BOOL
        elif isinstance(value, int):
            sort = INT
        else:
            raise TypeError(f"address constant {value!r} needs an explicit sort")
    return Const(value, sort)


def addr(value: str, domain: tuple[str, ...] = ()) -> Const:
    return Const(value, AddressSort(tuple(domain)))


def floor_div(a: int, b: int) -> int:
    # Total: x / 0 is 0 in term semantics; the engine guards real divisions.
    return 0 if b == 0 else a // b


def euclid_mod(a: int, b: int) -> int:
    if b == 0:
        return a
    return a - abs(b) * (a // abs(b))


def _apply(op: str, vals: list) -> Value:
    if op == "+":
        return vals[0] + vals[1]
    if op == "-":
        return vals[0] - vals[1]
    if op == "*":
        return vals[0] * vals[1]
    if op == "div":
        return floor_div(vals[0], vals[1])
    if op == "mod":
        return euclid_mod(vals[0], vals[1])
    if op == "neg":
        return -vals[0]
    if op == "<":
        return vals[0] < vals[1]
    if op == "<=":
        return vals[0] <= vals[1]
    if op == ">":
        return vals[0] > vals[1]
    if op == ">=":
        return vals[0] >= vals[1]
    if op == "==":
        return vals[0] == vals[1]
    if op == "!=":
        return vals[0] != vals[1]
    if op == "and":
        return vals[0] and vals[1]
    if op == "or":
        return vals[0] or vals[1]
    if op == "=>":
        return (not vals[0]) or vals[1]
    if op == "not":
        return not vals[0]
    if op == "ite":
        return vals[1] if vals[0] else vals[2]
    raise ValueError(f"unknown operator {op!r}")


def sort_of(t: Term) -> Sort:
    if isinstance(t, (Const, Sym)):
        return t.sort
    if t.op in ARITH or t.op == "neg":
        return INT
    if t.op == "ite":
        return sort_of(t.args[1])
    return BOOL


def mk(op: str, *args: Term) -> Term:
    """Build ``op(args)``, folding constants and trivial boolean identities."""
    if all(isinstance(a, Const) for a in args):
        v = _apply(op, [a.value for a in args])
        if isinstance(v, bool):
            return TRUE if v else FALSE
        if isinstance(v, int):
            return Const(v, INT)
        return Const(v, sort_of(args[1]))
    if op == "ite":
        c, a, b = args
        if isinstance(c, Const):
            return a if c.value else b
        if a == b:
            return a
    elif op == "and":
        a, b = args
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE:
            return a
    elif op == "or":
        a, b = args
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE:
            return b
        if b == FALSE:
            return a
    elif op == "not":
        (a,) = args
        if isinstance(a, Op) and a.op == "not":
            return a.args[0]
    elif op in EQUALITY and args[0] == args[1]:
        return TRUE if op == "==" else FALSE
    return Op(op, tuple(args))


def negate(t: Term) -> Term:
    return mk("not", t)


def conj(terms) -> Term:
    out: Term = TRUE
    for t in terms:
        out = mk("and", out, t)
    return out


def symbols(terms) -> list[Sym]:
    """Symbols in first-use order (depth-first, left to right)."""
    seen: dict[str, Sym] = {}

    def walk(t: Term) -> None:
        if isinstance(t, Sym):
            seen.setdefault(t.name, t)
        elif isinstance(t, Op):
            for a in t.args:
                walk(a)

    for t in terms:
        walk(t)
    return list(seen.values())


def address_constants(terms) -> list[str]:
    seen: dict[str, None] = {}

    def walk(t: Term) -> None:
        if isinstance(t, Const) and isinstance(t.sort, AddressSort):
            seen.setdefault(t.value, None)
        elif isinstance(t, Op):
            for a in t.args:
                walk(a)

    for t in terms:
        walk(t)
    return list(seen)


def evaluate(t: Term, model: Mapping[str, Value]) -> Value:
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Sym):
        return model[t.name]
    if t.op in ("and", "or", "=>"):
        a = evaluate(t.args[0], model)
        if t.op == "and" and not a:
            return False
        if t.op == "or" and a:
            return True
        if t.op == "=>" and not a:
            return True
        return bool(evaluate(t.args[1], model))
    if t.op == "ite":
        return evaluate(t.args[1] if evaluate(t.args[0], model) else t.args[2], model)
    return _apply(t.op, [evaluate(a, model) for a in t.args])


def compile_term(t: Term) -> Callable[[Mapping[str, Value]], Value]:
    """Closure-compile a term; roughly an order of magnitude faster than :func:`evaluate`."""
    if isinstance(t, Const):
        v = t.value
        return lambda env: v
    if isinstance(t, Sym):
        name = t.name
        return lambda env: env[name]
    fs = [compile_term(a) for a in t.args]
    op = t.op
    if op == "and":
        a, b = fs
        return lambda env: bool(a(env)) and bool(b(env))
    if op == "or":
        a, b = fs
        return lambda env: bool(a(env)) or bool(b(env))
    if op == "=>":
        a, b = fs
        return lambda env: (not a(env)) or bool(b(env))
    if op == "not":
        (a,) = fs
        return lambda env: not a(env)
    if op == "neg":
        (a,) = fs
        return lambda env: -a(env)
    if op == "ite":
        c, a, b = fs
        return lambda env: a(env) if c(env) else b(env)
    a, b = fs
    simple = {
        "+": lambda env: a(env) + b(env),
        "-": lambda env: a(env) - b(env),
        "*": lambda env: a(env) * b(env),
        "<": lambda env: a(env) < b(env),
        "<=": lambda env: a(env) <= b(env),
        ">": lambda env: a(env) > b(env),
        ">=": lambda env: a(env) >= b(env),
        "==": lambda env: a(env) == b(env),
        "!=": lambda env: a(env) != b(env),
        "div": lambda env: floor_div(a(env), b(env)),
        "mod": lambda env: euclid_mod(a(env), b(env)),
    }
    return simple[op]


def substitute(t: Term, model: Mapping[str, Value]) -> Term:
    """Replace symbols bound in ``model`` by constants and re-fold."""
    if isinstance(t, Const):
        return t
    if isinstance(t, Sym):
        if t.name in model:
            return Const(model[t.name], t.sort)
        return t
    return mk(t.op, *(substitute(a, model) for a in t.args))
