"""Exhaustive finite-domain solving.

Used as the dependency-free default backend and as the test oracle for the
external SMT backend. Symbols are enumerated in lexicographic name order and
each symbol's values in ascending order (addresses in actor order), so the
first model found is fully determined by the query.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..errors import DomainTooLarge
from .terms import BOOL, AddressSort, Term, Value, compile_term, symbols

DEFAULT_CAP = 10**6


@dataclass(frozen=True)
class Sat:
    model: dict[str, Value] = field(hash=False)


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Unknown:
    detail: str = ""


SolverResult = Sat | Unsat | Unknown


def _domain(sym, bounds: Mapping[str, tuple[int, int]]) -> list:
    if sym.name in bounds:
        lo, hi = bounds[sym.name]
        return list(range(lo, hi + 1))
    if sym.sort == BOOL:
        return [False, True]
    if isinstance(sym.sort, AddressSort):
        return list(sym.sort.domain)
    raise KeyError(f"symbol {sym.name!r} has no bound")


def solve_bounded(
    terms: list[Term],
    bounds: Mapping[str, tuple[int, int]],
    cap: int = DEFAULT_CAP,
) -> SolverResult:
    syms = sorted(symbols(terms), key=lambda s: s.name)
    domains = [_domain(s, bounds) for s in syms]
    size = 1
    for d in domains:
        size *= len(d)
    if size > cap:
        raise DomainTooLarge(size, cap)

    index = {s.name: i for i, s in enumerate(syms)}
    # A term is checked as soon as the last symbol it mentions is assigned.
    checks: list[list] = [[] for _ in range(len(syms) + 1)]
    for t in terms:
        used = symbols([t])
        level = max((index[s.name] + 1 for s in used), default=0)
        checks[level].append(compile_term(t))

    env: dict[str, Value] = {}
    if not all(f(env) for f in checks[0]):
        return Unsat()
    if not syms:
        return Sat({})

    n = len(syms)
    names = [s.name for s in syms]
    pos = [0] * n
    k = 0
    while k >= 0:
        if pos[k] >= len(domains[k]):
            pos[k] = 0
            k -= 1
            if k >= 0:
                pos[k] += 1
            continue
        env[names[k]] = domains[k][pos[k]]
        if all(f(env) for f in checks[k + 1]):
            if k == n - 1:
                return Sat(dict(env))
            k += 1
        else:
            pos[k] += 1
    return Unsat()
