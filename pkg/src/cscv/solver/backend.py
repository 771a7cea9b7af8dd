"""Solver handles: the external SMT-LIB2 process and the built-in bounded fallback."""

from __future__ import annotations

import logging
import os
import shlex
import shutil
import subprocess
from dataclasses import dataclass, field

from ..errors import BackendUnavailable, DomainTooLarge
from .bounded import DEFAULT_CAP, Sat, SolverResult, Unknown, Unsat, solve_bounded
from .smtlib import address_table, emit_smtlib, parse_model, parse_sexprs
from .terms import BOOL, INT, AddressSort, Term, evaluate, symbols

log = logging.getLogger(__name__)

ENV_VAR = "CSCV_SOLVER"
DEFAULT_TIMEOUT = 5.0
DEFAULT_RANGE = (0, 64)


@dataclass
class SolverHandle:
    """Per-engine solver configuration plus a call counter.

    ``command`` is None for the built-in solver.
    """

    command: list[str] | None = None
    timeout: float = DEFAULT_TIMEOUT
    builtin_range: tuple[int, int] = DEFAULT_RANGE
    cap: int = DEFAULT_CAP
    calls: int = 0
    unknowns: int = 0
    fallback_used: bool = field(default=False)

    @property
    def external(self) -> bool:
        return self.command is not None

    def fall_back(self) -> None:
        log.warning("solver backend %s unavailable; using built-in bounded solver", self.command)
        self.command = None
        self.fallback_used = True


def make_handle(
    solver: str = "auto",
    solver_cmd: str | None = None,
    timeout: float = DEFAULT_TIMEOUT,
    builtin_range: tuple[int, int] = DEFAULT_RANGE,
) -> SolverHandle:
    """Resolve CLI/env configuration into a handle.

    ``auto`` picks the external backend only when one is configured through
    ``solver_cmd`` or ``$CSCV_SOLVER``; ``builtin`` always uses enumeration;
    ``external`` additionally falls back to a ``z3`` found on PATH.
    """
    cmd = solver_cmd or os.environ.get(ENV_VAR)
    if solver == "builtin":
        cmd = None
    elif solver == "external" and not cmd:
        z3 = shutil.which("z3")
        cmd = f"{z3} -in" if z3 else None
        if cmd is None:
            raise BackendUnavailable("no external solver configured and no z3 on PATH")
    elif solver not in ("auto", "external"):
        raise ValueError(f"unknown solver mode {solver!r}")
    return SolverHandle(
        command=shlex.split(cmd) if cmd else None,
        timeout=timeout,
        builtin_range=builtin_range,
    )


def _bounds_for(terms: list[Term], rng: tuple[int, int]) -> dict[str, tuple[int, int]]:
    return {s.name: rng for s in symbols(terms) if s.sort == INT}


def _complete(model: dict, terms: list[Term]) -> dict:
    """Map external model values back to cscv values; fill symbols the backend omitted."""
    table = address_table(terms)
    out = {}
    for s in symbols(terms):
        raw = model.get(s.name)
        if isinstance(s.sort, AddressSort):
            idx = raw if isinstance(raw, int) and 0 <= raw < len(table) else None
            out[s.name] = table[idx] if idx is not None else s.sort.domain[0]
        elif s.sort == BOOL:
            out[s.name] = bool(raw) if raw is not None else False
        else:
            out[s.name] = raw if isinstance(raw, int) and not isinstance(raw, bool) else 0
    return out


def _check(model: dict, terms: list[Term]) -> bool:
    return all(evaluate(t, model) for t in terms)


def _run(handle: SolverHandle, script: str, timeout: float) -> str:
    try:
        proc = subprocess.run(
            handle.command,
            input=script,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except FileNotFoundError as exc:
        raise BackendUnavailable(str(exc)) from exc
    except PermissionError as exc:
        raise BackendUnavailable(str(exc)) from exc
    return proc.stdout


def _interpret(answer: str, model_sx, terms: list[Term]) -> SolverResult:
    if answer == "unsat":
        return Unsat()
    if answer != "sat":
        return Unknown(answer or "no answer")
    try:
        model = _complete(parse_model(model_sx) if isinstance(model_sx, list) else {}, terms)
    except ValueError as exc:
        return Unknown(f"unreadable model: {exc}")
    if not _check(model, terms):
        return Unknown("backend model does not satisfy the query")
    return Sat(model)


def _solve_external(terms: list[Term], handle: SolverHandle) -> SolverResult:
    script = emit_smtlib(terms)
    try:
        out = _run(handle, script, handle.timeout)
    except subprocess.TimeoutExpired:
        return Unknown("timeout")
    try:
        parts = parse_sexprs(out)
    except ValueError as exc:
        return Unknown(str(exc))
    if not parts:
        return Unknown("empty response")
    return _interpret(parts[0], parts[1] if len(parts) > 1 else None, terms)


def _solve_builtin(terms: list[Term], handle: SolverHandle) -> SolverResult:
    try:
        return solve_bounded(terms, _bounds_for(terms, handle.builtin_range), handle.cap)
    except DomainTooLarge as exc:
        return Unknown(str(exc))


def solve(terms: list[Term], handle: SolverHandle) -> SolverResult:
    """Decide the conjunction of ``terms``.

    Raises :class:`BackendUnavailable` if the external process cannot start;
    callers switch the handle to the built-in solver via ``handle.fall_back()``.
    """
    handle.calls += 1
    result = _solve_external(terms, handle) if handle.external else _solve_builtin(terms, handle)
    if isinstance(result, Unknown):
        handle.unknowns += 1
    return result


def solve_or_fallback(terms: list[Term], handle: SolverHandle) -> SolverResult:
    try:
        return solve(terms, handle)
    except BackendUnavailable:
        handle.fall_back()
        return solve(terms, handle)


def solve_many(queries: list[list[Term]], handle: SolverHandle) -> list[SolverResult]:
    """Answer several independent queries with one backend process.

    The scripts are concatenated with ``(reset)`` between them, which keeps each
    query self-contained while paying the process start-up cost once.
    """
    if not handle.external:
        return [solve(q, handle) for q in queries]
    if not queries:
        return []
    handle.calls += len(queries)
    script = "(reset)\n".join(emit_smtlib(q) for q in queries)
    try:
        out = _run(handle, script, handle.timeout * len(queries))
    except subprocess.TimeoutExpired:
        handle.unknowns += len(queries)
        return [Unknown("timeout") for _ in queries]
    parts = parse_sexprs(out)
    results: list[SolverResult] = []
    i = 0
    for q in queries:
        answer = parts[i] if i < len(parts) else ""
        model_sx = parts[i + 1] if i + 1 < len(parts) else None
        i += 2
        result = _interpret(answer if isinstance(answer, str) else "", model_sx, q)
        if isinstance(result, Unknown):
            handle.unknowns += 1
        results.append(result)
    return results
