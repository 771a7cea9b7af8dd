"""End-to-end verification: frontend, context, optimizations, exploration."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .context import Context, build_context
from .engine import Budget, Explorer, Verdict
from .frontend import ContractAST, TemporalProperty, parse_contract, parse_property, parse_snapshot
from .frontend.snapshot import BlockSnapshot
from .optimization import HeuristicSet, InstrumentedContract, apply_heuristics, constantize, spatialize
from .solver import SolverHandle, make_handle


@dataclass(frozen=True)
class Problem:
    contract: ContractAST
    prop: TemporalProperty
    snapshot: BlockSnapshot


@dataclass(frozen=True)
class Prepared:
    context: Context
    instrumented: InstrumentedContract
    snapshot: BlockSnapshot


def load_problem(contract: str | Path, prop: str | Path, snapshot: str | Path) -> Problem:
    c = parse_contract(Path(contract).read_text())
    return Problem(c, parse_property(Path(prop).read_text(), c), parse_snapshot(Path(snapshot).read_text(), c))


def prepare(
    problem: Problem,
    heuristics: HeuristicSet | None = None,
    default_zero: bool = False,
    constantization: bool = True,
) -> Prepared:
    ctx = build_context(problem.prop, problem.contract, problem.snapshot, default_zero=default_zero, allow_empty=True)
    if heuristics is not None:
        ctx = apply_heuristics(ctx, heuristics)
    contract = problem.contract
    if constantization:
        contract = constantize(contract, ctx, default_zero)
    return Prepared(ctx, spatialize(problem.prop, contract), problem.snapshot)


def verify(
    problem: Problem,
    budget: Budget | None = None,
    solver: SolverHandle | None = None,
    heuristics: HeuristicSet | None = None,
    default_zero: bool = False,
    constantization: bool = True,
    on_trace=None,
) -> Verdict:
    p = prepare(problem, heuristics, default_zero, constantization)
    solver = solver or make_handle()
    return Explorer(p.context, p.instrumented, p.snapshot, budget, solver, on_trace).explore()
