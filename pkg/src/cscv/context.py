"""Verification contexts: a minimal evaluation function plus a relevance ranking of F."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from .analysis import AccessSets, access_sets, dependency_closure, property_vars, shared_variable_count
from .errors import MissingValue, NoExternalFunctions
from .frontend import ast as A
from .frontend.snapshot import BlockSnapshot

if TYPE_CHECKING:
    from .optimization import HeuristicSet


def zero_value(ty: str, actors=()):
    if ty == A.INT:
        return 0
    if ty == A.BOOL:
        return False
    if ty == A.ADDRESS:
        return "0x0"
    return {a: 0 for a in actors}


def literal_value(lit: A.Literal):
    return lit.value


@dataclass(frozen=True)
class EvaluationFunction:
    block: int
    domain: frozenset[str]
    valuation: dict = field(hash=False)


@dataclass(frozen=True)
class RelevanceFunction:
    """``ranking[f]`` orders F minus f; ``initial`` orders all of F for depth 0."""

    ranking: dict[str, tuple[str, ...]] = field(hash=False)
    initial: tuple[str, ...] = ()

    def order_after(self, via: str | None) -> tuple[str, ...]:
        """Transition order from a state reached through ``via``.

        The self-excluded ranking comes first and ``via`` itself is retried last.
        """
        if via is None:
            return self.initial
        return self.ranking[via] + (via,)


@dataclass(frozen=True)
class Context:
    evaluation: EvaluationFunction
    relevance: RelevanceFunction
    heuristics: "HeuristicSet | None"
    property: A.TemporalProperty
    contract_name: str = ""

    def to_json(self) -> dict:
        hs = self.heuristics
        return {
            "contract": self.contract_name,
            "property": self.property.source,
            "block": self.evaluation.block,
            "domain": sorted(self.evaluation.domain),
            "valuation": {k: self.evaluation.valuation[k] for k in sorted(self.evaluation.valuation)},
            "initial_ranking": list(self.relevance.initial),
            "rankings": {f: list(r) for f, r in sorted(self.relevance.ranking.items())},
            "heuristics": [h.id for h in hs.selected] if hs else [],
        }


def build_evaluation_function(
    prop: A.TemporalProperty,
    contract: A.ContractAST,
    snapshot: BlockSnapshot,
    default_zero: bool = False,
) -> EvaluationFunction:
    domain = dependency_closure(property_vars(prop.pred), contract)
    valuation = {}
    for v in contract.state_vars:
        if v.name not in domain:
            continue
        if v.name in snapshot.state:
            value = snapshot.state[v.name]
            valuation[v.name] = dict(value) if isinstance(value, dict) else value
        elif v.type == A.MAP:
            valuation[v.name] = zero_value(A.MAP, snapshot.actors)
        elif v.init is not None:
            valuation[v.name] = literal_value(v.init)
        elif default_zero:
            valuation[v.name] = zero_value(v.type)
        else:
            raise MissingValue(v.name)
    return EvaluationFunction(snapshot.block, domain, valuation)


def _ranked(candidates, score) -> tuple[str, ...]:
    return tuple(sorted(candidates, key=lambda g: (-score(g), g)))


def build_relevance_function(
    contract: A.ContractAST,
    evaluation: EvaluationFunction,
    sets: AccessSets | None = None,
    allow_empty: bool = False,
) -> RelevanceFunction:
    """Rank F for every f (self-excluded) and once more for depth 0.

    ``allow_empty`` lets the verification pipeline proceed on contracts with no
    external functions, whose transition relation is trivially a fixpoint.
    """
    externals = contract.external_names
    if not externals and not allow_empty:
        raise NoExternalFunctions(contract.name)
    sets = sets or access_sets(contract)
    ranking = {
        f: _ranked([g for g in externals if g != f], lambda g, f=f: shared_variable_count(f, g, sets))
        for f in externals
    }
    initial = _ranked(externals, lambda g: len(sets.touched(g) & evaluation.domain))
    return RelevanceFunction(ranking, initial)


def build_context(
    prop: A.TemporalProperty,
    contract: A.ContractAST,
    snapshot: BlockSnapshot,
    heuristics=None,
    default_zero: bool = False,
    allow_empty: bool = False,
) -> Context:
    evaluation = build_evaluation_function(prop, contract, snapshot, default_zero)
    relevance = build_relevance_function(contract, evaluation, allow_empty=allow_empty)
    return Context(evaluation, relevance, heuristics, prop, contract.name)


def with_relevance(ctx: Context, relevance: RelevanceFunction) -> Context:
    return replace(ctx, relevance=relevance)

