"""Concolic verification engine."""

from .interpreter import OUTCOMES, Constraint, Machine, SymbolicTrace, evaluate_view, property_holds
from .report import report_json
from .search import Explorer, explore, generate_inputs, replay, step_concolic
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

__all__ = [
    "OUTCOMES",
    "AttackVector",
    "Budget",
    "Constraint",
    "Explorer",
    "GlobalState",
    "Invocation",
    "Machine",
    "Stats",
    "SymbolicTrace",
    "Unknown",
    "Verdict",
    "Verified",
    "Violated",
    "canonical_hash",
    "canonical_serialization",
    "evaluate_view",
    "explore",
    "generate_inputs",
    "initial_state",
    "property_holds",
    "replay",
    "report_json",
    "step_concolic",
]
