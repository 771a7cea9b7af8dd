"""Global states, invocations, budgets and verdicts of the transition system."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..context import Context, zero_value
from ..frontend import ast as A
from ..frontend.snapshot import BlockSnapshot


@dataclass(frozen=True)
class GlobalState:
    """Concrete contract valuation plus the native-balance ledger.

    ``order``, ``actors`` and ``attacker`` describe the run the state belongs
    to; they take no part in equality or hashing.
    """

    valuation: dict = field(hash=False)
    actor_balances: dict = field(hash=False)
    depth: int = 0
    order: tuple[str, ...] = field(default=(), compare=False, repr=False)
    actors: tuple[str, ...] = field(default=(), compare=False, repr=False)
    attacker: str = field(default="", compare=False, repr=False)

    def with_values(self, valuation: dict, balances: dict, depth: int) -> "GlobalState":
        return GlobalState(valuation, balances, depth, self.order, self.actors, self.attacker)

    def to_json(self) -> dict:
        names = list(self.order) + sorted(set(self.valuation) - set(self.order))
        return {n: _plain(self.valuation[n]) for n in names if n in self.valuation}


def _plain(v):
    if isinstance(v, dict):
        return {k: v[k] for k in sorted(v)}
    return v


def canonical_serialization(state: GlobalState) -> bytes:
    names = [n for n in state.order if n in state.valuation]
    names += sorted(set(state.valuation) - set(names))
    payload = [[n, _plain(state.valuation[n])] for n in names]
    balances = _plain(state.actor_balances)
    return json.dumps([payload, balances], separators=(",", ":"), sort_keys=False).encode()


def canonical_hash(state: GlobalState) -> str:
    """sha256 of the canonical serialization; traces and depth are not hashed."""
    return hashlib.sha256(canonical_serialization(state)).hexdigest()


@dataclass(frozen=True)
class Invocation:
    function: str
    sender: str
    value: int = 0
    args: tuple = ()
    reentry: tuple["Invocation", ...] = ()

    def to_json(self) -> dict:
        return {
            "fn": self.function,
            "sender": self.sender,
            "value": self.value,
            "args": list(self.args),
            "reentry": [r.to_json() for r in self.reentry],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Invocation":
        return cls(
            d["fn"],
            d["sender"],
            d.get("value", 0),
            tuple(d.get("args", ())),
            tuple(cls.from_json(r) for r in d.get("reentry", ())),
        )

    def __str__(self) -> str:
        args = ", ".join(str(a) for a in self.args)
        extra = f" value={self.value}" if self.value else ""
        inner = f" reentry=[{'; '.join(map(str, self.reentry))}]" if self.reentry else ""
        return f"{self.function}({args}) by {self.sender}{extra}{inner}"


@dataclass(frozen=True)
class AttackVector:
    """States s0..sn interleaved with invocations i1..in."""

    states: tuple[GlobalState, ...]
    invocations: tuple[Invocation, ...]
    violating_index: int

    def __post_init__(self):
        if len(self.states) != len(self.invocations) + 1:
            raise ValueError("an attack vector needs exactly one more state than invocations")

    def __len__(self) -> int:
        return len(self.invocations)

    def items(self):
        yield self.states[0]
        for inv, s in zip(self.invocations, self.states[1:]):
            yield inv
            yield s

    def to_json(self) -> list[dict]:
        out = []
        for x in self.items():
            if isinstance(x, Invocation):
                out.append({"call": x.to_json()})
            else:
                out.append({"state": x.to_json()})
        return out


@dataclass(frozen=True)
class Budget:
    diameter: int = 4
    time_limit: float = 60.0
    branch_flips: int = 8
    reentry_depth: int = 1


@dataclass(frozen=True)
class Stats:
    transitions: int = 0
    states: int = 0
    solver_calls: int = 0
    elapsed: float = 0.0

    def to_json(self) -> dict:
        return {
            "transitions": self.transitions,
            "states": self.states,
            "solver_calls": self.solver_calls,
            "elapsed_ms": int(round(self.elapsed * 1000)),
        }


REASONS = ("time-exhausted", "diameter-exhausted", "solver-unknown")


@dataclass(frozen=True)
class Verdict:
    """``kind`` is violated, verified or unknown; ``reason`` is set only for unknown."""

    kind: str
    stats: Stats
    vector: AttackVector | None = None
    reason: str | None = None

    @property
    def violated(self) -> bool:
        return self.kind == "violated"

    @property
    def verified(self) -> bool:
        return self.kind == "verified"

    def __str__(self) -> str:
        if self.kind == "unknown":
            return f"unknown ({self.reason})"
        return self.kind


def Violated(vector: AttackVector, stats: Stats) -> Verdict:
    return Verdict("violated", stats, vector)


def Verified(stats: Stats) -> Verdict:
    return Verdict("verified", stats)


def Unknown(reason: str, stats: Stats) -> Verdict:
    if reason not in REASONS:
        raise ValueError(f"unknown reason {reason!r}")
    return Verdict("unknown", stats, reason=reason)


def initial_state(context: Context, contract: A.ContractAST, snapshot: BlockSnapshot) -> GlobalState:
    """s0: the evaluation function, then initializers, then zeros outside its domain."""
    valuation = {}
    ev = context.evaluation.valuation
    for v in contract.state_vars:
        if v.name in ev:
            value = ev[v.name]
            valuation[v.name] = dict(value) if isinstance(value, dict) else value
        elif v.type == A.MAP:
            valuation[v.name] = zero_value(A.MAP, snapshot.actors)
        elif v.init is not None:
            valuation[v.name] = v.init.value
        else:
            valuation[v.name] = zero_value(v.type)
    balances = {a: snapshot.native.get(a, 0) for a in snapshot.actors}
    for a, b in snapshot.native.items():
        balances.setdefault(a, b)
    return GlobalState(
        valuation,
        balances,
        0,
        tuple(contract.var_names),
        tuple(snapshot.actors),
        snapshot.attacker,
    )
