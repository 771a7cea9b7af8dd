"""Block snapshots: the concrete state a verification run starts from."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import AttackerNotInActors, MalformedAddress, TypeMismatch, UnknownVariable
from . import ast as A
from .lexer import ADDRESS_RE


@dataclass(frozen=True)
class BlockSnapshot:
    """Typed valuation at a block.

    ``state`` holds only the scalars the snapshot mentions; every map variable
    is present and materialized over ``actors`` (unmentioned keys are 0).
    ``native`` is the optional native-balance ledger (absent actors hold 0).
    """

    block: int
    state: dict = field(hash=False)
    actors: tuple[str, ...]
    attacker: str
    native: dict = field(default_factory=dict, hash=False)


def check_address(value) -> str:
    if not isinstance(value, str) or not ADDRESS_RE.fullmatch(value):
        raise MalformedAddress(value)
    return value


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _decode(name: str, ty: str, raw, actors: tuple[str, ...]):
    if ty == A.INT:
        if not _is_int(raw):
            raise TypeMismatch(name, f"expected int, got {raw!r}")
        return raw
    if ty == A.BOOL:
        if not isinstance(raw, bool):
            raise TypeMismatch(name, f"expected bool, got {raw!r}")
        return raw
    if ty == A.ADDRESS:
        if not isinstance(raw, str):
            raise TypeMismatch(name, f"expected address, got {raw!r}")
        return check_address(raw)
    if not isinstance(raw, dict):
        raise TypeMismatch(name, f"expected a map of address to int, got {raw!r}")
    out = {a: 0 for a in actors}
    for k, v in raw.items():
        check_address(k)
        if not _is_int(v):
            raise TypeMismatch(f"{name}[{k}]", f"expected int, got {v!r}")
        out[k] = v
    return out


def parse_snapshot(source: str | bytes, contract: A.ContractAST) -> BlockSnapshot:
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise TypeMismatch("<snapshot>", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise TypeMismatch("<snapshot>", "top level must be an object")
    block = data.get("block", 0)
    if not _is_int(block) or block < 0:
        raise TypeMismatch("block", f"expected a non-negative integer, got {block!r}")
    raw_actors = data.get("actors")
    if not isinstance(raw_actors, list) or not raw_actors:
        raise TypeMismatch("actors", "expected a non-empty list of addresses")
    actors = tuple(dict.fromkeys(check_address(a) for a in raw_actors))
    attacker = check_address(data.get("attacker"))
    if attacker not in actors:
        raise AttackerNotInActors(attacker)
    raw_state = data.get("state", {})
    if not isinstance(raw_state, dict):
        raise TypeMismatch("state", "expected an object")
    decls = {v.name: v for v in contract.state_vars}
    state: dict = {}
    for name, raw in raw_state.items():
        if name not in decls:
            raise UnknownVariable(name)
        state[name] = _decode(name, decls[name].type, raw, actors)
    for v in contract.state_vars:
        if v.type == A.MAP and v.name not in state:
            state[v.name] = {a: 0 for a in actors}
    native = _decode("balances", A.MAP, data.get("balances", {}), actors)
    return BlockSnapshot(block, state, actors, attacker, native)


def snapshot_to_json(s: BlockSnapshot) -> dict:
    out = {"block": s.block, "state": s.state, "actors": list(s.actors), "attacker": s.attacker}
    if any(s.native.values()):
        out["balances"] = s.native
    return out
