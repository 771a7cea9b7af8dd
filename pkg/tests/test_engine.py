import json
from dataclasses import replace

import pytest

from conftest import VAULT_SNAPSHOT
from cscv.engine import (
    AttackVector,
    Budget,
    Explorer,
    GlobalState,
    Invocation,
    canonical_hash,
    explore,
    generate_inputs,
    initial_state,
    replay,
    report_json,
    step_concolic,
)
from cscv.engine.interpreter import OK, REQUIRE_FAILED, TRAP, VIOLATED
from cscv.errors import ReplayDivergence
from cscv.frontend import parse_contract, parse_property, parse_snapshot
from cscv.pipeline import Problem, prepare
from cscv.solver import AddressSort, Sat, Sym, addr, evaluate, make_handle, mk, negate, solve

A_, B_ = "0xA", "0xB"


@pytest.fixture(scope="module")
def vault_prep(vault, vault_prop, vault_snapshot):
    return prepare(Problem(vault, vault_prop, vault_snapshot))


@pytest.fixture(scope="module")
def s0(vault_prep, vault):
    return initial_state(vault_prep.context, vault, vault_prep.snapshot)


def _w(amount, reentry=()):
    return Invocation("withdraw", A_, 0, (amount,), tuple(reentry))


def _prep(src, prop, state="{}", actors='["0xA","0xB"]'):
    c = parse_contract(src)
    snap = parse_snapshot('{"block":0,"state":%s,"actors":%s,"attacker":"0xA"}' % (state, actors), c)
    return prepare(Problem(c, parse_property(prop, c), snap))


def test_initial_state_examples(s0):
    assert s0.valuation == {"balances": {A_: 5, B_: 0}, "total": 5}
    assert s0.depth == 0
    assert s0.actor_balances == {A_: 0, B_: 0}
    p = _prep("contract I { state a: int = 4; state ok: bool = true; external fn f() { a = a + 1; } }",
              "always a >= 0")
    s = initial_state(p.context, p.instrumented.base, p.snapshot)
    assert s.valuation == {"a": 4, "ok": True}
    p = _prep("contract E { }", "always true")
    assert initial_state(p.context, p.instrumented.base, p.snapshot).valuation == {}


def test_step_reentrant_withdraw(vault_prep, s0):
    post, trace, outcome = step_concolic(s0, _w(5, [_w(5)]), vault_prep.instrumented)
    assert post.valuation["total"] == -5
    assert outcome == VIOLATED
    assert trace.consistent()


def test_step_require_failures_roll_back(vault_prep, s0):
    post, trace, outcome = step_concolic(s0, _w(9), vault_prep.instrumented)
    assert outcome == REQUIRE_FAILED
    assert post == s0
    for state in (s0, replace(s0, valuation={"balances": {A_: 2, B_: 7}, "total": 9})):
        post, _, outcome = step_concolic(state, Invocation("deposit", A_, 0, (0,)), vault_prep.instrumented)
        assert outcome == REQUIRE_FAILED and post == state


def test_step_plain_withdraw_ok(vault_prep, s0):
    post, trace, outcome = step_concolic(s0, _w(5), vault_prep.instrumented)
    assert outcome == OK
    assert post.valuation == {"balances": {A_: 0, B_: 0}, "total": 0}
    assert post.actor_balances[A_] == 5
    assert post.depth == 1
    assert trace.attacker_calls == 1


def test_step_rejects_deep_reentry(vault_prep, s0):
    with pytest.raises(ValueError):
        step_concolic(s0, _w(1, [_w(1, [_w(1)])]), vault_prep.instrumented, Budget(reentry_depth=1))


def test_traps_roll_back():
    p = _prep("contract D { state q: int; external fn f(d: int) { q = 10 / d; } }", "always q >= 0", '{"q":1}')
    s = initial_state(p.context, p.instrumented.base, p.snapshot)
    post, _, outcome = step_concolic(s, Invocation("f", A_, 0, (0,)), p.instrumented)
    assert outcome == TRAP and post == s
    post, _, outcome = step_concolic(s, Invocation("f", A_, -1, (2,)), p.instrumented)
    assert outcome == TRAP and post == s


def test_generate_inputs_examples(vault_prep, s0):
    budget, solver = Budget(), make_handle("builtin")
    cands = generate_inputs(s0, "withdraw", vault_prep.context, [], budget, solver,
                            vault_prep.instrumented, vault_prep.snapshot)
    seeds = {c.args[0] for c in cands}
    assert {0, 1, 5} <= seeds
    assert all(c.sender == A_ for c in cands)

    # flip the balance guard of withdraw(1)
    _, trace, _ = step_concolic(s0, _w(1), vault_prep.instrumented)
    guard = next(c for c in trace.constraints if c.flippable)
    assert guard.site.startswith("require")
    assert guard.flippable and evaluate(guard.term, trace.inputs()) is True
    # with the sender held at the attacker the negated guard forces amount > 5
    sender = Sym("msg.sender", AddressSort((A_, B_)))
    flipped = solve([negate(guard.term), mk("==", sender, addr(A_, (A_, B_)))], make_handle("builtin"))
    assert isinstance(flipped, Sat) and flipped.model["arg.amount"] > 5
    cands = generate_inputs(s0, "withdraw", vault_prep.context, [(_w(1), trace)], budget, solver,
                            vault_prep.instrumented, vault_prep.snapshot)
    flips = [c for c in cands if c.args[0] > s0.valuation["balances"][c.sender]]
    assert flips
    for c in flips:
        env = {"arg.amount": c.args[0], "msg.sender": c.sender, "msg.value": c.value}
        assert evaluate(guard.term, env) is False


def test_generate_inputs_without_parameters():
    p = _prep(
        "contract W { state n: int; external fn tick() { n = n + 1; } }", "always n >= 0", '{"n":0}')
    s = initial_state(p.context, p.instrumented.base, p.snapshot)
    cands = generate_inputs(s, "tick", p.context, [], Budget(), make_handle("builtin"), p.instrumented, p.snapshot)
    assert cands == [Invocation("tick", A_, 0, ())]


def test_explore_vault(vault_prep):
    v = explore(vault_prep.context, vault_prep.instrumented, vault_prep.snapshot,
                Budget(diameter=3, reentry_depth=1), make_handle("builtin"))
    assert v.kind == "violated"
    vec = v.vector
    assert len(vec) == 1 and vec.violating_index == 1
    (inv,) = vec.invocations
    assert inv.function == "withdraw" and inv.sender == A_
    assert len(inv.reentry) == 1 and inv.reentry[0].function == "withdraw"
    assert vec.states[1].valuation["total"] < 0
    assert replay(vec, vault_prep.instrumented, vault_prep.snapshot, vault_prep.context)


def test_explore_vault_patched(vault_patched, vault_prop, vault_snapshot):
    prop = parse_property(vault_prop.source, vault_patched)
    p = prepare(Problem(vault_patched, prop, parse_snapshot(VAULT_SNAPSHOT, vault_patched)))
    v = explore(p.context, p.instrumented, p.snapshot, Budget(diameter=3), make_handle("builtin"))
    assert (v.kind, v.reason) == ("unknown", "diameter-exhausted")
    assert v.vector is None


def test_explore_without_external_functions():
    p = _prep("contract V { state a: int; view fn get() -> int { return a; } }", "always a >= 0", '{"a":1}')
    v = explore(p.context, p.instrumented, p.snapshot, Budget(), make_handle("builtin"))
    assert v.kind == "verified"
    assert v.stats.transitions == 0


def test_explore_violated_at_s0():
    p = _prep("contract Z { state a: int; external fn f() { a = 1; } }", "always a >= 0", '{"a":-1}')
    v = explore(p.context, p.instrumented, p.snapshot, Budget(), make_handle("builtin"))
    assert v.kind == "violated"
    assert v.vector.violating_index == 0 and len(v.vector) == 0


def test_explore_reaches_fixpoint():
    p = _prep("contract T { state on: bool; external fn flip() { on = !on; } }",
              "always on || !on", '{"on":false}')
    v = explore(p.context, p.instrumented, p.snapshot, Budget(diameter=4), make_handle("builtin"))
    assert v.kind == "verified"
    assert v.stats.states == 2


def test_time_exhaustion(vault_prep):
    ticks = iter(range(0, 10**6))
    ex = Explorer(vault_prep.context, vault_prep.instrumented, vault_prep.snapshot,
                  Budget(diameter=50, time_limit=3.0), make_handle("builtin"), clock=lambda: next(ticks))
    v = ex.explore()
    assert (v.kind, v.reason) == ("unknown", "time-exhausted")


def test_canonical_hash_examples(s0):
    a = GlobalState({"total": 5, "balances": {A_: 5, B_: 0}}, {A_: 0, B_: 0}, 0, ("balances", "total"))
    b = GlobalState({"balances": {B_: 0, A_: 5}, "total": 5}, {B_: 0, A_: 0}, 3, ("balances", "total"))
    assert canonical_hash(a) == canonical_hash(b)
    c = GlobalState({"total": 5, "balances": {A_: 5, B_: 1}}, {A_: 0, B_: 0}, 0, ("balances", "total"))
    assert canonical_hash(a) != canonical_hash(c)
    d = GlobalState({"total": 5, "balances": {A_: 5, B_: 0}}, {A_: 1, B_: 0}, 0, ("balances", "total"))
    assert canonical_hash(a) != canonical_hash(d)
    assert canonical_hash(a) == canonical_hash(s0)


def test_replay_examples(vault_prep, s0):
    v = explore(vault_prep.context, vault_prep.instrumented, vault_prep.snapshot,
                Budget(diameter=3), make_handle("builtin"))
    vec = v.vector
    args = (vault_prep.instrumented, vault_prep.snapshot, vault_prep.context)
    assert replay(vec, *args)
    assert not replay(replace(vec, violating_index=vec.violating_index - 1), *args)
    spliced = AttackVector((s0, s0) + vec.states[1:], (_w(9),) + vec.invocations, vec.violating_index + 1)
    with pytest.raises(ReplayDivergence) as info:
        replay(spliced, *args)
    assert info.value.step == 1
    # replay reconstructs every recorded state exactly
    post, _, _ = step_concolic(s0, vec.invocations[0], vault_prep.instrumented)
    assert canonical_hash(post) == canonical_hash(vec.states[1])


def test_report_layout(vault_prep):
    v = explore(vault_prep.context, vault_prep.instrumented, vault_prep.snapshot, Budget(), make_handle("builtin"))
    r = report_json(v, "always total >= 0")
    assert list(r) == ["verdict", "reason", "property", "vector", "violating_index", "stats"]
    assert r["verdict"] == "violated" and r["reason"] is None
    assert list(r["vector"][0]) == ["state"] and list(r["vector"][1]) == ["call"]
    assert list(r["vector"][1]["call"]) == ["fn", "sender", "value", "args", "reentry"]
    assert list(r["stats"]) == ["transitions", "states", "solver_calls", "elapsed_ms"]
    json.dumps(r)


def test_determinism(problems):
    for key in ("lend-spot", "rewards-patched", "flash-pool"):
        p = prepare(problems[key])
        runs = [
            report_json(explore(p.context, p.instrumented, p.snapshot, Budget(), make_handle("builtin")),
                        p.context.property.source, timing=False)
            for _ in range(2)
        ]
        assert json.dumps(runs[0]) == json.dumps(runs[1])


def test_traces_are_consistent(problems):
    for key in ("vault", "lend-spot", "wallet-patched", "flash-pool-patched"):
        p = prepare(problems[key])
        bad = []
        explore(p.context, p.instrumented, p.snapshot, Budget(diameter=2), make_handle("builtin"),
                lambda s, inv, tr: None if tr.consistent() else bad.append(inv))
        assert not bad, (key, bad[:3])
