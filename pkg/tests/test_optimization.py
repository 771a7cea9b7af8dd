import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corpus_source
from cscv.context import build_context
from cscv.corpus import HEURISTICS
from cscv.errors import MissingValue, UnsupportedForm
from cscv.frontend import ast as A
from cscv.frontend import parse_contract, parse_property, parse_snapshot
from cscv.optimization import (
    CLASSES,
    SWEEP_GRID,
    Heuristic,
    HeuristicSet,
    apply_heuristics,
    constantize,
    load_heuristic_base,
    select_heuristics,
    spatialize,
)

FEE_SRC = """
contract Fees {
    state feeRate: int;
    state paid: int;
    view fn fee() -> int { return feeRate; }
    external fn pay(x: int) {
        require(x > fee());
        paid = paid + x - fee();
    }
}
"""
FEE_SNAP = '{"block":0,"state":{"feeRate":3,"paid":0},"actors":["0xA"],"attacker":"0xA"}'


def _boost(fn, delta=1, hid="b"):
    return Heuristic(hid, "RE", "priority-boost", {"function": fn}, {"delta": delta})


def _calls(contract):
    return [x.name for f in contract.functions for s in A.walk_stmts(f.body)
            for e in A.stmt_exprs(s) for x in A.walk_expr(e) if isinstance(x, A.Call)]


def test_spatialize_vault(vault, vault_prop):
    ic = spatialize(vault_prop, vault)
    assert ic.pre_capture == ()
    assert ic.postcondition == vault_prop.pred
    assert ic.functions == ("deposit", "withdraw")
    assert ic.check_for("deposit") == ic.check_for("withdraw")


def test_spatialize_amm_step_property():
    c = parse_contract(corpus_source("amm.mcl"))
    p = parse_property("always reserveX * reserveY >= old(reserveX) * old(reserveY)", c)
    ic = spatialize(p, c)
    assert ic.pre_capture == (A.Name("reserveX"), A.Name("reserveY"))
    assert not any(isinstance(x, A.Old) for x in A.walk_expr(ic.postcondition))
    slots = sorted(x.slot for x in A.walk_expr(ic.postcondition) if isinstance(x, A.Captured))
    assert slots == [0, 1]


def test_spatialize_rejects_other_forms(vault):
    with pytest.raises(UnsupportedForm):
        spatialize(A.TemporalProperty("eventually", A.Binary("==", A.Name("total"), A.IntLit(0)),
                                      "eventually total == 0"), vault)


def test_constantize_fee():
    c = parse_contract(FEE_SRC)
    p = parse_property("always paid >= 0", c)
    snap = parse_snapshot(FEE_SNAP, c)
    out = constantize(c, build_context(p, c, snap))
    assert "fee" not in _calls(out)
    pay = out.function("pay")
    assert pay.body[0].cond.right == A.IntLit(3)


def test_constantize_leaves_written_reads_alone(vault, vault_prop, vault_snapshot):
    c = parse_contract(corpus_source("vault.mcl").replace(
        "total = total + amount;", "total = getTotal() + amount;"))
    out = constantize(c, build_context(vault_prop, c, vault_snapshot))
    assert out == c
    assert "getTotal" in _calls(out)


def test_constantize_identity_without_calls(vault, vault_prop, vault_snapshot):
    assert constantize(vault, build_context(vault_prop, vault, vault_snapshot)) is vault


def test_constantize_missing_value():
    # feeRate lies outside the property's closure, so only constantization needs it
    c = parse_contract(FEE_SRC.replace("state paid: int;", "state paid: int; state n: int;")
                       .replace("view fn", "external fn bump() { n = n + 1; }\n    view fn"))
    p = parse_property("always n >= 0", c)
    snap = parse_snapshot('{"block":0,"state":{"n":0},"actors":["0xA"],"attacker":"0xA"}', c)
    ctx = build_context(p, c, snap)
    with pytest.raises(MissingValue):
        constantize(c, ctx)
    out = constantize(c, ctx, default_zero=True)
    assert out.function("pay").body[0].cond.right == A.IntLit(0)


def test_select_examples():
    base = [_boost("f", hid=f"h{i}") for i in range(8)]
    a = select_heuristics(base, 0.75, 42)
    b = select_heuristics(base, Fraction(3, 4), 42)
    assert len(a.selected) == 6
    assert a == b
    assert select_heuristics(base, 0, 42).selected == ()
    assert SWEEP_GRID == (0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
    with pytest.raises(ValueError):
        select_heuristics(base, 1.5, 0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 30), st.fractions(0, 1, max_denominator=20), st.integers(0, 2**32))
def test_select_size_and_determinism(n, p, seed):
    base = [_boost("f", hid=f"h{i}") for i in range(n)]
    hs = select_heuristics(base, p, seed)
    assert len(hs.selected) == (p.numerator * n) // p.denominator
    assert len({h.id for h in hs.selected}) == len(hs.selected)
    assert hs == select_heuristics(base, p, seed)
    assert (hs.base_size, hs.proportion, hs.rng_seed) == (n, p, seed)


def test_shipped_base_covers_every_class():
    base = load_heuristic_base(HEURISTICS)
    for cls in CLASSES:
        assert sum(h.cls == cls for h in base) >= 2, cls
    raw = json.loads(HEURISTICS.read_text())
    assert [Heuristic.from_json(r).to_json() for r in raw] == raw


@pytest.mark.parametrize(
    "record",
    [
        {"id": "x", "class": "ZZ", "kind": "arg-seed", "match": {"function": "f"}, "payload": {"values": [1]}},
        {"id": "x", "class": "RE", "kind": "jump", "match": {"function": "f"}},
        {"id": "x", "class": "RE", "kind": "arg-seed", "match": {"function": "f"}, "payload": {"values": []}},
        {"id": "x", "class": "RE", "kind": "state-seed", "match": {"function": "f"}},
        {"id": "x", "class": "RE", "kind": "priority-boost", "match": {"function": "f"}, "payload": {"delta": "1"}},
        {"id": "x", "class": "RE", "kind": "reentry-target", "match": {"function": "f"}, "payload": {}},
    ],
)
def test_malformed_heuristics(record):
    with pytest.raises(ValueError):
        Heuristic.from_json(record)


def test_apply_examples(vault, vault_prop, vault_snapshot):
    ctx = build_context(vault_prop, vault, vault_snapshot)
    one = lambda h: HeuristicSet((h,), 1, Fraction(1), 0)  # noqa: E731
    assert apply_heuristics(ctx, one(_boost("deposit"))).relevance.initial == ("deposit", "withdraw")
    boosted = apply_heuristics(ctx, one(_boost("withdraw")))
    assert boosted.relevance.initial == ("withdraw", "deposit")
    assert boosted.evaluation == ctx.evaluation
    assert boosted.heuristics.selected[0].id == "b"
    assert apply_heuristics(ctx, HeuristicSet()) is ctx
    inert = apply_heuristics(ctx, one(_boost("nothing")))
    assert inert.relevance == ctx.relevance


def test_boost_clamps_and_keeps_others_stable():
    c = parse_contract("contract T { state a: int;\n"
                       "  external fn p() { a = 1; } external fn q() { a = 2; }\n"
                       "  external fn r() { a = 3; } external fn s() { a = 4; } }")
    ctx = build_context(parse_property("always a >= 0", c), c,
                        parse_snapshot('{"block":0,"state":{"a":0},"actors":["0xA"],"attacker":"0xA"}', c))
    assert ctx.relevance.initial == ("p", "q", "r", "s")
    hs = HeuristicSet((_boost("s", 2),), 1, Fraction(1), 0)
    assert apply_heuristics(ctx, hs).relevance.initial == ("p", "s", "q", "r")
    hs = HeuristicSet((_boost("s", 10),), 1, Fraction(1), 0)
    out = apply_heuristics(ctx, hs)
    assert out.relevance.initial == ("s", "p", "q", "r")
    assert out.relevance.ranking["p"] == ("s", "q", "r")
