import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corpus_source
from cscv.analysis import (
    access_sets,
    dependency_closure,
    dependency_graph,
    shared_variable_count,
)
from cscv.engine import Budget, Machine
from cscv.errors import SameFunction
from cscv.frontend import parse_contract
from cscv.pipeline import verify

CONTRACTS = ["vault", "vault_patched", "amm", "amm_spot", "lend_spot", "lend_fixed",
             "rewards", "rewards_patched", "wallet", "wallet_patched", "flash_pool", "flash_pool_patched"]


def _load(name):
    return parse_contract(corpus_source(name + ".mcl"))


def test_vault_access_sets(vault):
    s = access_sets(vault)
    assert s.reads["deposit"] == {"balances", "total"}
    assert s.writes["deposit"] == {"balances", "total"}
    assert s.reads["withdraw"] == {"balances", "total"}
    assert s.writes["withdraw"] == {"balances", "total"}
    assert s.reads["getTotal"] == {"total"}
    assert s.writes["getTotal"] == set()


def test_empty_body_touches_nothing():
    c = parse_contract("contract E { state t: int; external fn f() { } }")
    s = access_sets(c)
    assert s.reads["f"] == s.writes["f"] == frozenset()


def test_view_calls_are_inlined():
    c = parse_contract(
        "contract C { state a: int; state b: int;\n"
        "  view fn va() -> int { return a; }\n"
        "  view fn vb() -> int { return va() + 1; }\n"
        "  external fn f() { b = vb(); } }"
    )
    s = access_sets(c)
    assert s.reads["f"] == {"a"}
    assert s.writes["f"] == {"b"}
    assert ("b", "a") in dependency_graph(c).edges


def test_vault_closure(vault):
    assert dependency_closure({"total"}, vault) == {"total", "balances"}
    assert dependency_closure(set(), vault) == frozenset()
    assert dependency_closure(set(vault.var_names), vault) == set(vault.var_names)


def test_control_dependence_through_if():
    c = parse_contract(
        "contract C { state x: int; state flag: bool; state y: int;\n"
        "  external fn f() { if (flag) { x = 1; } }\n"
        "  external fn g(v: int) { y = v; } }"
    )
    assert dependency_closure({"x"}, c) == {"x", "flag"}
    assert dependency_closure({"y"}, c) == {"y"}


def test_shared_counts(vault):
    s = access_sets(vault)
    assert shared_variable_count("deposit", "withdraw", s) == 2
    with pytest.raises(SameFunction):
        shared_variable_count("deposit", "deposit", s)
    c = parse_contract("contract D { state a: int; state b: int;\n"
                       "  external fn f() { a = 1; } external fn g() { b = 1; } }")
    assert shared_variable_count("f", "g", access_sets(c)) == 0


def test_deps_json_is_sorted(vault):
    edges = dependency_graph(vault).to_json()
    assert edges == sorted(edges)
    assert list(access_sets(vault).to_json()) == sorted(access_sets(vault).to_json())


@pytest.mark.parametrize("name", CONTRACTS)
def test_edges_are_declared_and_deterministic(name):
    c = _load(name)
    g = dependency_graph(c)
    declared = set(c.var_names)
    assert all(v in declared and w in declared for v, w in g.edges)
    assert dependency_graph(_load(name)) == g
    s = access_sets(c)
    for f in c.views:
        assert s.writes[f.name] == frozenset()


@pytest.mark.parametrize("name", CONTRACTS)
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_closure_monotone(name, data):
    c = _load(name)
    names = list(c.var_names)
    b = set(data.draw(st.lists(st.sampled_from(names), unique=True)) if names else [])
    a = set(data.draw(st.lists(st.sampled_from(sorted(b)), unique=True)) if b else [])
    ca, cb = dependency_closure(a, c), dependency_closure(b, c)
    assert a <= ca and b <= cb
    assert ca <= cb


@pytest.mark.parametrize("name", CONTRACTS)
def test_shared_count_symmetric(name):
    c = _load(name)
    s = access_sets(c)
    for f in c.external_names:
        for g in c.external_names:
            if f != g:
                assert shared_variable_count(f, g, s) == shared_variable_count(g, f, s)


def test_access_sets_are_sound_on_engine_runs(entries, problems):
    # Every variable the engine read or wrote at the top level of f lies in the static sets.
    checked = 0
    for e in entries:
        p = problems[e.id]
        s = access_sets(p.contract)
        bad = []

        def on_trace(state, inv, trace, s=s, bad=bad):
            f = inv.function
            if not trace.reads <= s.reads[f] or not trace.writes <= s.writes[f]:
                bad.append((inv, trace.reads, trace.writes))

        verify(p, Budget(diameter=2, time_limit=10.0), on_trace=on_trace, constantization=False)
        assert not bad, (e.id, bad[:3])
        checked += 1
    assert checked == len(entries)


def test_changed_variables_are_written(entries, problems):
    for e in entries:
        p = problems[e.id]
        s = access_sets(p.contract)
        bad = []

        def on_trace(state, inv, trace, s=s, bad=bad):
            if inv.reentry:
                return
            m = Machine(p.contract, state.actors, state.attacker, 1)
            post, _, _ = m.run(state, inv, symbolic=False)
            changed = {k for k in state.valuation if state.valuation[k] != post.valuation[k]}
            if not changed <= s.writes[inv.function]:
                bad.append(inv)

        verify(p, Budget(diameter=2, time_limit=10.0), on_trace=on_trace, constantization=False)
        assert not bad, (e.id, bad[:3])
