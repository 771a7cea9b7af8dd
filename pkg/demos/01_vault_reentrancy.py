"""Walk the pipeline by hand on the reentrant Vault.

Vault.withdraw pays the caller before it updates the books. We ask whether
`always total >= 0` can be broken from a snapshot where 0xA holds 5, and let
each stage print what it contributes.

    python3 demos/01_vault_reentrancy.py
"""

from cscv.analysis import access_sets, dependency_closure
from cscv.context import build_context
from cscv.corpus import CORPUS_DIR
from cscv.engine import Budget, explore, replay
from cscv.frontend import parse_contract, parse_property, parse_snapshot
from cscv.optimization import spatialize
from cscv.solver import make_handle

SRC = CORPUS_DIR / "contracts"

contract = parse_contract((SRC / "vault.mcl").read_text())
prop = parse_property("always total >= 0", contract)
snapshot = parse_snapshot((SRC / "vault.json").read_text(), contract)

print("== static analysis")
sets = access_sets(contract)
for f in contract.external_names:
    print(f"  {f:9s} reads {sorted(sets.reads[f])}  writes {sorted(sets.writes[f])}")
# total alone is not enough: withdraw's guard on balances controls every write to total
print("  closure of {total}:", sorted(dependency_closure({"total"}, contract)))

print("\n== context")
ctx = build_context(prop, contract, snapshot)
print("  valuation:", ctx.evaluation.valuation)
print("  initial ranking:", ctx.relevance.initial)
for f, order in ctx.relevance.ranking.items():
    print(f"  after {f}: try {order}")

print("\n== spatialized property")
inst = spatialize(prop, contract)
print("  captured at entry:", inst.pre_capture or "nothing")
print("  checked at exit of", ", ".join(inst.functions))

print("\n== exploration")
verdict = explore(ctx, inst, snapshot, Budget(diameter=3), make_handle("builtin"))
print(" ", verdict, verdict.stats.to_json())
vec = verdict.vector
for item in vec.items():
    if hasattr(item, "function"):
        print("   call", item)
    else:
        print("   state", item.to_json(), "balances", item.actor_balances)

print("\n== replay from s0 without the solver:", replay(vec, inst, snapshot, ctx))
