"""Why some patched contracts verify and others stay unknown.

A Verified verdict needs the reachable state space to close under canonical
hashing before the diameter runs out. WalletPatched has a handful of states, so
the frontier empties. VaultPatched lets anyone deposit, so every level reaches
new totals and the search stops at the diameter with no violation found.

    python3 demos/02_verdicts_and_fixpoints.py
"""

from dataclasses import replace

from cscv.engine import Budget
from cscv.harness import load_manifest
from cscv.pipeline import Problem, load_problem, verify
from cscv.solver import make_handle

entries = {e.id: e for e in load_manifest()}

for key in ("wallet", "wallet-patched", "vault-patched", "rewards-patched"):
    e = entries[key]
    problem = load_problem(e.contract, e.property, e.snapshot)
    print(f"{key}: {problem.prop.source.strip()}")
    for diameter in (1, 2, 4):
        v = verify(problem, Budget(diameter=diameter), make_handle("builtin"))
        s = v.stats
        print(f"  diameter {diameter}: {str(v):30s} {s.states:4d} states {s.transitions:5d} transitions")
    print()

# The s0 check runs before any transition: a snapshot that already breaks the
# property yields a zero-length vector.
e = entries["wallet"]
problem = load_problem(e.contract, e.property, e.snapshot)
taken = replace(problem.snapshot, state={**problem.snapshot.state, "owner": "0xA"})
v = verify(Problem(problem.contract, problem.prop, taken))
print("wallet already owned by the attacker:", v, "at index", v.vector.violating_index)
