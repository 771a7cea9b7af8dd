"""One concolic step, by hand.

Run Vault.withdraw(1) for the attacker, look at the constraints the run
recorded, negate the balance guard and ask the solver for inputs that take the
other side. The same query is printed as SMT-LIB so it can be fed to z3.

    python3 demos/04_concolic_flip.py
"""

from cscv.corpus import CORPUS_DIR
from cscv.engine import Invocation, initial_state, step_concolic
from cscv.pipeline import load_problem, prepare
from cscv.solver import AddressSort, Sym, addr, emit_smtlib, make_handle, mk, negate, solve

SRC = CORPUS_DIR / "contracts"
ACTORS = ("0xA", "0xB")

problem = load_problem(SRC / "vault.mcl", SRC / "vault.prop", SRC / "vault.json")
prep = prepare(problem)
s0 = initial_state(prep.context, prep.instrumented.base, prep.snapshot)

post, trace, outcome = step_concolic(s0, Invocation("withdraw", "0xA", 0, (1,)), prep.instrumented)
print("withdraw(1) from 0xA:", outcome)
print("inputs:", trace.inputs())
for c in trace.constraints:
    print(f"  {'flip' if c.flippable else 'keep'}  {c.site:24s} {c.term}")

guard = next(c for c in trace.constraints if c.flippable)
sender = Sym("msg.sender", AddressSort(ACTORS))
query = [negate(guard.term), mk("==", sender, addr("0xA", ACTORS))]
result = solve(query, make_handle("builtin"))
print("\nnegated guard:", query[0])
print("solver:", result)

print("\nas SMT-LIB:")
print(emit_smtlib(query))
