"""Concolic interpreter for MCL function bodies.

Every value is carried as a ``(concrete, term)`` pair. State starts concrete;
the inputs of the top-level invocation (arguments, sender, attached value) are
symbols, so terms only grow where those inputs flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend import ast as A
from ..solver.terms import BOOL, FALSE, INT, TRUE, AddressSort, Const, Sym, Term, evaluate, floor_div, mk, negate
from .state import GlobalState, Invocation

WORD = 2**256

OK = "ok"
REQUIRE_FAILED = "require-failed"
TRAP = "trap"
VIOLATED = "postcondition-violated"
OUTCOMES = (OK, REQUIRE_FAILED, TRAP, VIOLATED)


class Revert(Exception):
    def __init__(self, outcome: str, detail: str = ""):
        super().__init__(detail)
        self.outcome = outcome
        self.detail = detail


class _Return(Exception):
    def __init__(self, value):
        self.value = value


@dataclass(frozen=True)
class Constraint:
    """One recorded path constraint.

    Branch constraints (``require``, ``if``, short-circuit operands, payout
    targets) may be negated by the input generator; guards that only keep the
    run defined (non-zero divisors, affordable attached value) may not.
    """

    term: Term
    flippable: bool
    site: str


@dataclass(frozen=True)
class SymbolicTrace:
    function: str
    symbols: tuple[tuple[str, object, object], ...]  # (name, sort, concrete value)
    constraints: tuple[Constraint, ...]
    branch_log: tuple[tuple[str, bool], ...]
    outcome: str
    post_term: Term | None = None
    attacker_calls: int = 0
    reads: frozenset[str] = field(default=frozenset())
    writes: frozenset[str] = field(default=frozenset())

    @property
    def path_constraints(self) -> list[Term]:
        return [c.term for c in self.constraints]

    def inputs(self) -> dict:
        return {name: value for name, _, value in self.symbols}

    def consistent(self) -> bool:
        """The run's own inputs satisfy every recorded constraint."""
        env = self.inputs()
        return all(evaluate(c.term, env) is True for c in self.constraints)


@dataclass
class _Frame:
    env: dict
    sender: tuple
    value: tuple
    level: int
    schedule: list


class Machine:
    """Executes invocations of one contract for a fixed actor set.

    ``postcondition``/``pre_capture`` come from the instrumented contract; with
    no postcondition the machine only runs bodies.
    """

    def __init__(
        self,
        contract: A.ContractAST,
        actors: tuple[str, ...],
        attacker: str,
        reentry_depth: int = 1,
        pre_capture: tuple = (),
        postcondition: A.Expr | None = None,
    ):
        self.contract = contract
        self.funcs = {f.name: f for f in contract.functions}
        self.types = {v.name: v.type for v in contract.state_vars}
        self.actors = tuple(actors)
        self.attacker = attacker
        self.asort = AddressSort(self.actors)
        self.reentry_depth = reentry_depth
        self.pre_capture = tuple(pre_capture)
        self.postcondition = postcondition
        self.wrap = contract.wrap256

    # -- helpers ------------------------------------------------------------

    def const(self, v) -> Term:
        if isinstance(v, bool):
            return TRUE if v else FALSE
        if isinstance(v, int):
            return Const(v, INT)
        return Const(v, self.asort)

    def sort_for(self, ty: str):
        if ty == A.INT:
            return INT
        if ty == A.BOOL:
            return BOOL
        return self.asort

    def _branch(self, term: Term, taken: bool, site: str, flippable: bool = True) -> None:
        self.log.append((site, taken))
        if isinstance(term, Const):
            return
        self.constraints.append(Constraint(term if taken else negate(term), flippable, site))

    def _guard(self, term: Term, site: str) -> None:
        if not isinstance(term, Const):
            self.constraints.append(Constraint(term, False, site))

    @staticmethod
    def _site(kind: str, node) -> str:
        line, col = node.pos
        return f"{kind}@{line}:{col}"

    # -- state access ---------------------------------------------------------

    def _read_var(self, name: str, fr: _Frame):
        if fr.level == 0:
            self.reads.add(name)
        return self.store[name], self.sym.get(name) or self.const(self.store[name])

    def _map_term(self, base: str, key: str) -> Term:
        terms = self.sym_maps.get(base)
        if terms is not None and key in terms:
            return terms[key]
        return Const(self.store[base].get(key, 0), INT)

    def _read_map(self, base: str, idx, fr: _Frame):
        if fr.level == 0:
            self.reads.add(base)
        key, kt = idx
        c = self.store[base].get(key, 0)
        if isinstance(kt, Const):
            return c, self._map_term(base, key)
        if key not in self.actors:
            self._guard(mk("==", kt, self.const(key)), "guard:index")
            return c, self._map_term(base, key)
        t = self._map_term(base, self.actors[-1])
        for a in reversed(self.actors[:-1]):
            t = mk("ite", mk("==", kt, self.const(a)), self._map_term(base, a), t)
        return c, t

    def _write_map(self, base: str, idx, val, fr: _Frame) -> None:
        if fr.level == 0:
            self.writes.add(base)
        key, kt = idx
        terms = self.sym_maps.setdefault(base, {})
        if isinstance(kt, Const) or key not in self.actors:
            if not isinstance(kt, Const):
                self._guard(mk("==", kt, self.const(key)), "guard:index")
            terms[key] = val[1]
        else:
            for a in self.actors:
                terms[a] = mk("ite", mk("==", kt, self.const(a)), val[1], self._map_term(base, a))
        self.store[base][key] = val[0]

    # -- expressions ----------------------------------------------------------

    def _arith(self, op: str, a, b, node):
        if op == "/":
            if b[0] == 0:
                self._guard(mk("==", b[1], Const(0, INT)), "guard:div")
                raise Revert(TRAP, "division by zero")
            self._guard(mk("!=", b[1], Const(0, INT)), "guard:div")
            c, t = floor_div(a[0], b[0]), mk("div", a[1], b[1])
        elif op == "+":
            c, t = a[0] + b[0], mk("+", a[1], b[1])
        elif op == "-":
            c, t = a[0] - b[0], mk("-", a[1], b[1])
        else:
            c, t = a[0] * b[0], mk("*", a[1], b[1])
        if self.wrap:
            c, t = c % WORD, mk("mod", t, Const(WORD, INT))
        return c, t

    def ev(self, e, fr: _Frame):
        if isinstance(e, A.IntLit):
            return e.value, Const(e.value, INT)
        if isinstance(e, A.BoolLit):
            return e.value, self.const(e.value)
        if isinstance(e, A.AddrLit):
            return e.value, self.const(e.value)
        if isinstance(e, A.Name):
            if e.id in fr.env:
                return fr.env[e.id]
            return self._read_var(e.id, fr)
        if isinstance(e, A.Index):
            return self._read_map(e.base, self.ev(e.index, fr), fr)
        if isinstance(e, A.MsgSender):
            return fr.sender
        if isinstance(e, A.MsgValue):
            return fr.value
        if isinstance(e, A.Call):
            return self._call_view(e, fr)
        if isinstance(e, A.Unary):
            a = self.ev(e.operand, fr)
            if e.op == "!":
                return not a[0], mk("not", a[1])
            c, t = -a[0], mk("neg", a[1])
            if self.wrap:
                c, t = c % WORD, mk("mod", t, Const(WORD, INT))
            return c, t
        if isinstance(e, A.Binary):
            op = e.op
            if op in ("&&", "||", "->"):
                a = self.ev(e.left, fr)
                self._branch(a[1], a[0], self._site(op, e))
                short = a[0] if op == "||" else not a[0]
                if short:
                    return op != "&&", self.const(op != "&&")
                return self.ev(e.right, fr)
            a = self.ev(e.left, fr)
            b = self.ev(e.right, fr)
            if op in ("+", "-", "*", "/"):
                return self._arith(op, a, b, e)
            cmp = {
                "<": lambda x, y: x < y,
                "<=": lambda x, y: x <= y,
                ">": lambda x, y: x > y,
                ">=": lambda x, y: x >= y,
                "==": lambda x, y: x == y,
                "!=": lambda x, y: x != y,
            }[op]
            return cmp(a[0], b[0]), mk(op, a[1], b[1])
        raise TypeError(f"cannot evaluate {type(e).__name__} in a function body")

    def _call_view(self, e: A.Call, fr: _Frame):
        g = self.funcs[e.name]
        args = [self.ev(a, fr) for a in e.args]
        inner = _Frame({p.name: v for p, v in zip(g.params, args)}, fr.sender, fr.value, fr.level, [])
        try:
            self._exec(g.body, inner)
        except _Return as r:
            return r.value
        raise Revert(TRAP, f"view {g.name} ended without return")

    # -- statements -------------------------------------------------------------

    def _exec(self, body, fr: _Frame) -> None:
        for s in body:
            if isinstance(s, A.Require):
                c = self.ev(s.cond, fr)
                self._branch(c[1], c[0], self._site("require", s))
                if not c[0]:
                    raise Revert(REQUIRE_FAILED, f"require at {s.pos[0]}:{s.pos[1]}")
            elif isinstance(s, A.Assign):
                v = self.ev(s.value, fr)
                t = s.target
                if isinstance(t, A.Index):
                    self._write_map(t.base, self.ev(t.index, fr), v, fr)
                elif t.id in fr.env:
                    fr.env[t.id] = v
                else:
                    if fr.level == 0:
                        self.writes.add(t.id)
                    self.store[t.id] = v[0]
                    self.sym[t.id] = v[1]
            elif isinstance(s, A.If):
                c = self.ev(s.cond, fr)
                self._branch(c[1], c[0], self._site("if", s))
                if c[0]:
                    self._exec(s.then, fr)
                elif s.orelse is not None:
                    self._exec(s.orelse, fr)
            elif isinstance(s, A.CallStmt):
                self._payout(s, fr)
            elif isinstance(s, A.Return):
                raise _Return(None if s.value is None else self.ev(s.value, fr))

    def _payout(self, s: A.CallStmt, fr: _Frame) -> None:
        target = self.ev(s.target, fr)
        amount = self.ev(s.amount, fr)
        if amount[0] < 0:
            self._guard(mk("<", amount[1], Const(0, INT)), "guard:payout")
            raise Revert(TRAP, "negative payout")
        self._guard(mk(">=", amount[1], Const(0, INT)), "guard:payout")
        to_attacker = target[0] == self.attacker
        self._branch(mk("==", target[1], self.const(self.attacker)), to_attacker, self._site("call", s))
        self.balances[target[0]] = self.balances.get(target[0], 0) + amount[0]
        if not to_attacker:
            return
        if fr.schedule and fr.level < self.reentry_depth:
            self._invoke(fr.schedule.pop(0), fr.level + 1, symbolic=False)
        elif fr.level == 0:
            self.attacker_calls += 1

    # -- invocations -------------------------------------------------------------

    def _invoke(self, inv: Invocation, level: int, symbolic: bool) -> None:
        f = self.funcs[inv.function]
        if symbolic:
            args = []
            for p, v in zip(f.params, inv.args):
                sym = Sym(f"arg.{p.name}", self.sort_for(p.type))
                self.symbols.append((sym.name, sym.sort, v))
                args.append((v, sym))
            sender = (inv.sender, Sym("msg.sender", self.asort))
            value = (inv.value, Sym("msg.value", INT))
            self.symbols.append(("msg.sender", self.asort, inv.sender))
            self.symbols.append(("msg.value", INT, inv.value))
        else:
            args = [(v, self.const(v)) for v in inv.args]
            sender = (inv.sender, self.const(inv.sender))
            value = (inv.value, Const(inv.value, INT))
        if value[0] < 0:
            raise Revert(TRAP, "negative attached value")
        affordable = sender[0] == self.attacker or value[0] <= self.balances.get(sender[0], 0)
        guard = mk(
            "or",
            mk("==", sender[1], self.const(self.attacker)),
            mk("<=", value[1], Const(self.balances.get(sender[0], 0), INT)),
        )
        self._guard(guard if affordable else negate(guard), "guard:value")
        if not affordable:
            raise Revert(TRAP, "attached value exceeds sender balance")
        self.balances[sender[0]] = self.balances.get(sender[0], 0) - value[0]
        fr = _Frame({p.name: a for p, a in zip(f.params, args)}, sender, value, level, list(inv.reentry))
        try:
            self._exec(f.body, fr)
        except _Return:
            pass

    def run(self, state: GlobalState, inv: Invocation, symbolic: bool = True):
        """Execute one top-level invocation; returns (post_state, trace, outcome)."""
        self.store = {k: (dict(v) if isinstance(v, dict) else v) for k, v in state.valuation.items()}
        self.balances = dict(state.actor_balances)
        self.sym: dict[str, Term] = {}
        self.sym_maps: dict[str, dict[str, Term]] = {}
        self.constraints: list[Constraint] = []
        self.log: list[tuple[str, bool]] = []
        self.symbols: list = []
        self.reads: set[str] = set()
        self.writes: set[str] = set()
        self.attacker_calls = 0

        captured = [prop_pair(lv, self, ()) for lv in self.pre_capture]
        post_term = None
        try:
            self._invoke(inv, 0, symbolic)
            outcome = OK
        except Revert as r:
            outcome = r.outcome
        if outcome == OK and self.postcondition is not None:
            holds, post_term = prop_pair(self.postcondition, self, captured)
            if not holds:
                outcome = VIOLATED
        trace = SymbolicTrace(
            inv.function,
            tuple(self.symbols),
            tuple(self.constraints),
            tuple(self.log),
            outcome,
            post_term,
            self.attacker_calls,
            frozenset(self.reads),
            frozenset(self.writes),
        )
        if outcome in (REQUIRE_FAILED, TRAP):
            return state, trace, outcome
        return state.with_values(self.store, self.balances, state.depth + 1), trace, outcome


# -- property evaluation --------------------------------------------------------


def _prop_value(e, m: Machine, captured):
    if isinstance(e, (A.IntLit, A.BoolLit, A.AddrLit)):
        return e.value
    if isinstance(e, A.Attacker):
        return m.attacker
    if isinstance(e, A.Name):
        return m.store[e.id]
    if isinstance(e, A.Index):
        return m.store[e.base].get(_prop_value(e.index, m, captured), 0)
    if isinstance(e, A.Captured):
        return captured[e.slot][0]
    if isinstance(e, A.Unary):
        v = _prop_value(e.operand, m, captured)
        return (not v) if e.op == "!" else (-v % WORD if m.wrap else -v)
    if isinstance(e, A.Binary):
        op = e.op
        a = _prop_value(e.left, m, captured)
        if op == "&&" and not a:
            return False
        if op == "||" and a:
            return True
        if op == "->" and not a:
            return True
        b = _prop_value(e.right, m, captured)
        if op in ("&&", "||", "->"):
            return bool(b)
        if op == "/":
            if b == 0:
                raise ZeroDivisionError
            r = a // b
        elif op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        else:
            return {
                "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "==": a == b, "!=": a != b,
            }[op]
        return r % WORD if m.wrap else r
    raise TypeError(f"cannot evaluate {type(e).__name__} in a property")


_TERM_OPS = {"&&": "and", "||": "or", "->": "=>", "/": "div"}


def _prop_term(e, m: Machine, captured) -> Term:
    if isinstance(e, (A.IntLit, A.BoolLit, A.AddrLit)):
        return m.const(e.value)
    if isinstance(e, A.Attacker):
        return m.const(m.attacker)
    if isinstance(e, A.Name):
        return m.sym.get(e.id) or m.const(m.store[e.id])
    if isinstance(e, A.Index):
        return m._map_term(e.base, _prop_value(e.index, m, captured))
    if isinstance(e, A.Captured):
        return captured[e.slot][1]
    if isinstance(e, A.Unary):
        t = _prop_term(e.operand, m, captured)
        if e.op == "!":
            return mk("not", t)
        t = mk("neg", t)
        return mk("mod", t, Const(WORD, INT)) if m.wrap else t
    t = mk(_TERM_OPS.get(e.op, e.op), _prop_term(e.left, m, captured), _prop_term(e.right, m, captured))
    if m.wrap and e.op in ("+", "-", "*", "/"):
        t = mk("mod", t, Const(WORD, INT))
    return t


def prop_pair(e, m: Machine, captured):
    """Concrete value and term of a property expression over the machine's store.

    A division by zero while evaluating the property counts as a failure.
    """
    try:
        c = _prop_value(e, m, captured)
    except ZeroDivisionError:
        c = False
    return c, _prop_term(e, m, captured)


def property_holds(pred: A.Expr, contract: A.ContractAST, state: GlobalState, captured=()) -> bool:
    m = Machine(contract, state.actors, state.attacker)
    m.store = state.valuation
    m.sym, m.sym_maps = {}, {}
    return bool(prop_pair(pred, m, list(captured))[0])


def evaluate_view(contract: A.ContractAST, name: str, valuation: dict):
    """Concrete value of a nullary view under ``valuation``, or None if it reverts."""
    actors: tuple[str, ...] = ()
    for v in valuation.values():
        if isinstance(v, dict):
            actors = tuple(v)
            break
    m = Machine(contract, actors or ("0x0",), "")
    m.store = {k: (dict(v) if isinstance(v, dict) else v) for k, v in valuation.items()}
    m.balances, m.sym, m.sym_maps = {}, {}, {}
    m.constraints, m.log, m.symbols = [], [], []
    m.reads, m.writes, m.attacker_calls = set(), set(), 0
    fr = _Frame({}, ("0x0", m.const("0x0")), (0, Const(0, INT)), 0, [])
    try:
        return m._call_view(A.Call(name), fr)[0]
    except Revert:
        return None
