"""Independent brute-force oracle for corpus verification.

A plain recursive interpreter over the parsed AST plus breadth-first
enumeration of bounded invocation sequences. It shares nothing with
``cscv.engine`` except the frontend's syntax trees, so agreement between the
two is evidence rather than tautology.

Bounds: arguments and attached values from 0..ARG_MAX, every actor as sender,
at most one reentrant invocation (sender = attacker) at the first payout to
the attacker.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from cscv.frontend import ast as A

ARG_MAX = 8
WORD = 2**256


class Revert(Exception):
    pass


class _Ret(Exception):
    def __init__(self, value):
        self.value = value


@dataclass(frozen=True)
class Call:
    fn: str
    sender: str
    value: int
    args: tuple
    nested: "Call | None" = None

    def __str__(self):
        inner = f" [{self.nested}]" if self.nested else ""
        return f"{self.fn}{self.args} from {self.sender} value {self.value}{inner}"


def _reads_value(contract, fn) -> bool:
    funcs = {f.name: f for f in contract.functions}
    seen, todo = set(), [fn]
    while todo:
        g = todo.pop()
        if g in seen:
            continue
        seen.add(g)
        for s in A.walk_stmts(funcs[g].body):
            for e in A.stmt_exprs(s):
                for x in A.walk_expr(e):
                    if isinstance(x, A.MsgValue):
                        return True
                    if isinstance(x, A.Call):
                        todo.append(x.name)
    return False


class Interp:
    def __init__(self, contract: A.ContractAST, actors, attacker):
        self.c = contract
        self.funcs = {f.name: f for f in contract.functions}
        self.actors = list(actors)
        self.attacker = attacker

    def _norm(self, v):
        return v % WORD if self.c.wrap256 else v

    def expr(self, e, st, env, msg):
        k = type(e)
        if k in (A.IntLit, A.BoolLit, A.AddrLit):
            return e.value
        if k is A.Name:
            return env[e.id] if e.id in env else st["vars"][e.id]
        if k is A.Index:
            return st["vars"][e.base].get(self.expr(e.index, st, env, msg), 0)
        if k is A.MsgSender:
            return msg[0]
        if k is A.MsgValue:
            return msg[1]
        if k is A.Call:
            g = self.funcs[e.name]
            local = {p.name: self.expr(a, st, env, msg) for p, a in zip(g.params, e.args)}
            try:
                self.block(g.body, st, local, msg, None)
            except _Ret as r:
                return r.value
            raise Revert("view fell through")
        if k is A.Unary:
            v = self.expr(e.operand, st, env, msg)
            return (not v) if e.op == "!" else self._norm(-v)
        op = e.op
        if op == "&&":
            return bool(self.expr(e.left, st, env, msg)) and bool(self.expr(e.right, st, env, msg))
        if op == "||":
            return bool(self.expr(e.left, st, env, msg)) or bool(self.expr(e.right, st, env, msg))
        if op == "->":
            return (not self.expr(e.left, st, env, msg)) or bool(self.expr(e.right, st, env, msg))
        a = self.expr(e.left, st, env, msg)
        b = self.expr(e.right, st, env, msg)
        if op == "+":
            return self._norm(a + b)
        if op == "-":
            return self._norm(a - b)
        if op == "*":
            return self._norm(a * b)
        if op == "/":
            if b == 0:
                raise Revert("division by zero")
            return self._norm(a // b)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "==": a == b, "!=": a != b}[op]

    def block(self, body, st, env, msg, pending):
        for s in body:
            if isinstance(s, A.Require):
                if not self.expr(s.cond, st, env, msg):
                    raise Revert("require")
            elif isinstance(s, A.Assign):
                v = self.expr(s.value, st, env, msg)
                t = s.target
                if isinstance(t, A.Index):
                    st["vars"][t.base][self.expr(t.index, st, env, msg)] = v
                elif t.id in env:
                    env[t.id] = v
                else:
                    st["vars"][t.id] = v
            elif isinstance(s, A.If):
                if self.expr(s.cond, st, env, msg):
                    self.block(s.then, st, env, msg, pending)
                elif s.orelse:
                    self.block(s.orelse, st, env, msg, pending)
            elif isinstance(s, A.CallStmt):
                to = self.expr(s.target, st, env, msg)
                amount = self.expr(s.amount, st, env, msg)
                if amount < 0:
                    raise Revert("negative payout")
                st["bal"][to] = st["bal"].get(to, 0) + amount
                if to == self.attacker and pending is not None:
                    if pending[0] is not None:
                        nested, pending[0] = pending[0], None
                        self.invoke(nested, st, None)
                    else:
                        pending[1] = True
            elif isinstance(s, A.Return):
                raise _Ret(None if s.value is None else self.expr(s.value, st, env, msg))

    def invoke(self, call: Call, st, pending):
        f = self.funcs[call.fn]
        if call.value < 0:
            raise Revert("negative value")
        have = st["bal"].get(call.sender, 0)
        if call.sender != self.attacker and call.value > have:
            raise Revert("unaffordable value")
        st["bal"][call.sender] = have - call.value
        env = {p.name: a for p, a in zip(f.params, call.args)}
        try:
            self.block(f.body, st, env, (call.sender, call.value), pending)
        except _Ret:
            pass

    def run(self, state, call: Call):
        """Returns (post_state or None on revert, whether the attacker was paid)."""
        st = {"vars": {k: (dict(v) if isinstance(v, dict) else v) for k, v in state["vars"].items()},
              "bal": dict(state["bal"])}
        pending = [call.nested, False]
        try:
            self.invoke(call, st, pending)
        except Revert:
            return None, pending[1]
        return st, pending[1]


def prop_value(e, post, pre, attacker):
    """Evaluate a property predicate; ``old`` reads the pre-state."""
    k = type(e)
    if k in (A.IntLit, A.BoolLit, A.AddrLit):
        return e.value
    if k is A.Attacker:
        return attacker
    if k is A.Name:
        return post["vars"][e.id]
    if k is A.Index:
        return post["vars"][e.base].get(prop_value(e.index, post, pre, attacker), 0)
    if k is A.Old:
        return prop_value(e.target, pre, pre, attacker)
    if k is A.Unary:
        v = prop_value(e.operand, post, pre, attacker)
        return (not v) if e.op == "!" else -v
    a = prop_value(e.left, post, pre, attacker)
    if e.op == "&&":
        return bool(a) and bool(prop_value(e.right, post, pre, attacker))
    if e.op == "||":
        return bool(a) or bool(prop_value(e.right, post, pre, attacker))
    if e.op == "->":
        return (not a) or bool(prop_value(e.right, post, pre, attacker))
    b = prop_value(e.right, post, pre, attacker)
    if e.op == "/":
        return a // b  # ZeroDivisionError is a failure, see holds()
    ops = {
        "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
        "<": lambda: a < b, "<=": lambda: a <= b, ">": lambda: a > b,
        ">=": lambda: a >= b, "==": lambda: a == b, "!=": lambda: a != b,
    }
    return ops[e.op]()


def holds(pred, post, pre, attacker) -> bool:
    try:
        return bool(prop_value(pred, post, pre, attacker))
    except ZeroDivisionError:
        return False


def has_old(pred) -> bool:
    return any(isinstance(x, A.Old) for x in A.walk_expr(pred))


def full_state(contract, snapshot) -> dict:
    """Start state from the whole snapshot (no context minimization)."""
    vars_ = {}
    for v in contract.state_vars:
        if v.name in snapshot.state:
            val = snapshot.state[v.name]
            vars_[v.name] = dict(val) if isinstance(val, dict) else val
        elif v.type == A.MAP:
            vars_[v.name] = {a: 0 for a in snapshot.actors}
        elif v.init is not None:
            vars_[v.name] = v.init.value
        else:
            vars_[v.name] = {"int": 0, "bool": False, "address": "0x0"}[v.type]
    return {"vars": vars_, "bal": {a: snapshot.native.get(a, 0) for a in snapshot.actors}}


def key(state) -> str:
    return json.dumps([state["vars"], state["bal"]], sort_keys=True)


def _arg_space(contract, fn, actors, arg_max):
    f = next(g for g in contract.functions if g.name == fn)
    spaces = []
    for p in f.params:
        if p.type == A.INT:
            spaces.append(range(arg_max + 1))
        elif p.type == A.BOOL:
            spaces.append((False, True))
        else:
            spaces.append(actors)
    return list(itertools.product(*spaces))


@dataclass
class OracleResult:
    min_depth: int | None
    witness: list
    states: int


def search(contract, prop, snapshot, depth=3, arg_max=ARG_MAX, reentry=True, start=None) -> OracleResult:
    """Shortest violating invocation sequence of length <= depth, if any."""
    it = Interp(contract, snapshot.actors, snapshot.attacker)
    pred = prop.pred
    s0 = start if start is not None else full_state(contract, snapshot)
    if not has_old(pred) and not holds(pred, s0, s0, snapshot.attacker):
        return OracleResult(0, [], 1)
    externals = [f.name for f in contract.functions if f.kind == "external"]
    values = {fn: (range(arg_max + 1) if _reads_value(contract, fn) else (0,)) for fn in externals}
    args = {fn: _arg_space(contract, fn, snapshot.actors, arg_max) for fn in externals}
    nested_calls = [
        Call(g, snapshot.attacker, v, a, None) for g in externals for a in args[g] for v in values[g]
    ]
    seen = {key(s0)}
    frontier = [(s0, [])]
    for level in range(1, depth + 1):
        nxt = []
        for s, path in frontier:
            for fn in externals:
                for sender in snapshot.actors:
                    for a in args[fn]:
                        for v in values[fn]:
                            plain = Call(fn, sender, v, a)
                            post, paid = it.run(s, plain)
                            options = [(plain, post)]
                            if reentry and paid:
                                options += [(Call(fn, sender, v, a, n), None) for n in nested_calls]
                            for call, p in options:
                                if p is None and call.nested is not None:
                                    p, _ = it.run(s, call)
                                if p is None:
                                    continue
                                if not holds(pred, p, s, snapshot.attacker):
                                    return OracleResult(level, path + [call], len(seen))
                                k = key(p)
                                if k not in seen:
                                    seen.add(k)
                                    nxt.append((p, path + [call]))
        frontier = nxt
    return OracleResult(None, [], len(seen))


def monitor(contract, prop, snapshot, start, calls) -> int | None:
    """Trace monitor for ALWAYS(pred): index of the first failing post-state.

    Reverted calls leave the state unchanged and are not checked.
    """
    it = Interp(contract, snapshot.actors, snapshot.attacker)
    s = start
    for i, call in enumerate(calls, 1):
        post, _ = it.run(s, call)
        if post is None:
            continue
        if not holds(prop.pred, post, s, snapshot.attacker):
            return i
        s = post
    return None
