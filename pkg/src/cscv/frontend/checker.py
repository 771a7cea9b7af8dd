"""Name resolution, kind rules and type checking for parsed MCL."""

from __future__ import annotations

from ..errors import KindError, NestedOld, ResolutionError, TypeCheckError, UnknownVariable, MCLSyntaxError
from . import ast as A

ARITH = ("+", "-", "*", "/")
ORDER = ("<", "<=", ">", ">=")
EQUAL = ("==", "!=")
LOGIC = ("&&", "||", "->")


def _at(node) -> tuple[int, int]:
    return getattr(node, "pos", (0, 0))


class ContractChecker:
    def __init__(self, contract: A.ContractAST):
        self.c = contract
        self.vars = {v.name: v for v in contract.state_vars}
        self.funcs = {f.name: f for f in contract.functions}

    def check(self) -> None:
        seen: set[str] = set()
        for v in self.c.state_vars:
            if v.name in seen:
                raise KindError(f"duplicate state variable {v.name!r}", *v.pos)
            seen.add(v.name)
            if v.init is not None:
                if v.type == A.MAP:
                    raise TypeCheckError(f"map {v.name!r} cannot have an initializer", *v.pos)
                if self.literal_type(v.init) != v.type:
                    raise TypeCheckError(f"initializer of {v.name!r} is not {v.type}", *v.pos)
        names: set[str] = set()
        for f in self.c.functions:
            if f.name in names:
                raise KindError(f"duplicate function {f.name!r}", *f.pos)
            if f.name in self.vars:
                raise KindError(f"function {f.name!r} shadows a state variable", *f.pos)
            names.add(f.name)
        for f in self.c.functions:
            self.check_function(f)
        self.check_view_recursion()

    @staticmethod
    def literal_type(lit: A.Literal) -> str:
        if isinstance(lit, A.IntLit):
            return A.INT
        if isinstance(lit, A.BoolLit):
            return A.BOOL
        return A.ADDRESS

    def check_function(self, f: A.FunctionDecl) -> None:
        params: dict[str, str] = {}
        for p in f.params:
            if p.type == A.MAP:
                raise TypeCheckError(f"parameter {p.name!r} cannot be a map", *p.pos)
            if p.name in params:
                raise KindError(f"duplicate parameter {p.name!r}", *p.pos)
            if p.name in self.vars:
                raise KindError(f"parameter {p.name!r} shadows a state variable", *p.pos)
            params[p.name] = p.type
        if f.return_type == A.MAP:
            raise TypeCheckError("functions cannot return maps", *f.pos)
        if f.kind == "view" and f.return_type is None:
            raise KindError(f"view {f.name!r} needs a return type", *f.pos)
        self.check_block(f, f.body, params)
        if f.kind == "view" and not self.definitely_returns(f.body):
            raise KindError(f"view {f.name!r} may end without returning", *f.pos)

    def definitely_returns(self, body) -> bool:
        for s in body:
            if isinstance(s, A.Return):
                return True
            if isinstance(s, A.If) and s.orelse is not None:
                if self.definitely_returns(s.then) and self.definitely_returns(s.orelse):
                    return True
        return False

    def check_block(self, f: A.FunctionDecl, body, params: dict[str, str]) -> None:
        for i, s in enumerate(body):
            if isinstance(s, A.Return) and i != len(body) - 1:
                raise KindError("statement after return", *_at(body[i + 1]))
            self.check_stmt(f, s, params)

    def check_stmt(self, f: A.FunctionDecl, s: A.Stmt, params: dict[str, str]) -> None:
        if isinstance(s, A.Require):
            self.expect_type(self.type_of(s.cond, params), A.BOOL, s.cond)
        elif isinstance(s, A.Assign):
            if f.kind == "view":
                raise KindError(f"assignment inside view {f.name!r}", *s.pos)
            target = s.target
            if isinstance(target, A.Name):
                if target.id in params:
                    ty = params[target.id]
                elif target.id in self.vars:
                    ty = self.vars[target.id].type
                    if ty == A.MAP:
                        raise TypeCheckError(f"map {target.id!r} must be assigned per entry", *target.pos)
                else:
                    raise ResolutionError(target.id, *target.pos)
            else:
                ty = self.type_of(target, params)
            self.expect_type(self.type_of(s.value, params), ty, s.value)
        elif isinstance(s, A.CallStmt):
            if f.kind == "view":
                raise KindError(f"call statement inside view {f.name!r}", *s.pos)
            self.expect_type(self.type_of(s.target, params), A.ADDRESS, s.target)
            self.expect_type(self.type_of(s.amount, params), A.INT, s.amount)
        elif isinstance(s, A.If):
            self.expect_type(self.type_of(s.cond, params), A.BOOL, s.cond)
            self.check_block(f, s.then, params)
            if s.orelse is not None:
                self.check_block(f, s.orelse, params)
        elif isinstance(s, A.Return):
            if s.value is None:
                if f.return_type is not None:
                    raise TypeCheckError(f"{f.name!r} must return a {f.return_type}", *s.pos)
            else:
                if f.return_type is None:
                    raise TypeCheckError(f"{f.name!r} declares no return type", *s.pos)
                self.expect_type(self.type_of(s.value, params), f.return_type, s.value)

    def expect_type(self, got: str, want: str, node) -> None:
        if got != want:
            raise TypeCheckError(f"expected {want}, got {got}", *_at(node))

    def type_of(self, e: A.Expr, params: dict[str, str]) -> str:
        if isinstance(e, A.IntLit):
            return A.INT
        if isinstance(e, A.BoolLit):
            return A.BOOL
        if isinstance(e, A.AddrLit):
            return A.ADDRESS
        if isinstance(e, A.MsgSender):
            return A.ADDRESS
        if isinstance(e, A.MsgValue):
            return A.INT
        if isinstance(e, (A.Attacker, A.Old, A.Captured)):
            raise KindError("property-only construct inside contract code", *_at(e))
        if isinstance(e, A.Name):
            if e.id in params:
                return params[e.id]
            if e.id in self.vars:
                ty = self.vars[e.id].type
                if ty == A.MAP:
                    raise TypeCheckError(f"map {e.id!r} used without an index", *e.pos)
                return ty
            raise ResolutionError(e.id, *e.pos)
        if isinstance(e, A.Index):
            v = self.vars.get(e.base)
            if v is None:
                raise ResolutionError(e.base, *e.pos)
            if v.type != A.MAP:
                raise TypeCheckError(f"{e.base!r} is not a map", *e.pos)
            self.expect_type(self.type_of(e.index, params), A.ADDRESS, e.index)
            return A.INT
        if isinstance(e, A.Call):
            g = self.funcs.get(e.name)
            if g is None:
                raise ResolutionError(e.name, *e.pos)
            if g.kind != "view":
                raise KindError(f"external function {e.name!r} cannot be called from contract code", *e.pos)
            if len(e.args) != len(g.params):
                raise TypeCheckError(f"{e.name!r} takes {len(g.params)} argument(s)", *e.pos)
            for a, p in zip(e.args, g.params):
                self.expect_type(self.type_of(a, params), p.type, a)
            return g.return_type
        if isinstance(e, A.Unary):
            t = self.type_of(e.operand, params)
            want = A.INT if e.op == "-" else A.BOOL
            self.expect_type(t, want, e.operand)
            return want
        if isinstance(e, A.Binary):
            lt = self.type_of(e.left, params)
            rt = self.type_of(e.right, params)
            return binary_type(e, lt, rt)
        raise TypeCheckError(f"unsupported expression {type(e).__name__}", *_at(e))

    def check_view_recursion(self) -> None:
        graph = {f.name: sorted(self.calls_in(f)) for f in self.c.functions}
        state: dict[str, int] = {}

        def visit(n: str) -> None:
            state[n] = 1
            for m in graph.get(n, ()):
                if state.get(m) == 1:
                    g = self.funcs[m]
                    raise KindError(f"recursive view call through {m!r}", *g.pos)
                if m not in state:
                    visit(m)
            state[n] = 2

        for f in self.c.functions:
            if f.name not in state:
                visit(f.name)

    @staticmethod
    def calls_in(f: A.FunctionDecl) -> set[str]:
        out: set[str] = set()
        for s in A.walk_stmts(f.body):
            for root in A.stmt_exprs(s):
                for e in A.walk_expr(root):
                    if isinstance(e, A.Call):
                        out.add(e.name)
        return out


def binary_type(e: A.Binary, lt: str, rt: str) -> str:
    if e.op in ARITH:
        if lt != A.INT or rt != A.INT:
            raise TypeCheckError(f"operator {e.op!r} needs int operands", *e.pos)
        return A.INT
    if e.op in ORDER:
        if lt != A.INT or rt != A.INT:
            raise TypeCheckError(f"operator {e.op!r} needs int operands", *e.pos)
        return A.BOOL
    if e.op in EQUAL:
        if lt != rt:
            raise TypeCheckError(f"cannot compare {lt} with {rt}", *e.pos)
        return A.BOOL
    if lt != A.BOOL or rt != A.BOOL:
        raise TypeCheckError(f"operator {e.op!r} needs bool operands", *e.pos)
    return A.BOOL


class PropertyChecker:
    """Binds a property predicate to a contract's state variables."""

    def __init__(self, contract: A.ContractAST):
        self.vars = {v.name: v for v in contract.state_vars}

    def check(self, pred: A.Expr) -> None:
        self.expect(self.type_of(pred, inside_old=False), A.BOOL, pred)

    @staticmethod
    def expect(got: str, want: str, node) -> None:
        if got != want:
            raise TypeCheckError(f"expected {want}, got {got}", *_at(node))

    def type_of(self, e: A.Expr, inside_old: bool) -> str:
        if isinstance(e, A.IntLit):
            return A.INT
        if isinstance(e, A.BoolLit):
            return A.BOOL
        if isinstance(e, (A.AddrLit, A.Attacker)):
            return A.ADDRESS
        if isinstance(e, A.Old):
            if inside_old:
                raise NestedOld(*e.pos)
            target = e.target
            if any(isinstance(x, A.Old) for x in A.walk_expr(target)):
                inner = next(x for x in A.walk_expr(target) if isinstance(x, A.Old))
                raise NestedOld(*inner.pos)
            if not isinstance(target, (A.Name, A.Index)):
                raise MCLSyntaxError(*_at(target), "a state variable or map entry inside old(...)")
            return self.type_of(target, inside_old=True)
        if isinstance(e, A.Name):
            v = self.vars.get(e.id)
            if v is None:
                raise UnknownVariable(e.id, *e.pos)
            if v.type == A.MAP:
                raise TypeCheckError(f"map {e.id!r} used without an index", *e.pos)
            return v.type
        if isinstance(e, A.Index):
            v = self.vars.get(e.base)
            if v is None:
                raise UnknownVariable(e.base, *e.pos)
            if v.type != A.MAP:
                raise TypeCheckError(f"{e.base!r} is not a map", *e.pos)
            if not isinstance(e.index, (A.AddrLit, A.Attacker)):
                raise TypeCheckError("property map indices must be address literals or 'attacker'", *_at(e.index))
            return A.INT
        if isinstance(e, (A.MsgSender, A.MsgValue, A.Call)):
            raise KindError("properties range over state only", *_at(e))
        if isinstance(e, A.Unary):
            want = A.INT if e.op == "-" else A.BOOL
            self.expect(self.type_of(e.operand, inside_old), want, e.operand)
            return want
        if isinstance(e, A.Binary):
            return binary_type(e, self.type_of(e.left, inside_old), self.type_of(e.right, inside_old))
        raise TypeCheckError(f"unsupported expression {type(e).__name__}", *_at(e))
