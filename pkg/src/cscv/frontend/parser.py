"""Recursive-descent parser for MCL contracts and properties."""

from __future__ import annotations

from ..errors import MCLSyntaxError
from . import ast as A
from .lexer import Token, tokenize

# binary operator -> (precedence, right associative)
BINARY = {
    "->": (1, True),
    "||": (2, False),
    "&&": (3, False),
    "==": (4, False),
    "!=": (4, False),
    "<": (5, False),
    "<=": (5, False),
    ">": (5, False),
    ">=": (5, False),
    "+": (6, False),
    "-": (6, False),
    "*": (7, False),
    "/": (7, False),
}
UNARY_PREC = 8

TEMPORAL_FORMS = ("always", "eventually")


class Parser:
    def __init__(self, source: str, property_mode: bool = False):
        self.tokens = tokenize(source)
        self.i = 0
        self.property_mode = property_mode

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, expected: str):
        t = self.tok
        raise MCLSyntaxError(t.line, t.col, expected, t.text or "end of input")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.fail("an identifier")
        return self.advance()

    # declarations
    def contract(self) -> A.ContractAST:
        wrap = self.pragmas()
        self.expect("contract")
        name = self.ident().text
        self.expect("{")
        wrap = self.pragmas() or wrap
        state_vars: list[A.StateVar] = []
        while self.at("state"):
            state_vars.append(self.state_decl())
        functions: list[A.FunctionDecl] = []
        while self.at("external") or self.at("view"):
            functions.append(self.fun_decl())
        if self.at("state"):
            self.fail("'external' or 'view' (state declarations come first)")
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail("end of input")
        return A.ContractAST(name, tuple(state_vars), tuple(functions), wrap)

    def pragmas(self) -> bool:
        wrap = False
        while self.at("pragma"):
            self.advance()
            t = self.ident()
            if t.text != "wrap256":
                raise MCLSyntaxError(t.line, t.col, "pragma 'wrap256'", t.text)
            self.expect(";")
            wrap = True
        return wrap

    def type_(self) -> str:
        t = self.tok
        if self.at("int") or self.at("bool") or self.at("address"):
            self.advance()
            return t.text
        if self.at("map"):
            self.advance()
            self.expect("<")
            self.expect("address")
            self.expect(",")
            self.expect("int")
            self.expect(">")
            return A.MAP
        self.fail("a type (int, bool, address, map<address, int>)")

    def literal(self) -> A.Literal:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "int":
            self.advance()
            return A.IntLit(int(t.text), pos)
        if self.at("-") and self.peek().kind == "int":
            self.advance()
            return A.IntLit(-int(self.advance().text), pos)
        if self.at("true") or self.at("false"):
            self.advance()
            return A.BoolLit(t.text == "true", pos)
        if t.kind == "address":
            self.advance()
            return A.AddrLit(t.text, pos)
        self.fail("a literal")

    def state_decl(self) -> A.StateVar:
        start = self.expect("state")
        name = self.ident().text
        self.expect(":")
        ty = self.type_()
        init = None
        if self.at("="):
            self.advance()
            init = self.literal()
        self.expect(";")
        return A.StateVar(name, ty, init, (start.line, start.col))

    def fun_decl(self) -> A.FunctionDecl:
        start = self.advance()
        kind = start.text
        self.expect("fn")
        name = self.ident().text
        self.expect("(")
        params: list[A.Param] = []
        if not self.at(")"):
            while True:
                p = self.ident()
                self.expect(":")
                params.append(A.Param(p.text, self.type_(), (p.line, p.col)))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        ret = None
        if self.at("->"):
            self.advance()
            ret = self.type_()
        body = self.block()
        return A.FunctionDecl(name, kind, tuple(params), ret, body, (start.line, start.col))

    def block(self) -> tuple[A.Stmt, ...]:
        self.expect("{")
        out: list[A.Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("'}'")
            out.append(self.stmt())
        self.advance()
        return tuple(out)

    def stmt(self) -> A.Stmt:
        t = self.tok
        pos = (t.line, t.col)
        if self.at("require"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect(";")
            return A.Require(cond, pos)
        if self.at("call"):
            self.advance()
            target = self.expr()
            amount = self.expr()
            self.expect(";")
            return A.CallStmt(target, amount, pos)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = (self.stmt(),) if self.at("if") else self.block()
            return A.If(cond, then, orelse, pos)
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return A.Return(value, pos)
        if t.kind == "ident":
            target = self.lvalue()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return A.Assign(target, value, pos)
        self.fail("a statement")

    def lvalue(self) -> A.Name | A.Index:
        t = self.ident()
        pos = (t.line, t.col)
        if self.at("["):
            self.advance()
            idx = self.expr()
            self.expect("]")
            return A.Index(t.text, idx, pos)
        return A.Name(t.text, pos)

    # expressions
    def expr(self, min_prec: int = 1) -> A.Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in BINARY:
            op = self.tok.text
            prec, right_assoc = BINARY[op]
            if prec < min_prec:
                break
            t = self.advance()
            right = self.expr(prec if right_assoc else prec + 1)
            left = A.Binary(op, left, right, (t.line, t.col))
        return left

    def unary(self) -> A.Expr:
        t = self.tok
        if self.at("!"):
            self.advance()
            return A.Unary("!", self.unary(), (t.line, t.col))
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                # unary minus binds tighter than any binary operator, so folding is exact
                return A.IntLit(-int(self.advance().text), (t.line, t.col))
            return A.Unary("-", self.unary(), (t.line, t.col))
        return self.primary()

    def primary(self) -> A.Expr:
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "int":
            self.advance()
            return A.IntLit(int(t.text), pos)
        if t.kind == "address":
            self.advance()
            return A.AddrLit(t.text, pos)
        if self.at("true") or self.at("false"):
            self.advance()
            return A.BoolLit(t.text == "true", pos)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("msg"):
            self.advance()
            self.expect(".")
            field = self.ident()
            if field.text == "sender":
                return A.MsgSender(pos)
            if field.text == "value":
                return A.MsgValue(pos)
            raise MCLSyntaxError(field.line, field.col, "'sender' or 'value'", field.text)
        if t.kind == "ident":
            if self.property_mode and t.text == "attacker":
                self.advance()
                return A.Attacker(pos)
            if self.property_mode and t.text == "old" and self.peek().text == "(":
                self.advance()
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return A.Old(inner, pos)
            self.advance()
            if self.at("("):
                self.advance()
                args: list[A.Expr] = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.advance()
                        args.append(self.expr())
                self.expect(")")
                return A.Call(t.text, tuple(args), pos)
            if self.at("["):
                self.advance()
                idx = self.expr()
                self.expect("]")
                return A.Index(t.text, idx, pos)
            return A.Name(t.text, pos)
        self.fail("an expression")

    def property(self) -> tuple[str, A.Expr]:
        t = self.tok
        if t.kind != "ident" or t.text not in TEMPORAL_FORMS:
            self.fail("'always' or 'eventually'")
        self.advance()
        pred = self.expr()
        if self.tok.kind != "eof":
            self.fail("end of property")
        return t.text, pred


def parse_contract_syntax(source: str) -> A.ContractAST:
    return Parser(source).contract()


def parse_property_syntax(source: str) -> tuple[str, A.Expr]:
    return Parser(source, property_mode=True).property()
