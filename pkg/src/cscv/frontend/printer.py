"""Pretty-printing back to MCL/property source. Output re-parses to an equal tree."""

from __future__ import annotations

from . import ast as A
from .parser import BINARY, UNARY_PREC

INDENT = "    "


def expr_to_str(e: A.Expr, parent_prec: int = 0) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.AddrLit):
        return e.value
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.Index):
        return f"{e.base}[{expr_to_str(e.index)}]"
    if isinstance(e, A.MsgSender):
        return "msg.sender"
    if isinstance(e, A.MsgValue):
        return "msg.value"
    if isinstance(e, A.Attacker):
        return "attacker"
    if isinstance(e, A.Old):
        return f"old({expr_to_str(e.target)})"
    if isinstance(e, A.Captured):
        return f"$old{e.slot}"
    if isinstance(e, A.Call):
        return f"{e.name}({', '.join(expr_to_str(a) for a in e.args)})"
    if isinstance(e, A.Unary):
        inner = expr_to_str(e.operand, UNARY_PREC)
        if e.op == "-" and (inner.startswith("-") or isinstance(e.operand, A.IntLit)):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, A.Binary):
        prec, right_assoc = BINARY[e.op]
        left = expr_to_str(e.left, prec + 1 if right_assoc else prec)
        right = expr_to_str(e.right, prec if right_assoc else prec + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"cannot print {type(e).__name__}")


def _operand(e: A.Expr) -> str:
    # `call` takes two juxtaposed expressions; keep each self-delimiting.
    text = expr_to_str(e)
    if isinstance(e, A.Binary) or text.startswith("-"):
        return f"({text})"
    return text


def stmt_lines(s: A.Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, A.Require):
        return [f"{pad}require({expr_to_str(s.cond)});"]
    if isinstance(s, A.Assign):
        return [f"{pad}{expr_to_str(s.target)} = {expr_to_str(s.value)};"]
    if isinstance(s, A.CallStmt):
        return [f"{pad}call {_operand(s.target)} {_operand(s.amount)};"]
    if isinstance(s, A.Return):
        return [f"{pad}return;" if s.value is None else f"{pad}return {expr_to_str(s.value)};"]
    if isinstance(s, A.If):
        lines = [f"{pad}if ({expr_to_str(s.cond)}) {{"]
        for t in s.then:
            lines += stmt_lines(t, depth + 1)
        if s.orelse is None:
            lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}}} else {{")
            for t in s.orelse:
                lines += stmt_lines(t, depth + 1)
            lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"cannot print {type(s).__name__}")


def type_to_str(t: str) -> str:
    return "map<address, int>" if t == A.MAP else t


def contract_to_str(c: A.ContractAST) -> str:
    lines = []
    if c.wrap256:
        lines.append("pragma wrap256;")
    lines.append(f"contract {c.name} {{")
    for v in c.state_vars:
        init = f" = {expr_to_str(v.init)}" if v.init is not None else ""
        lines.append(f"{INDENT}state {v.name}: {type_to_str(v.type)}{init};")
    for f in c.functions:
        if lines[-1] != f"contract {c.name} {{":
            lines.append("")
        params = ", ".join(f"{p.name}: {type_to_str(p.type)}" for p in f.params)
        ret = f" -> {type_to_str(f.return_type)}" if f.return_type else ""
        lines.append(f"{INDENT}{f.kind} fn {f.name}({params}){ret} {{")
        for s in f.body:
            lines += stmt_lines(s, 2)
        lines.append(f"{INDENT}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def property_to_str(p: A.TemporalProperty) -> str:
    return f"{p.form} {expr_to_str(p.pred)}"
