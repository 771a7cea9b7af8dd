"""SMT-LIB2 lowering and response parsing."""

from __future__ import annotations

from .terms import BOOL, AddressSort, Const, Op, Sym, Term, address_constants, symbols

_OPS = {
    "+": "+",
    "-": "-",
    "*": "*",
    "<": "<",
    "<=": "<=",
    ">": ">",
    ">=": ">=",
    "==": "=",
    "and": "and",
    "or": "or",
    "=>": "=>",
    "not": "not",
    "ite": "ite",
}


def address_table(terms: list[Term]) -> list[str]:
    """Index assignment for addresses: symbol domains first, then stray literals."""
    table: dict[str, None] = {}
    for s in symbols(terms):
        if isinstance(s.sort, AddressSort):
            for a in s.sort.domain:
                table.setdefault(a, None)
    for a in address_constants(terms):
        table.setdefault(a, None)
    return list(table)


def _int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def lower(t: Term, index: dict[str, int]) -> str:
    if isinstance(t, Const):
        if t.sort == BOOL:
            return "true" if t.value else "false"
        if isinstance(t.sort, AddressSort):
            return str(index[t.value])
        return _int(t.value)
    if isinstance(t, Sym):
        return t.name
    args = [lower(a, index) for a in t.args]
    if t.op == "neg":
        return f"(- {args[0]})"
    if t.op == "!=":
        return f"(not (= {args[0]} {args[1]}))"
    if t.op == "div":
        a, b = args
        # floor division; x/0 is 0 to match the term semantics
        return f"(ite (= {b} 0) 0 (ite (> {b} 0) (div {a} {b}) (div (- {a}) (- {b}))))"
    if t.op == "mod":
        a, b = args
        return f"(ite (= {b} 0) {a} (mod {a} {b}))"
    return f"({_OPS[t.op]} {' '.join(args)})"


def quote_symbol(name: str) -> str:
    if all(c.isalnum() or c in "_.@$" for c in name) and not name[0].isdigit():
        return name
    return f"|{name}|"


def emit_smtlib(terms: list[Term]) -> str:
    table = address_table(terms)
    index = {a: i for i, a in enumerate(table)}
    lines = ["(set-logic QF_NIA)"]
    syms = symbols(terms)
    for s in syms:
        smt_sort = "Bool" if s.sort == BOOL else "Int"
        lines.append(f"(declare-const {quote_symbol(s.name)} {smt_sort})")
    for s in syms:
        if isinstance(s.sort, AddressSort):
            name = quote_symbol(s.name)
            options = " ".join(f"(= {name} {index[a]})" for a in s.sort.domain)
            lines.append(f"(assert (or {options}))" if len(s.sort.domain) > 1 else f"(assert {options})")
    renamed = {s.name: quote_symbol(s.name) for s in syms}
    for t in terms:
        text = lower(_rename(t, renamed), index)
        lines.append(f"(assert {text})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def _rename(t: Term, names: dict[str, str]) -> Term:
    if isinstance(t, Sym):
        return Sym(names[t.name], t.sort)
    if isinstance(t, Op):
        return Op(t.op, tuple(_rename(a, names) for a in t.args))
    return t


def tokenize_sexpr(text: str) -> list[str]:
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            tokens.append(text[i : j + 1])
            i = j + 1
        elif c == "|":
            j = text.index("|", i + 1)
            tokens.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def parse_sexprs(text: str) -> list:
    """Parse a sequence of S-expressions into nested lists of atoms."""
    tokens = tokenize_sexpr(text)
    out: list = []
    stack: list[list] = []
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise ValueError("unbalanced ')' in solver output")
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(tok)
    if stack:
        raise ValueError("unterminated S-expression in solver output")
    return out


def _value(sx) -> int | bool:
    if sx == "true":
        return True
    if sx == "false":
        return False
    if isinstance(sx, str):
        return int(sx)
    if sx[0] == "-" and len(sx) == 2:
        return -_value(sx[1])
    raise ValueError(f"unsupported model value {sx!r}")


def parse_model(sx) -> dict[str, int | bool]:
    """Read ``((define-fun x () Int 6) ...)``; tolerates a leading ``model`` atom."""
    items = sx[1:] if sx and sx[0] == "model" else sx
    model: dict[str, int | bool] = {}
    for item in items:
        if isinstance(item, list) and item and item[0] == "define-fun" and item[2] == []:
            name = item[1]
            if name.startswith("|") and name.endswith("|"):
                name = name[1:-1]
            model[name] = _value(item[4])
    return model
