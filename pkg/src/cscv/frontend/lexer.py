from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import MCLSyntaxError

KEYWORDS = frozenset(
    {
        "contract", "state", "int", "bool", "address", "map", "external", "view", "fn",
        "require", "call", "if", "else", "return", "true", "false", "pragma", "msg",
    }
)

ADDRESS_RE = re.compile(r"0x[0-9A-Fa-f]{1,8}")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<address>0[xX][0-9A-Za-z_]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|==|!=|<=|>=|&&|\|\||[{}()\[\];:,=<>+\-*/!.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "int", "address", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise MCLSyntaxError(line, col, "a token", source[pos])
        kind = m.lastgroup
        text = m.group()
        if kind == "address":
            if not ADDRESS_RE.fullmatch(text):
                raise MCLSyntaxError(line, col, "an address 0x followed by 1-8 hex digits", text)
            tokens.append(Token("address", text, line, col))
        elif kind == "int":
            tokens.append(Token("int", text, line, col))
        elif kind == "ident":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind == "op":
            tokens.append(Token("op", text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens
