"""Path-constraint solving: SMT-LIB2 subprocess backend and bounded enumeration."""

from .backend import SolverHandle, make_handle, solve, solve_many, solve_or_fallback
from .bounded import Sat, SolverResult, Unknown, Unsat, solve_bounded
from .smtlib import emit_smtlib
from .terms import (
    BOOL,
    FALSE,
    INT,
    TRUE,
    AddressSort,
    Const,
    Op,
    Sym,
    Term,
    addr,
    const,
    evaluate,
    mk,
    negate,
    symbols,
)

__all__ = [
    "BOOL",
    "FALSE",
    "INT",
    "TRUE",
    "AddressSort",
    "Const",
    "Op",
    "Sat",
    "SolverHandle",
    "SolverResult",
    "Sym",
    "Term",
    "Unknown",
    "Unsat",
    "addr",
    "const",
    "emit_smtlib",
    "evaluate",
    "make_handle",
    "mk",
    "negate",
    "solve",
    "solve_bounded",
    "solve_many",
    "solve_or_fallback",
    "symbols",
]
