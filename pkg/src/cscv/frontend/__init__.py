"""MCL frontend: contracts, temporal properties and block snapshots."""

from __future__ import annotations

from . import ast
from .ast import ContractAST, FunctionDecl, TemporalProperty
from .checker import ContractChecker, PropertyChecker
from .parser import parse_contract_syntax, parse_property_syntax
from .printer import contract_to_str, expr_to_str, property_to_str
from .snapshot import BlockSnapshot, parse_snapshot, snapshot_to_json


def parse_contract(source: str | bytes) -> ContractAST:
    """Parse and validate MCL source.

    Raises MCLSyntaxError, ResolutionError, KindError or TypeCheckError.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    contract = parse_contract_syntax(source)
    ContractChecker(contract).check()
    return contract


def parse_property(source: str, contract: ContractAST) -> TemporalProperty:
    """Parse ``always <pred>`` (or ``eventually <pred>``) against ``contract``."""
    form, pred = parse_property_syntax(source)
    PropertyChecker(contract).check(pred)
    return TemporalProperty(form, pred, source.strip())


__all__ = [
    "BlockSnapshot",
    "ContractAST",
    "FunctionDecl",
    "TemporalProperty",
    "ast",
    "contract_to_str",
    "expr_to_str",
    "parse_contract",
    "parse_property",
    "parse_snapshot",
    "property_to_str",
    "snapshot_to_json",
]
