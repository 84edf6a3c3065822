"""Restricted LTL fragment: AST, parser, Büchi translation, word oracle."""

from .ast import (
    And,
    Atom,
    Always,
    EMPTY_SYMBOL,
    Eventually,
    Formula,
    Or,
    Predicate,
    Symbol,
    Top,
    TRUE,
    Until,
    atoms_of,
    contains_always,
    format_symbol,
    guard_satisfied,
    symbol_key,
)
from .nba import Nba, accepts_lasso, export_nba, import_nba, import_nba_file
from .parser import parse_formula, parse_guard, print_formula
from .translate import translate_to_nba

__all__ = [
    "And",
    "Atom",
    "Always",
    "EMPTY_SYMBOL",
    "Eventually",
    "Formula",
    "Or",
    "Predicate",
    "Symbol",
    "Top",
    "TRUE",
    "Until",
    "Nba",
    "accepts_lasso",
    "atoms_of",
    "contains_always",
    "export_nba",
    "format_symbol",
    "guard_satisfied",
    "import_nba",
    "import_nba_file",
    "parse_formula",
    "parse_guard",
    "print_formula",
    "symbol_key",
    "translate_to_nba",
]
