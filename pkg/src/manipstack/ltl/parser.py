"""Recursive-descent parser for the ASCII formula grammar.

Grammar (loosest to tightest binding):

    formula := or_expr ('U' formula)?          # until, right-assoc
    or_expr := and_expr ('|' and_expr)*
    and_expr := unary ('&' unary)*
    unary   := ('F' | 'G') unary | atom | '(' formula ')'
    atom    := 'grasp' '(' int ')' | 'release' '(' int ',' int ')'

Guards on automaton transitions use the same grammar restricted to
atoms/`&`/`|`/`true`.  `!` and `X` are rejected with dedicated errors.
"""

from __future__ import annotations

import re

from ..errors import LtlSyntaxError, NegationExcluded, NextExcluded
from .ast import And, Atom, Always, Eventually, Formula, Or, Predicate, Top, Until

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<int>\d+)|(?P<sym>[()&|,!])|(?P<bad>\S))"
)

_KEYWORDS = {"F", "G", "U", "X", "grasp", "release", "true"}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        self._scan()
        self.idx = 0

    def _scan(self):
        pos = 0
        while pos < len(self.text):
            m = _TOKEN_RE.match(self.text, pos)
            if m is None:
                break
            if m.group("bad"):
                raise LtlSyntaxError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
            if m.group("name"):
                self.tokens.append(("name", m.group("name"), m.start("name")))
            elif m.group("int"):
                self.tokens.append(("int", m.group("int"), m.start("int")))
            else:
                self.tokens.append(("sym", m.group("sym"), m.start("sym")))
            pos = m.end()

    def peek(self):
        if self.idx < len(self.tokens):
            return self.tokens[self.idx]
        return ("eof", "", len(self.text))

    def next(self):
        tok = self.peek()
        self.idx += 1
        return tok

    def expect_sym(self, sym: str):
        kind, val, pos = self.next()
        if kind != "sym" or val != sym:
            raise LtlSyntaxError(f"expected {sym!r}, found {val or 'end of input'!r}", pos)


def _parse_atom(tk: _Tokenizer, allow_true: bool) -> Formula:
    kind, val, pos = tk.next()
    if kind == "sym" and val == "(":
        raise AssertionError("caller handles parentheses")
    if kind != "name":
        raise LtlSyntaxError(f"expected predicate, found {val or 'end of input'!r}", pos)
    if val == "true":
        if allow_true:
            return Top()
        raise LtlSyntaxError("`true` is only valid in transition guards", pos)
    if val == "grasp":
        tk.expect_sym("(")
        k, v, p = tk.next()
        if k != "int":
            raise LtlSyntaxError("grasp(i) needs an integer object index", p)
        tk.expect_sym(")")
        return Atom(Predicate("grasp", int(v)))
    if val == "release":
        tk.expect_sym("(")
        k, v, p = tk.next()
        if k != "int":
            raise LtlSyntaxError("release(i,j) needs integer indices", p)
        tk.expect_sym(",")
        k2, v2, p2 = tk.next()
        if k2 != "int":
            raise LtlSyntaxError("release(i,j) needs integer indices", p2)
        tk.expect_sym(")")
        return Atom(Predicate("release", int(v), int(v2)))
    raise LtlSyntaxError(f"unknown predicate {val!r}", pos)


def _parse_unary(tk: _Tokenizer, temporal: bool, allow_true: bool) -> Formula:
    kind, val, pos = tk.peek()
    if kind == "sym" and val == "!":
        raise NegationExcluded("negation operator `!` is excluded from the fragment", pos)
    if kind == "name" and val == "X":
        raise NextExcluded("next operator `X` is excluded from the fragment", pos)
    if kind == "name" and val in ("F", "G"):
        if not temporal:
            raise LtlSyntaxError(f"temporal operator {val!r} not allowed in a guard", pos)
        tk.next()
        sub = _parse_unary(tk, temporal, allow_true)
        return Eventually(sub) if val == "F" else Always(sub)
    if kind == "sym" and val == "(":
        tk.next()
        inner = _parse_formula(tk, temporal, allow_true)
        tk.expect_sym(")")
        return inner
    return _parse_atom(tk, allow_true)


def _parse_and(tk: _Tokenizer, temporal: bool, allow_true: bool) -> Formula:
    left = _parse_unary(tk, temporal, allow_true)
    while True:
        kind, val, _ = tk.peek()
        if kind == "sym" and val == "&":
            tk.next()
            left = And(left, _parse_unary(tk, temporal, allow_true))
        else:
            return left


def _parse_or(tk: _Tokenizer, temporal: bool, allow_true: bool) -> Formula:
    left = _parse_and(tk, temporal, allow_true)
    while True:
        kind, val, _ = tk.peek()
        if kind == "sym" and val == "|":
            tk.next()
            left = Or(left, _parse_and(tk, temporal, allow_true))
        else:
            return left


def _parse_formula(tk: _Tokenizer, temporal: bool, allow_true: bool) -> Formula:
    left = _parse_or(tk, temporal, allow_true)
    kind, val, pos = tk.peek()
    if kind == "name" and val == "U":
        if not temporal:
            raise LtlSyntaxError("`U` not allowed in a guard", pos)
        tk.next()
        right = _parse_formula(tk, temporal, allow_true)
        return Until(left, right)
    return left


def parse_formula(text: str) -> Formula:
    """Parse an LTL mission formula; rejects `!`, `X` and bare `true`."""
    tk = _Tokenizer(text)
    f = _parse_formula(tk, temporal=True, allow_true=False)
    kind, val, pos = tk.peek()
    if kind != "eof":
        raise LtlSyntaxError(f"trailing input {val!r}", pos)
    return f


def parse_guard(text: str) -> Formula:
    """Parse a transition guard: atoms, `&`, `|`, `true`, parentheses."""
    tk = _Tokenizer(text)
    f = _parse_formula(tk, temporal=False, allow_true=True)
    kind, val, pos = tk.peek()
    if kind != "eof":
        raise LtlSyntaxError(f"trailing input {val!r}", pos)
    return f


def print_formula(f: Formula) -> str:
    """Round-trippable text form: parse(print_formula(f)) == f."""
    return _pp(f)


def _pp(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Atom):
        return str(f.pred)
    if isinstance(f, Eventually):
        return f"F {_pp_tight(f.sub)}"
    if isinstance(f, Always):
        return f"G {_pp_tight(f.sub)}"
    if isinstance(f, And):
        return f"{_pp_tight(f.left)} & {_pp_tight(f.right)}"
    if isinstance(f, Or):
        return f"{_pp_tight(f.left)} | {_pp_tight(f.right)}"
    if isinstance(f, Until):
        return f"{_pp_tight(f.left)} U {_pp_tight(f.right)}"
    raise TypeError(f"unknown node {f!r}")


def _pp_tight(f: Formula) -> str:
    # Parenthesize every compound child: unambiguous regardless of precedence.
    if isinstance(f, (Atom, Top)):
        return _pp(f)
    return f"({_pp(f)})"
