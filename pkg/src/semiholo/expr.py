"""A small expression language over codebook names.

Grammar::

    expr    := term ('+' term)*
    term    := factor ('*' factor)*
    factor  := NAME | 'inv' '(' NAME ')' | '(' expr ')'

``*`` (binding) binds tighter than ``+`` (superposition); both are
left-associative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .algebra import Chain, bind, inverse, superpose
from .memory import Codebook

__all__ = ["ExpressionError", "Name", "Inv", "BinOp", "Expr", "parse", "to_source", "evaluate"]


class ExpressionError(ValueError):
    """Syntax error; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Inv:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Name, Inv, BinOp]

PRECEDENCE = {"+": 1, "*": 2}
_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_.\-]*)|(?P<op>[+*()]))")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m:
            col = pos + len(src[pos:]) - len(src[pos:].lstrip()) + 1
            raise ExpressionError(f"unexpected character {src[col - 1]!r}", col)
        kind = "name" if m.group("name") else "op"
        text = m.group(kind)
        tokens.append((kind, text, m.start(kind) + 1))
        pos = m.end()
    tokens.append(("end", "", len(src) + 1))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, t, col = self.advance()
        if t != text or kind == "end":
            found = "end of input" if kind == "end" else repr(t)
            raise ExpressionError(f"expected {text!r}, found {found}", col)

    def expr(self, min_prec: int = 1) -> Expr:
        left = self.factor()
        while True:
            kind, t, _ = self.peek()
            if kind != "op" or t not in PRECEDENCE or PRECEDENCE[t] < min_prec:
                return left
            self.advance()
            right = self.expr(PRECEDENCE[t] + 1)
            left = BinOp(t, left, right)

    def factor(self) -> Expr:
        kind, t, col = self.advance()
        if kind == "name":
            if t == "inv" and self.peek()[1] == "(":
                self.advance()
                kind2, name, col2 = self.advance()
                if kind2 != "name":
                    raise ExpressionError("inv() takes a single name", col2)
                self.expect(")")
                return Inv(name)
            return Name(t)
        if t == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(t)
        raise ExpressionError(f"expected a name, 'inv(' or '(', found {found}", col)


def parse(src: str) -> Expr:
    p = _Parser(src)
    tree = p.expr()
    kind, t, col = p.peek()
    if kind != "end":
        raise ExpressionError(f"unexpected {t!r}", col)
    return tree


def to_source(e: Expr) -> str:
    """Render with the fewest parentheses that :func:`parse` reads back identically."""
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Inv):
        return f"inv({e.name})"
    prec = PRECEDENCE[e.op]
    left = to_source(e.left)
    right = to_source(e.right)
    if isinstance(e.left, BinOp) and PRECEDENCE[e.left.op] < prec:
        left = f"({left})"
    if isinstance(e.right, BinOp) and PRECEDENCE[e.right.op] <= prec:
        right = f"({right})"
    sep = " + " if e.op == "+" else "*"
    return f"{left}{sep}{right}"


def evaluate(e: Expr | str, cb: Codebook) -> Chain:
    """Evaluate against a codebook; names become rank-1 chains."""
    if isinstance(e, str):
        e = parse(e)
    if isinstance(e, Name):
        return cb.chain(e.name)
    if isinstance(e, Inv):
        return Chain(cb.params, (inverse(cb[e.name]),))
    left = evaluate(e.left, cb)
    right = evaluate(e.right, cb)
    if e.op == "+":
        return superpose(left, right)
    return bind(left, right)
