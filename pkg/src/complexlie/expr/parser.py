"""Recursive-descent parser for the infix expression grammar.

Grammar (whitespace insignificant)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "i" | IDENT | IDENT "(" expr ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus.
"""

from __future__ import annotations

import re
from typing import Iterable

from .errors import ExprSyntaxError, UnknownFunction, UnknownSymbol
from .nodes import BUILTINS, COMPLEX_ALPHABET, I, Expr, add, apply, const, div, mul, neg, power, var

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[a-zA-Z][a-zA-Z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str, alphabet: frozenset[str]):
        self.text = text
        self.alphabet = alphabet
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, ("number", "identifier", "operator"))
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", pos, (repr(op),))

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos, ("operator", "end of input"))
        return e

    def expr(self) -> Expr:
        left = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                right = self.term()
                left = add(left, right) if val == "+" else add(left, neg(right))
            else:
                return left

    def term(self) -> Expr:
        left = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                right = self.unary()
                left = mul(left, right) if val == "*" else div(left, right)
            else:
                return left

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            operand = self.unary()
            return neg(operand) if val == "-" else operand
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return power(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return const(float(val) if any(ch in val for ch in ".eE") else int(val))
        if kind == "ident":
            nxt_kind, nxt_val, _ = self.peek()
            if nxt_kind == "op" and nxt_val == "(":
                if val not in BUILTINS:
                    raise UnknownFunction(val, pos)
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return apply(val, arg)
            if val == "i":
                return I
            if val in BUILTINS:
                raise ExprSyntaxError(f"function {val!r} needs an argument", pos, ("'('",))
            if val not in self.alphabet:
                raise UnknownSymbol(val, pos)
            return var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(
            f"unexpected {val or 'end of input'!r}", pos, ("number", "identifier", "'('", "'-'")
        )


def parse(text: str, alphabet: Iterable[str] = COMPLEX_ALPHABET) -> Expr:
    """Parse ``text`` into a canonical tree; identifiers must be in ``alphabet``."""
    return _Parser(text, frozenset(alphabet)).parse()
