"""Tokenizer and recursive-descent parser for scalar expressions.

Grammar (structure first, names resolved in a second pass so syntax errors
win over unknown identifiers):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := number | ident | '(' expr ')' | ident '(' expr (',' expr)* ')'

'^' is right-associative and binds tightest, then unary minus, then '*'/'/',
then '+'/'-'; so -x^2 parses as -(x^2). Exponents must be constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .. import errors
from ._ast import CONSTANTS, FUNCTIONS, BinOp, Call, Const, Coord, Neg, Node, Num, contains_coord

_NUM_RE = re.compile(r"[0-9]+(?:\.[0-9]*)?(?:[eE][+-]?[0-9]+)?|\.[0-9]+(?:[eE][+-]?[0-9]+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPS = "+-*/^(),"


@dataclass(frozen=True)
class _RawIdent:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class _RawCall:
    name: str
    args: tuple
    pos: int = field(default=0, compare=False)


def _tokenize(src: str):
    toks = []
    i, size = 0, len(src)
    while i < size:
        ch = src[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in _OPS:
            toks.append((ch, ch, i))
            i += 1
            continue
        m = _NUM_RE.match(src, i)
        if m:
            toks.append(("num", m.group(), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(src, i)
        if m:
            toks.append(("ident", m.group(), i))
            i = m.end()
            continue
        raise errors.ExprSyntaxError(f"unexpected character {ch!r}", i)
    toks.append(("eof", "", size))
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.toks[self.i]
        if tok[0] != kind:
            raise errors.ExprSyntaxError(f"expected {kind!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise errors.ExprSyntaxError("unexpected trailing input", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op, _, pos = self.advance()
            node = BinOp(op, node, self.term(), pos=pos)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.advance()
            node = BinOp(op, node, self.factor(), pos=pos)
        return node

    def factor(self):
        tok = self.peek()
        if tok[0] == "-":
            self.advance()
            return Neg(self.factor(), pos=tok[2])
        node = self.base()
        tok = self.peek()
        if tok[0] == "^":
            self.advance()
            return BinOp("^", node, self.factor(), pos=tok[2])
        return node

    def base(self):
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text), pos=pos)
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            if self.peek()[0] == "(":
                self.advance()
                args = [self.expr()]
                while self.peek()[0] == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                return _RawCall(text, tuple(args), pos=pos)
            return _RawIdent(text, pos=pos)
        raise errors.ExprSyntaxError("expected a number, name or '('", pos)


def _resolve(node, coords: dict) -> Node:
    if isinstance(node, Num):
        return node
    if isinstance(node, _RawIdent):
        if node.name in coords:
            return Coord(coords[node.name], node.name, pos=node.pos)
        if node.name in CONSTANTS:
            return Const(node.name, pos=node.pos)
        raise errors.UnknownIdentifierError(node.name, node.pos)
    if isinstance(node, _RawCall):
        if node.name not in FUNCTIONS:
            raise errors.UnknownIdentifierError(node.name, node.pos)
        if len(node.args) != 1:
            raise errors.ArityError(node.name, len(node.args), node.pos)
        return Call(node.name, _resolve(node.args[0], coords), pos=node.pos)
    if isinstance(node, Neg):
        return Neg(_resolve(node.arg, coords), pos=node.pos)
    if isinstance(node, BinOp):
        left = _resolve(node.left, coords)
        right = _resolve(node.right, coords)
        if node.op == "^" and contains_coord(right):
            raise errors.NonConstantExponentError(node.pos)
        return BinOp(node.op, left, right, pos=node.pos)
    raise TypeError(f"unexpected node {node!r}")


def parse_source(source: str, coordinates: Sequence[str]) -> Node:
    """Parse ``source`` against the given coordinate names, returning the AST root."""
    coords = {name: k for k, name in enumerate(coordinates)}
    raw = _Parser(_tokenize(source)).parse()
    return _resolve(raw, coords)
