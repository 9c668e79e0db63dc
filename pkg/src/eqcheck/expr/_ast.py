"""Expression AST nodes and the canonical printer.

Node equality is structural and ignores source offsets, so
``parse(to_source(node)) == node`` holds for any tree the parser can produce.
Number literals are never negative; the parser wraps them in ``Neg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

CONSTANTS = {"pi": math.pi, "e": math.e}

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Const:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Coord:
    index: int
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    arg: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"
    pos: int = field(default=0, compare=False)


Node = Union[Num, Const, Coord, Neg, BinOp, Call]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _wrap(node: Node, floor: int) -> str:
    s = to_source(node)
    return f"({s})" if _prec(node) < floor else s


def to_source(node: Node) -> str:
    """Canonical text form with minimal parentheses."""
    if isinstance(node, Num):
        v = node.value
        if v == int(v) and abs(v) < 1e16:
            return str(int(v))
        return repr(v)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Coord):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, 4)
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    op = node.op
    if op in "+-":
        # left-associative: the right operand needs parens at equal precedence
        return f"{_wrap(node.left, 1)} {op} {_wrap(node.right, 2)}"
    if op in "*/":
        return f"{_wrap(node.left, 2)}{op}{_wrap(node.right, 3)}"
    return f"{_wrap(node.left, 5)}^{_wrap(node.right, 4)}"


def contains_coord(node: Node) -> bool:
    if isinstance(node, Coord):
        return True
    if isinstance(node, Neg):
        return contains_coord(node.arg)
    if isinstance(node, Call):
        return contains_coord(node.arg)
    if isinstance(node, BinOp):
        return contains_coord(node.left) or contains_coord(node.right)
    return False


def const_value(node: Node) -> float:
    """Evaluate a coordinate-free subtree (used for exponents)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -const_value(node.arg)
    if isinstance(node, Call):
        return getattr(math, node.fn)(const_value(node.arg))
    if isinstance(node, BinOp):
        x, y = const_value(node.left), const_value(node.right)
        if node.op == "+":
            return x + y
        if node.op == "-":
            return x - y
        if node.op == "*":
            return x * y
        if node.op == "/":
            return x / y
        return x ** y
    raise TypeError(f"not a constant node: {node!r}")
