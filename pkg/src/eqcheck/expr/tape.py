"""Flattening of expression trees to linear instruction tapes.

Each instruction writes one fresh slot (single assignment), so evaluation
buffers are indexed by instruction number and the root lands in the last slot.
Division compiles to RECIP + MUL; '^' folds its constant exponent into the
instruction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _ast
from ._ast import BinOp, Call, Const, Coord, Neg, Num

OP_CONST = 0
OP_COORD = 1
OP_NEG = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_RECIP = 6
OP_POW = 7
FN_BASE = 8
FN_OPS = {name: FN_BASE + k for k, name in enumerate(_ast.FUNCTIONS)}


@dataclass(frozen=True)
class Tape:
    ops: np.ndarray
    arg0: np.ndarray
    arg1: np.ndarray
    aux: np.ndarray  # constant value, or exponent for OP_POW
    flag: np.ndarray  # OP_POW: 1 when the exponent is integer-valued
    pos: np.ndarray  # source byte offsets for error reporting
    size: int


def compile_tape(root) -> Tape:
    ops, a0, a1, aux, flag, pos = [], [], [], [], [], []

    def emit(op, x=-1, y=-1, av=0.0, fl=0, p=0):
        ops.append(op)
        a0.append(x)
        a1.append(y)
        aux.append(av)
        flag.append(fl)
        pos.append(p)
        return len(ops) - 1

    def walk(node):
        if isinstance(node, Num):
            return emit(OP_CONST, av=node.value, p=node.pos)
        if isinstance(node, Const):
            return emit(OP_CONST, av=_ast.CONSTANTS[node.name], p=node.pos)
        if isinstance(node, Coord):
            return emit(OP_COORD, x=node.index, p=node.pos)
        if isinstance(node, Neg):
            return emit(OP_NEG, x=walk(node.arg), p=node.pos)
        if isinstance(node, Call):
            return emit(FN_OPS[node.fn], x=walk(node.arg), p=node.pos)
        if node.op == "^":
            expo = float(_ast.const_value(node.right))
            isint = 1 if expo == int(expo) else 0
            return emit(OP_POW, x=walk(node.left), av=expo, fl=isint, p=node.pos)
        left = walk(node.left)
        if node.op == "/":
            rec = emit(OP_RECIP, x=walk(node.right), p=node.pos)
            return emit(OP_MUL, x=left, y=rec, p=node.pos)
        code = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL}[node.op]
        return emit(code, x=left, y=walk(node.right), p=node.pos)

    walk(root)
    return Tape(
        np.asarray(ops, np.int64),
        np.asarray(a0, np.int64),
        np.asarray(a1, np.int64),
        np.asarray(aux, np.float64),
        np.asarray(flag, np.int64),
        np.asarray(pos, np.int64),
        len(ops),
    )
