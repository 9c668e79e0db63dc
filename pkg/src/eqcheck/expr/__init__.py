"""Scalar expressions over a coordinate chart: parsing, printing, order-3 jets."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ._ast import CONSTANTS, FUNCTIONS, BinOp, Call, Const, Coord, Neg, Node, Num, to_source
from .kernels import Jet3, eval_jet, eval_value
from .parser import parse_source
from .tape import compile_tape

__all__ = [
    "BinOp",
    "Call",
    "CONSTANTS",
    "Const",
    "Coord",
    "FUNCTIONS",
    "Jet3",
    "Neg",
    "Node",
    "Num",
    "ScalarExpr",
    "parse_expr",
    "to_source",
]


@dataclass(frozen=True)
class ScalarExpr:
    """A parsed scalar expression bound to an ordered coordinate list."""

    root: Node
    coordinates: tuple
    source: str = field(compare=False)

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @cached_property
    def _tape(self):
        return compile_tape(self.root)

    def jet(self, point) -> Jet3:
        """Order-3 jet (value, gradient, Hessian, third derivatives) at ``point``."""
        return eval_jet(self._tape, np.asarray(point, dtype=np.float64))

    def value(self, point) -> float:
        return eval_value(self.root, np.asarray(point, dtype=np.float64))

    def canonical_source(self) -> str:
        return to_source(self.root)


def parse_expr(source: str, coordinates: Sequence[str]) -> ScalarExpr:
    """Parse ``source`` against ``coordinates`` (ordered chart names)."""
    root = parse_source(source, coordinates)
    return ScalarExpr(root=root, coordinates=tuple(coordinates), source=source)


def const_expr(value: float, coordinates: Sequence[str]) -> ScalarExpr:
    """Wrap a plain number as an expression (used for omitted tensor entries)."""
    if value < 0:
        root: Node = Neg(Num(-float(value)))
    else:
        root = Num(float(value))
    return ScalarExpr(root=root, coordinates=tuple(coordinates), source=to_source(root))
