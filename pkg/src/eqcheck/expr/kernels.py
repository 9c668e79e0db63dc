"""Order-3 jet evaluation over instruction tapes.

A jet carries (value, gradient, Hessian, third-order array). Derivative
arrays are totally symmetric and stored fully: each canonical entry
(i <= j <= k) is computed once and mirrored, so symmetry holds bit-for-bit.

Two backends: numba-compiled loops (default) and a vectorized numpy path
(EQCHECK_NO_NUMBA=1). Identical input bits give identical output bits within
one backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import errors
from .._accel import NUMBA_ENABLED, njit
from . import _ast
from ._ast import BinOp, Call, Const, Coord, Neg, Num
from .tape import (
    FN_BASE,
    OP_ADD,
    OP_CONST,
    OP_COORD,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_RECIP,
    OP_SUB,
    Tape,
)

ERR_DIV0 = 1
ERR_LOG = 2
ERR_SQRT = 3
ERR_POW = 4

_ERR_MSG = {
    ERR_DIV0: "division by zero",
    ERR_LOG: "log of a non-positive value",
    ERR_SQRT: "sqrt of a non-positive value",
    ERR_POW: "power outside its domain",
}


@dataclass(frozen=True)
class Jet3:
    """Truncated series at a point: value, grad[i], hess[i,j], third[i,j,k]."""

    value: float
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray

    @property
    def n(self) -> int:
        return self.grad.shape[0]


# ---------------------------------------------------------------------------
# numba backend


@njit(cache=True, nogil=True)
def _chain_nb(s, a, f0, f1, f2, f3, val, grad, hess, third, n):
    # compose an outer univariate function with jet slot a
    val[s] = f0
    for i in range(n):
        grad[s, i] = f1 * grad[a, i]
    for i in range(n):
        for j in range(i, n):
            h = f2 * grad[a, i] * grad[a, j] + f1 * hess[a, i, j]
            hess[s, i, j] = h
            hess[s, j, i] = h
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                t = (
                    f3 * grad[a, i] * grad[a, j] * grad[a, k]
                    + f2
                    * (
                        hess[a, i, j] * grad[a, k]
                        + hess[a, i, k] * grad[a, j]
                        + hess[a, j, k] * grad[a, i]
                    )
                    + f1 * third[a, i, j, k]
                )
                third[s, i, j, k] = t
                third[s, i, k, j] = t
                third[s, j, i, k] = t
                third[s, j, k, i] = t
                third[s, k, i, j] = t
                third[s, k, j, i] = t


@njit(cache=True, nogil=True)
def _pow_term_nb(u, e, coef):
    # coef * u**e; a zero coefficient silences invalid powers
    if coef == 0.0:
        return 0.0, True
    if u == 0.0:
        if e > 0.0:
            return 0.0, True
        if e == 0.0:
            return coef, True
        return 0.0, False
    return coef * u ** e, True


@njit(cache=True, nogil=True)
def _eval_tape_nb(ops, arg0, arg1, aux, flag, point, val, grad, hess, third):
    n = point.shape[0]
    m = ops.shape[0]
    for s in range(m):
        op = ops[s]
        a = arg0[s]
        b = arg1[s]
        if op == 0:  # CONST
            val[s] = aux[s]
        elif op == 1:  # COORD
            val[s] = point[a]
            grad[s, a] = 1.0
        elif op == 2:  # NEG
            val[s] = -val[a]
            for i in range(n):
                grad[s, i] = -grad[a, i]
                for j in range(n):
                    hess[s, i, j] = -hess[a, i, j]
                    for k in range(n):
                        third[s, i, j, k] = -third[a, i, j, k]
        elif op == 3 or op == 4:  # ADD / SUB
            sg = 1.0 if op == 3 else -1.0
            val[s] = val[a] + sg * val[b]
            for i in range(n):
                grad[s, i] = grad[a, i] + sg * grad[b, i]
                for j in range(n):
                    hess[s, i, j] = hess[a, i, j] + sg * hess[b, i, j]
                    for k in range(n):
                        third[s, i, j, k] = third[a, i, j, k] + sg * third[b, i, j, k]
        elif op == 5:  # MUL
            f0 = val[a]
            g0 = val[b]
            val[s] = f0 * g0
            for i in range(n):
                grad[s, i] = grad[a, i] * g0 + f0 * grad[b, i]
            for i in range(n):
                for j in range(i, n):
                    h = (
                        hess[a, i, j] * g0
                        + f0 * hess[b, i, j]
                        + grad[a, i] * grad[b, j]
                        + grad[a, j] * grad[b, i]
                    )
                    hess[s, i, j] = h
                    hess[s, j, i] = h
            for i in range(n):
                for j in range(i, n):
                    for k in range(j, n):
                        t = (
                            third[a, i, j, k] * g0
                            + f0 * third[b, i, j, k]
                            + hess[a, i, j] * grad[b, k]
                            + hess[a, i, k] * grad[b, j]
                            + hess[a, j, k] * grad[b, i]
                            + hess[b, i, j] * grad[a, k]
                            + hess[b, i, k] * grad[a, j]
                            + hess[b, j, k] * grad[a, i]
                        )
                        third[s, i, j, k] = t
                        third[s, i, k, j] = t
                        third[s, j, i, k] = t
                        third[s, j, k, i] = t
                        third[s, k, i, j] = t
                        third[s, k, j, i] = t
        elif op == 6:  # RECIP
            u = val[a]
            if u == 0.0:
                return ERR_DIV0, s
            r = 1.0 / u
            _chain_nb(s, a, r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r, val, grad, hess, third, n)
        elif op == 7:  # POW, constant exponent
            u = val[a]
            c = aux[s]
            if flag[s] == 0 and u <= 0.0:
                return ERR_POW, s
            c1 = c
            c2 = c * (c - 1.0)
            c3 = c * (c - 1.0) * (c - 2.0)
            f0, ok0 = _pow_term_nb(u, c, 1.0)
            f1, ok1 = _pow_term_nb(u, c - 1.0, c1)
            f2, ok2 = _pow_term_nb(u, c - 2.0, c2)
            f3, ok3 = _pow_term_nb(u, c - 3.0, c3)
            if not (ok0 and ok1 and ok2 and ok3):
                return ERR_POW, s
            _chain_nb(s, a, f0, f1, f2, f3, val, grad, hess, third, n)
        else:
            u = val[a]
            if op == 8:  # sin
                sn = math.sin(u)
                cs = math.cos(u)
                _chain_nb(s, a, sn, cs, -sn, -cs, val, grad, hess, third, n)
            elif op == 9:  # cos
                sn = math.sin(u)
                cs = math.cos(u)
                _chain_nb(s, a, cs, -sn, -cs, sn, val, grad, hess, third, n)
            elif op == 10:  # tan
                t = math.tan(u)
                d = 1.0 + t * t
                _chain_nb(s, a, t, d, 2.0 * t * d, d * (2.0 + 6.0 * t * t), val, grad, hess, third, n)
            elif op == 11:  # exp
                ex = math.exp(u)
                _chain_nb(s, a, ex, ex, ex, ex, val, grad, hess, third, n)
            elif op == 12:  # log
                if u <= 0.0:
                    return ERR_LOG, s
                r = 1.0 / u
                _chain_nb(s, a, math.log(u), r, -r * r, 2.0 * r * r * r, val, grad, hess, third, n)
            elif op == 13:  # sqrt
                if u <= 0.0:
                    return ERR_SQRT, s
                rt = math.sqrt(u)
                f1 = 0.5 / rt
                f2 = -0.25 / (u * rt)
                f3 = 0.375 / (u * u * rt)
                _chain_nb(s, a, rt, f1, f2, f3, val, grad, hess, third, n)
            elif op == 14:  # sinh
                sh = math.sinh(u)
                ch = math.cosh(u)
                _chain_nb(s, a, sh, ch, sh, ch, val, grad, hess, third, n)
            elif op == 15:  # cosh
                sh = math.sinh(u)
                ch = math.cosh(u)
                _chain_nb(s, a, ch, sh, ch, sh, val, grad, hess, third, n)
            else:  # tanh
                t = math.tanh(u)
                d = 1.0 - t * t
                _chain_nb(s, a, t, d, -2.0 * t * d, d * (6.0 * t * t - 2.0), val, grad, hess, third, n)
    return 0, -1


# ---------------------------------------------------------------------------
# numpy backend

_SYM_CACHE: dict = {}


def _sym_indices(n: int):
    # gather indices mapping every entry to its sorted-index representative
    if n not in _SYM_CACHE:
        pair = np.sort(np.indices((n, n)).reshape(2, -1), axis=0)
        trip = np.sort(np.indices((n, n, n)).reshape(3, -1), axis=0)
        _SYM_CACHE[n] = (
            pair[0].reshape(n, n),
            pair[1].reshape(n, n),
            trip[0].reshape(n, n, n),
            trip[1].reshape(n, n, n),
            trip[2].reshape(n, n, n),
        )
    return _SYM_CACHE[n]


def _chain_np(f0, f1, f2, f3, gu, hu, tu, sym):
    pi, pj, si, sj, sk = sym
    grad = f1 * gu
    hess = f2 * np.outer(gu, gu) + f1 * hu
    spread = (
        np.einsum("ij,k->ijk", hu, gu)
        + np.einsum("ik,j->ijk", hu, gu)
        + np.einsum("jk,i->ijk", hu, gu)
    )
    third = f3 * np.einsum("i,j,k->ijk", gu, gu, gu) + f2 * spread + f1 * tu
    return f0, grad, hess[pi, pj], third[si, sj, sk]


def _pow_term_np(u, e, coef):
    if coef == 0.0:
        return 0.0, True
    if u == 0.0:
        if e > 0.0:
            return 0.0, True
        if e == 0.0:
            return coef, True
        return 0.0, False
    return coef * u ** e, True


def _eval_tape_np(tape: Tape, point: np.ndarray, val, grad, hess, third):
    n = point.shape[0]
    sym = _sym_indices(n)
    pi, pj, si, sj, sk = sym
    ops, arg0, arg1, aux, flag = tape.ops, tape.arg0, tape.arg1, tape.aux, tape.flag
    for s in range(tape.size):
        op = int(ops[s])
        a = int(arg0[s])
        b = int(arg1[s])
        if op == OP_CONST:
            val[s] = aux[s]
        elif op == OP_COORD:
            val[s] = point[a]
            grad[s, a] = 1.0
        elif op == OP_NEG:
            val[s] = -val[a]
            grad[s] = -grad[a]
            hess[s] = -hess[a]
            third[s] = -third[a]
        elif op in (OP_ADD, OP_SUB):
            sg = 1.0 if op == OP_ADD else -1.0
            val[s] = val[a] + sg * val[b]
            grad[s] = grad[a] + sg * grad[b]
            hess[s] = hess[a] + sg * hess[b]
            third[s] = third[a] + sg * third[b]
        elif op == OP_MUL:
            f0, g0 = val[a], val[b]
            val[s] = f0 * g0
            grad[s] = grad[a] * g0 + f0 * grad[b]
            h = (
                hess[a] * g0
                + f0 * hess[b]
                + np.outer(grad[a], grad[b])
                + np.outer(grad[b], grad[a])
            )
            t = (
                third[a] * g0
                + f0 * third[b]
                + np.einsum("ij,k->ijk", hess[a], grad[b])
                + np.einsum("ik,j->ijk", hess[a], grad[b])
                + np.einsum("jk,i->ijk", hess[a], grad[b])
                + np.einsum("ij,k->ijk", hess[b], grad[a])
                + np.einsum("ik,j->ijk", hess[b], grad[a])
                + np.einsum("jk,i->ijk", hess[b], grad[a])
            )
            hess[s] = h[pi, pj]
            third[s] = t[si, sj, sk]
        elif op == OP_RECIP:
            u = val[a]
            if u == 0.0:
                return ERR_DIV0, s
            r = 1.0 / u
            val[s], grad[s], hess[s], third[s] = _chain_np(
                r, -r * r, 2.0 * r ** 3, -6.0 * r ** 4, grad[a], hess[a], third[a], sym
            )
        elif op == OP_POW:
            u = val[a]
            c = aux[s]
            if int(flag[s]) == 0 and u <= 0.0:
                return ERR_POW, s
            c1 = c
            c2 = c * (c - 1.0)
            c3 = c * (c - 1.0) * (c - 2.0)
            f0, ok0 = _pow_term_np(u, c, 1.0)
            f1, ok1 = _pow_term_np(u, c - 1.0, c1)
            f2, ok2 = _pow_term_np(u, c - 2.0, c2)
            f3, ok3 = _pow_term_np(u, c - 3.0, c3)
            if not (ok0 and ok1 and ok2 and ok3):
                return ERR_POW, s
            val[s], grad[s], hess[s], third[s] = _chain_np(
                f0, f1, f2, f3, grad[a], hess[a], third[a], sym
            )
        else:
            u = val[a]
            if op == FN_BASE:  # sin
                d = (math.sin(u), math.cos(u), -math.sin(u), -math.cos(u))
            elif op == FN_BASE + 1:  # cos
                d = (math.cos(u), -math.sin(u), -math.cos(u), math.sin(u))
            elif op == FN_BASE + 2:  # tan
                t0 = math.tan(u)
                dd = 1.0 + t0 * t0
                d = (t0, dd, 2.0 * t0 * dd, dd * (2.0 + 6.0 * t0 * t0))
            elif op == FN_BASE + 3:  # exp
                ex = math.exp(u)
                d = (ex, ex, ex, ex)
            elif op == FN_BASE + 4:  # log
                if u <= 0.0:
                    return ERR_LOG, s
                r = 1.0 / u
                d = (math.log(u), r, -r * r, 2.0 * r ** 3)
            elif op == FN_BASE + 5:  # sqrt
                if u <= 0.0:
                    return ERR_SQRT, s
                rt = math.sqrt(u)
                d = (rt, 0.5 / rt, -0.25 / (u * rt), 0.375 / (u * u * rt))
            elif op == FN_BASE + 6:  # sinh
                d = (math.sinh(u), math.cosh(u), math.sinh(u), math.cosh(u))
            elif op == FN_BASE + 7:  # cosh
                d = (math.cosh(u), math.sinh(u), math.cosh(u), math.sinh(u))
            else:  # tanh
                t0 = math.tanh(u)
                dd = 1.0 - t0 * t0
                d = (t0, dd, -2.0 * t0 * dd, dd * (6.0 * t0 * t0 - 2.0))
            val[s], grad[s], hess[s], third[s] = _chain_np(
                d[0], d[1], d[2], d[3], grad[a], hess[a], third[a], sym
            )
    return 0, -1


# ---------------------------------------------------------------------------
# public entry points


def eval_jet(tape: Tape, point: np.ndarray) -> Jet3:
    """Evaluate the tape's order-3 jet at ``point``."""
    point = np.ascontiguousarray(point, dtype=np.float64)
    n = point.shape[0]
    m = tape.size
    val = np.zeros(m)
    grad = np.zeros((m, n))
    hess = np.zeros((m, n, n))
    third = np.zeros((m, n, n, n))
    if NUMBA_ENABLED:
        err, idx = _eval_tape_nb(
            tape.ops, tape.arg0, tape.arg1, tape.aux, tape.flag, point, val, grad, hess, third
        )
    else:
        err, idx = _eval_tape_np(tape, point, val, grad, hess, third)
    if err:
        raise errors.EvalDomainError(_ERR_MSG[err], int(tape.pos[idx]))
    last = m - 1
    return Jet3(float(val[last]), grad[last].copy(), hess[last].copy(), third[last].copy())


def eval_value(node, point) -> float:
    """Value-only recursive evaluation (used by samplers and test oracles)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return _ast.CONSTANTS[node.name]
    if isinstance(node, Coord):
        return float(point[node.index])
    if isinstance(node, Neg):
        return -eval_value(node.arg, point)
    if isinstance(node, Call):
        u = eval_value(node.arg, point)
        if node.fn == "log" and u <= 0.0:
            raise errors.EvalDomainError(_ERR_MSG[ERR_LOG], node.pos)
        if node.fn == "sqrt" and u <= 0.0:
            raise errors.EvalDomainError(_ERR_MSG[ERR_SQRT], node.pos)
        return getattr(math, node.fn)(u)
    if node.op == "^":
        u = eval_value(node.left, point)
        c = _ast.const_value(node.right)
        if c != int(c) and u <= 0.0:
            raise errors.EvalDomainError(_ERR_MSG[ERR_POW], node.pos)
        if u == 0.0 and c < 0.0:
            raise errors.EvalDomainError(_ERR_MSG[ERR_POW], node.pos)
        return u ** c
    x = eval_value(node.left, point)
    y = eval_value(node.right, point)
    if node.op == "+":
        return x + y
    if node.op == "-":
        return x - y
    if node.op == "*":
        return x * y
    if y == 0.0:
        raise errors.EvalDomainError(_ERR_MSG[ERR_DIV0], node.pos)
    return x / y
