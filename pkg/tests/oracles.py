"""Independent finite-difference oracles used by the tests.

Everything here differentiates plain function *values* (never jets), with
Richardson extrapolation on central stencils, so engine derivatives are
checked against an implementation that shares no code with the jet kernels.
"""

from __future__ import annotations

import numpy as np

from eqcheck.expr.kernels import eval_value


def _grad_once(f, x, h):
    n = x.shape[0]
    g = np.empty(n)
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def _hess_once(f, x, h):
    n = x.shape[0]
    out = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                xp = x.copy()
                xm = x.copy()
                xp[i] += h
                xm[i] -= h
                v = (f(xp) - 2.0 * f0 + f(xm)) / (h * h)
            else:
                xpp = x.copy()
                xpm = x.copy()
                xmp = x.copy()
                xmm = x.copy()
                xpp[i] += h
                xpp[j] += h
                xpm[i] += h
                xpm[j] -= h
                xmp[i] -= h
                xmp[j] += h
                xmm[i] -= h
                xmm[j] -= h
                v = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h)
            out[i, j] = v
            out[j, i] = v
    return out


def _third_once(f, x, h):
    # central difference of the Hessian stencil along each direction
    n = x.shape[0]
    out = np.empty((n, n, n))
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        d = (_hess_once(f, xp, h) - _hess_once(f, xm, h)) / (2.0 * h)
        out[i] = d
    # symmetrize: the truth is totally symmetric, the stencil is not quite
    return (
        out
        + np.transpose(out, (0, 2, 1))
        + np.transpose(out, (1, 0, 2))
        + np.transpose(out, (1, 2, 0))
        + np.transpose(out, (2, 0, 1))
        + np.transpose(out, (2, 1, 0))
    ) / 6.0


def _richardson(coarse, fine, order=2):
    k = 2.0 ** order
    return (k * fine - coarse) / (k - 1.0)


def fd_gradient(f, x, h=1e-3):
    return _richardson(_grad_once(f, x, h), _grad_once(f, x, h / 2.0))


def fd_hessian(f, x, h=1e-2):
    return _richardson(_hess_once(f, x, h), _hess_once(f, x, h / 2.0))


def fd_third(f, x, h=2e-2):
    return _richardson(_third_once(f, x, h), _third_once(f, x, h / 2.0))


def expr_fn(expr):
    """Point -> value callable for a ScalarExpr."""
    return lambda x: eval_value(expr.root, x)


def rel_err(got, want):
    """Max-norm error scaled by the oracle's magnitude (floor 1)."""
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    scale = max(1.0, float(np.max(np.abs(want))) if want.size else 1.0)
    return float(np.max(np.abs(got - want))) / scale if got.size else 0.0
