"""Seeded random expression trees with domain-safe partial functions.

Trees are rejection-sampled: a candidate is kept only if value evaluation
stays finite and in-domain on a probe cloud covering the finite-difference
stencils the oracles use. Everything is driven by a caller-provided
Generator, so sequences are reproducible.
"""

from __future__ import annotations

import numpy as np

from eqcheck.expr import BinOp, Call, Coord, Neg, Num, ScalarExpr, to_source
from eqcheck.expr.kernels import eval_value
from eqcheck import errors

_TRIG = ("sin", "cos", "tanh")
_GROW = ("exp", "sinh", "cosh")


def _const(rng):
    v = round(float(rng.uniform(0.1, 2.5)), 4)
    node = Num(v)
    if rng.random() < 0.3:
        return Neg(node)
    return node


def _leaf(rng, coords):
    if coords and rng.random() < 0.6:
        i = int(rng.integers(len(coords)))
        return Coord(i, coords[i])
    return _const(rng)


def _positive(rng, coords, depth, exp_ok):
    # k + trig(...) with k >= 1.2 stays well away from zero
    k = Num(round(float(rng.uniform(1.2, 3.0)), 4))
    fn = _TRIG[int(rng.integers(len(_TRIG)))]
    return BinOp("+", k, Call(fn, _tree(rng, coords, depth - 1, exp_ok)))


def _tree(rng, coords, depth, exp_ok=True):
    if depth <= 0 or rng.random() < 0.18:
        return _leaf(rng, coords)
    r = rng.random()
    if r < 0.38:
        op = "+-*"[int(rng.integers(3))]
        return BinOp(op, _tree(rng, coords, depth - 1, exp_ok), _tree(rng, coords, depth - 1, exp_ok))
    if r < 0.50:
        return BinOp("/", _tree(rng, coords, depth - 1, exp_ok), _positive(rng, coords, depth, exp_ok))
    if r < 0.60:
        expo = Num(float(rng.integers(2, 4)))
        return BinOp("^", _tree(rng, coords, depth - 1, exp_ok), expo)
    if r < 0.66:
        expo = Num(round(float(rng.uniform(0.4, 1.8)), 2))
        return BinOp("^", _positive(rng, coords, depth, exp_ok), expo)
    if r < 0.80:
        fn = _TRIG[int(rng.integers(len(_TRIG)))]
        return Call(fn, _tree(rng, coords, depth - 1, exp_ok))
    if r < 0.90 and exp_ok:
        fn = _GROW[int(rng.integers(len(_GROW)))]
        damped = BinOp("*", Num(0.3), _tree(rng, coords, depth - 1, exp_ok=False))
        return Call(fn, damped)
    fn = "log" if rng.random() < 0.5 else "sqrt"
    return Call(fn, _positive(rng, coords, depth, exp_ok))


def _safe_on_cloud(root, point, rng, radius=0.08, probes=200):
    for _ in range(probes + 1):
        q = point + rng.uniform(-radius, radius, size=point.shape)
        try:
            v = eval_value(root, q)
        except errors.EvalDomainError:
            return False
        if not np.isfinite(v) or abs(v) > 1e8:
            return False
    return True


def random_checked_expr(rng, n_coords, depth=6):
    """Return (ScalarExpr, point) safe for the FD oracles around the point."""
    coords = tuple(f"x{k + 1}" for k in range(n_coords))
    while True:
        point = rng.uniform(-0.7, 0.7, size=n_coords)
        root = _tree(rng, coords, depth)
        if _safe_on_cloud(root, point, rng):
            return (
                ScalarExpr(root=root, coordinates=coords, source=to_source(root)),
                point,
            )


def _mild(rng, coords, depth):
    # bounded trees only (trig of sums/products); keeps curvature O(1)
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.7:
            i = int(rng.integers(len(coords)))
            return Coord(i, coords[i])
        return _const(rng)
    r = rng.random()
    if r < 0.45:
        op = "+-"[int(rng.integers(2))]
        return BinOp(op, _mild(rng, coords, depth - 1), _mild(rng, coords, depth - 1))
    if r < 0.72:
        fn = _TRIG[int(rng.integers(len(_TRIG)))]
        return Call(fn, _mild(rng, coords, depth - 1))
    return BinOp("*", Num(round(float(rng.uniform(0.2, 0.9)), 3)), _mild(rng, coords, depth - 1))


def _bounded_bump(rng, coords, scale):
    fn = _TRIG[int(rng.integers(len(_TRIG)))]
    return BinOp("*", Num(scale), Call(fn, _mild(rng, coords, 3)))


def random_declared_eq_spec(rng, n, a=None, b=None, c=None, name="synthetic-declared"):
    """Constant-coefficient spec whose declared Ricci is built from (a, b, c).

    Draws a random SPD constant metric and a g-orthonormalized triple, then
    writes Ric := a g + b A(x)A + c (B(x)D + D(x)B) into declared_ricci as
    shortest-repr literals, so parsing reproduces the exact doubles.
    Returns (spec, (a, b, c)).
    """
    from eqcheck.manifold import ManifoldSpec

    m = rng.normal(size=(n, n))
    g = m @ m.T + n * np.eye(n)
    raw = rng.normal(size=(3, n))
    tri = []
    for vec in raw:
        for prev in tri:
            vec = vec - (prev @ g @ vec) * prev
        vec = vec / np.sqrt(vec @ g @ vec)
        tri.append(vec)
    u, v, t = tri
    if a is None:
        a = float(rng.uniform(-2.0, 2.0))
    if b is None:
        b = float(rng.uniform(0.2, 2.0)) * (1 if rng.random() < 0.5 else -1)
    if c is None:
        c = float(rng.uniform(0.2, 2.0)) * (1 if rng.random() < 0.5 else -1)
    af, bf, df = g @ u, g @ v, g @ t
    ric = a * g + b * np.outer(af, af) + c * (np.outer(bf, df) + np.outer(df, bf))
    doc = {
        "schema": "eqcheck/manifold/1",
        "name": name,
        "dimension": n,
        "coordinates": [f"x{k + 1}" for k in range(n)],
        "metric": {f"{i + 1},{j + 1}": repr(float(g[i, j])) for i in range(n) for j in range(i, n)},
        "declared_ricci": {
            f"{i + 1},{j + 1}": repr(float(ric[i, j])) for i in range(n) for j in range(i, n)
        },
        "vector_fields": {
            "U": [repr(float(x)) for x in u],
            "V": [repr(float(x)) for x in v],
            "T": [repr(float(x)) for x in t],
        },
        "triple": ["U", "V", "T"],
        "samples": {"points": [[0.0] * n]},
    }
    return ManifoldSpec.from_dict(doc), (a, b, c)


def random_metric_spec(rng, n, points=3, name="random-metric"):
    """A strictly diagonally dominant analytic metric, PD everywhere.

    Diagonal entries are c + 0.4 * trig(...) with c >= 1.5, so each is
    >= 1.1; off-diagonal entries are bounded by 0.15, and with n <= 4 the
    row sums stay under the diagonal at every point of the chart.
    """
    from eqcheck.manifold import ManifoldSpec

    coords = tuple(f"x{k + 1}" for k in range(n))
    entries = {}
    for i in range(n):
        c = Num(round(float(rng.uniform(1.5, 3.0)), 4))
        diag = BinOp("+", c, _bounded_bump(rng, coords, 0.4))
        entries[f"{i + 1},{i + 1}"] = to_source(diag)
        for j in range(i + 1, n):
            if rng.random() < 0.6:
                entries[f"{i + 1},{j + 1}"] = to_source(_bounded_bump(rng, coords, 0.15))
    pts = rng.uniform(-0.8, 0.8, size=(points, n))
    doc = {
        "schema": "eqcheck/manifold/1",
        "name": name,
        "dimension": n,
        "coordinates": list(coords),
        "metric": entries,
        "samples": {"points": [[float(v) for v in row] for row in pts]},
    }
    return ManifoldSpec.from_dict(doc)
