"""Einstein-family classification and coefficient extraction.

Against a g-orthonormal triple (U, V, T) with lowered forms A, B, D, the
target decomposition is

    Ric = a g + b A (x) A + c (B (x) D + D (x) B)

which forces Ric(U,U) = a + b, Ric(V,V) = Ric(T,T) = a, Ric(V,T) = c and
Ric(U,V) = Ric(U,T) = 0.  Coefficients are read off those trace relations
pointwise; the full component residual then decides the verdict, so a
failure is attributable to specific components rather than hidden by a
least-squares fit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .curvature import PointFrame, sectional_curvature, build_frame
from .errors import CheckPreconditionError, DegeneratePlaneError
from .manifold import ManifoldSpec

__all__ = [
    "EqCoefficients",
    "ExistenceConstruction",
    "extract_coefficients",
    "declared_coefficients",
    "decomposition_residual",
    "pseudo_residuals",
    "family_classification",
    "scalar_identities",
    "existence_relation",
    "constant_curvature_check",
    "HARD_ORTHONORMALITY",
]

# Above this the triple is unusable and extraction refuses to run; below it
# the suites still report the residual against the softer 1e-9 target.
HARD_ORTHONORMALITY = 1e-6

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class EqCoefficients:
    a: float
    b: float
    c: float
    source: str = "extracted"
    a_cross: Optional[float] = None
    cross_gap: Optional[float] = None
    ric_uv: Optional[float] = None
    ric_ut: Optional[float] = None


@dataclass(frozen=True)
class ExistenceConstruction:
    a1: float
    a2: float
    omega: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    a: float
    b: float
    c: float
    decomposition_residual: float
    hypothesis_residual: float


def _resolve_triple(frame: PointFrame, triple: Optional[Sequence[str]]) -> tuple[str, str, str]:
    if triple is None:
        triple = frame.spec.triple
    if triple is None:
        raise CheckPreconditionError(
            f"{frame.spec.name}: no (U, V, T) triple given and none declared"
        )
    names = tuple(triple)
    if len(names) != 3:
        raise CheckPreconditionError(f"triple must name exactly 3 fields, got {len(names)}")
    return names


def _triple_vectors(frame: PointFrame, names: tuple[str, str, str]) -> tuple[np.ndarray, ...]:
    residual = frame.spec.orthonormality_residual(frame.point, names)
    if residual > HARD_ORTHONORMALITY:
        raise CheckPreconditionError(
            f"triple {names} is not orthonormal at {frame.point.tolist()}"
            f" (residual {residual:.3e})"
        )
    return tuple(frame.spec.field_values(nm, frame.point) for nm in names)


def extract_coefficients(
    frame: PointFrame, triple: Optional[Sequence[str]] = None
) -> EqCoefficients:
    """Read (a, b, c) off the trace relations of the decomposition."""
    names = _resolve_triple(frame, triple)
    u, v, t = _triple_vectors(frame, names)
    ric = frame.ric

    def pair(x, y):
        return float(x @ ric @ y)

    a = pair(v, v)
    a_cross = pair(t, t)
    return EqCoefficients(
        a=a,
        b=pair(u, u) - a,
        c=pair(t, v),
        source="extracted",
        a_cross=a_cross,
        cross_gap=abs(a - a_cross),
        ric_uv=pair(u, v),
        ric_ut=pair(u, t),
    )


def declared_coefficients(spec: ManifoldSpec, point) -> EqCoefficients:
    """Evaluate scalar expressions named a, b, c declared by the spec."""
    missing = [nm for nm in ("a", "b", "c") if nm not in spec.scalars]
    if missing:
        raise CheckPreconditionError(
            f"{spec.name}: declared scalars missing {', '.join(missing)}"
        )
    return EqCoefficients(
        a=spec.scalar_value("a", point),
        b=spec.scalar_value("b", point),
        c=spec.scalar_value("c", point),
        source="declared-expressions",
    )


def _lowered(frame: PointFrame, vec: np.ndarray) -> np.ndarray:
    return frame.g @ vec


def decomposition_residual(
    frame: PointFrame,
    coeffs: EqCoefficients,
    triple: Optional[Sequence[str]] = None,
) -> tuple[np.ndarray, float]:
    """Componentwise Ric - a g - b A(x)A - c (B(x)D + D(x)B) and its max-abs."""
    names = _resolve_triple(frame, triple)
    u, v, t = _triple_vectors(frame, names)
    a_form = _lowered(frame, u)
    b_form = _lowered(frame, v)
    d_form = _lowered(frame, t)
    model = (
        coeffs.a * frame.g
        + coeffs.b * np.outer(a_form, a_form)
        + coeffs.c * (np.outer(b_form, d_form) + np.outer(d_form, b_form))
    )
    residual = frame.ric - model
    return residual, float(np.max(np.abs(residual)))


def pseudo_residuals(
    frame: PointFrame,
    coeffs: EqCoefficients,
    triple: Optional[Sequence[str]] = None,
) -> tuple[float, float]:
    """Leftover E := Ric - a g - b A(x)A tested for trace E = 0 and E(U, .) = 0."""
    names = _resolve_triple(frame, triple)
    u, _, _ = _triple_vectors(frame, names)
    a_form = _lowered(frame, u)
    leftover = frame.ric - coeffs.a * frame.g - coeffs.b * np.outer(a_form, a_form)
    trace = float(np.einsum("ij,ij->", frame.g_inv, leftover))
    against_u = float(np.max(np.abs(leftover @ u)))
    return abs(trace), against_u


def family_classification(
    frame: PointFrame,
    triple: Optional[Sequence[str]] = None,
    tol: float = DEFAULT_TOL,
) -> str:
    """Most specific applicable label for this point.

    Ladder: Einstein, then the three clean-decomposition families by which
    coefficients vanish, then pseudo as the weaker-structure fallback when
    the full decomposition fails but its leftover is trace-free and
    annihilates U, then none.
    """
    coeffs = extract_coefficients(frame, triple)
    _, residual = decomposition_residual(frame, coeffs, triple)
    b_small = abs(coeffs.b) <= tol
    c_small = abs(coeffs.c) <= tol
    if residual <= tol:
        if b_small and c_small:
            return "Einstein"
        if c_small:
            return "quasi-Einstein"
        if b_small:
            return "mixed quasi-Einstein"
        return "extended quasi-Einstein"
    trace_gap, u_gap = pseudo_residuals(frame, coeffs, triple)
    if trace_gap <= tol and u_gap <= tol:
        return "pseudo quasi-Einstein"
    return "none"


def _orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Rows are a g-orthonormal basis built by Gram-Schmidt from e_1..e_n."""
    n = g.shape[0]
    frame = np.zeros((n, n))
    for i in range(n):
        vec = np.zeros(n)
        vec[i] = 1.0
        for j in range(i):
            vec = vec - (frame[j] @ g @ vec) * frame[j]
        norm2 = float(vec @ g @ vec)
        if norm2 <= 0.0:
            raise CheckPreconditionError("metric is not positive definite at this point")
        frame[i] = vec / np.sqrt(norm2)
    return frame


def scalar_identities(
    frame: PointFrame,
    coeffs: EqCoefficients,
    tol: float = DEFAULT_TOL,
) -> dict:
    """Trace identity r = n a + b, length identity for l**2, and the c bound.

    l**2 is summed as Ric(Q f_i, f_i) over an explicitly constructed
    orthonormal frame rather than taken from tr(Q^2), so the identity adds
    information.
    """
    n = frame.n
    ric = frame.ric
    basis = _orthonormal_frame(frame.g)
    q_applied = (frame.q @ basis.T).T  # rows Q f_i
    l2 = float(sum(q_applied[i] @ ric @ basis[i] for i in range(n)))
    formula = (n - 1) * coeffs.a**2 + (coeffs.a + coeffs.b) ** 2 + 2 * coeffs.c**2
    two_c2 = 2.0 * coeffs.c**2
    if abs(coeffs.a) <= tol or abs(coeffs.c) <= tol:
        bound = "skipped"
    elif two_c2 < l2:
        bound = "holds"
    else:
        bound = "violated"
    return {
        "r": frame.r,
        "na_plus_b": n * coeffs.a + coeffs.b,
        "r_gap": abs(frame.r - (n * coeffs.a + coeffs.b)),
        "l2": l2,
        "l2_formula": formula,
        "l2_gap": abs(l2 - formula),
        "two_c2": two_c2,
        "c_bound": bound,
    }


def existence_relation(
    frame: PointFrame,
    u_name: str,
    a1: float,
    a2: float,
    rng: Optional[np.random.Generator] = None,
    max_tuples: int = 200,
) -> ExistenceConstruction:
    """Build (a, b, c) from the two-scalar hypothesis and measure both residuals.

    The hypothesis, evaluated on basis tuples (i, j, k, l):

        S_il g_jk + S_jk g_il
          - a1 (g_il g_jk + g_jl g_ik)
          - a2 (S_ik S2_jl + S_jl S2_ik)  = 0

    with S the selected Ricci and S2 its g-square.  The construction sets
    a = a1 - Ric(U,U)/g(U,U), b = a1/g(U,U), c = a2/g(U,U) and decomposes
    against omega = U-flat, omega1 = Ric(., U), omega2 = Ric^2(., U).
    """
    if a1 == 0.0 or a2 == 0.0:
        raise CheckPreconditionError("existence construction needs non-zero a1 and a2")
    u = frame.spec.field_values(u_name, frame.point)
    g = frame.g
    guu = float(u @ g @ u)
    if abs(guu) < 1e-12:
        raise CheckPreconditionError(f"field {u_name!r} is null at {frame.point.tolist()}")
    s = frame.ric
    s2 = frame.ric2
    omega = g @ u
    omega1 = s @ u
    omega2 = s2 @ u
    a = a1 - float(u @ s @ u) / guu
    b = a1 / guu
    c = a2 / guu
    model = (
        a * g
        + b * np.outer(omega, omega)
        + c * (np.outer(omega1, omega2) + np.outer(omega2, omega1))
    )
    decomp = float(np.max(np.abs(s - model)))

    n = frame.n
    if n <= 4:
        tuples = itertools.product(range(n), repeat=4)
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        draws = rng.integers(0, n, size=(max_tuples, 4))
        tuples = (tuple(int(v) for v in row) for row in draws)
    worst = 0.0
    for i, j, k, l in tuples:
        value = (
            s[i, l] * g[j, k]
            + s[j, k] * g[i, l]
            - a1 * (g[i, l] * g[j, k] + g[j, l] * g[i, k])
            - a2 * (s[i, k] * s2[j, l] + s[j, l] * s2[i, k])
        )
        worst = max(worst, abs(value))
    return ExistenceConstruction(
        a1=a1,
        a2=a2,
        omega=omega,
        omega1=omega1,
        omega2=omega2,
        a=a,
        b=b,
        c=c,
        decomposition_residual=decomp,
        hypothesis_residual=worst,
    )


def _random_plane(rng: np.random.Generator, frame: PointFrame) -> float:
    for _ in range(50):
        x = rng.normal(size=frame.n)
        y = rng.normal(size=frame.n)
        try:
            return sectional_curvature(frame, x, y)
        except DegeneratePlaneError:
            continue
    raise CheckPreconditionError("could not draw a non-degenerate plane in 50 tries")


def constant_curvature_check(
    spec: ManifoldSpec,
    seed: int = 0,
    planes: int = 12,
    tol: float = DEFAULT_TOL,
) -> dict:
    """Isotropy and Schur structure over seeded random planes at every sample.

    Per point: the spread of sectional curvatures over the drawn planes.
    Across points: the spread of the per-point means.  For n = 3 the report
    also records whether "Einstein implies constant curvature" holds as a
    checked implication on this spec.
    """
    if planes < 10:
        raise CheckPreconditionError("need at least 10 planes per point")
    if len(spec.samples) < 2:
        raise CheckPreconditionError("need at least 2 sample points")
    k_means = []
    spreads = []
    einstein_res = []
    for idx, point in enumerate(spec.samples):
        frame = build_frame(spec, point)
        rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
        values = [_random_plane(rng, frame) for _ in range(planes)]
        k_means.append(float(np.mean(values)))
        spreads.append(float(np.max(values) - np.min(values)))
        if spec.dimension == 3:
            scale = frame.r / 3.0
            einstein_res.append(float(np.max(np.abs(frame.ric_computed - scale * frame.g))))
    cross = float(np.max(k_means) - np.min(k_means))
    report = {
        "k_values": k_means,
        "per_point_spread": spreads,
        "max_point_spread": float(np.max(spreads)),
        "cross_point_spread": cross,
        "k": float(np.mean(k_means)),
        "is_constant": bool(np.max(spreads) <= tol and cross <= tol),
        "einstein_implication": None,
    }
    if einstein_res:
        einstein_ok = max(einstein_res) <= tol
        spread_ok = report["max_point_spread"] <= tol and cross <= tol
        report["einstein_implication"] = {
            "einstein_max_residual": max(einstein_res),
            "einstein_ok": einstein_ok,
            "spread_ok": spread_ok,
            "implication_holds": (not einstein_ok) or spread_ok,
        }
    return report
