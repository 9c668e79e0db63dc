"""Vector-field and Ricci-tensor structure conditions, evaluated pointwise.

Each residual is the max-abs of a defining equation after substituting any
fitted parameters, so a zero certifies the property at the point and a
nonzero is directly interpretable in the equation's own scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .classify import EqCoefficients, _resolve_triple
from .curvature import (
    PointFrame,
    build_frame,
    covariant_field,
    lie_metric,
    riemann_operator,
)
from .errors import CheckPreconditionError
from .manifold import ManifoldSpec

__all__ = [
    "FitResult",
    "killing_residual",
    "parallel_residual",
    "concurrent_fit",
    "cyclic_parallel_residual",
    "codazzi_residual",
    "one_form_closedness",
    "ricci_recurrence_fit",
    "ricci_semisymmetry_residual",
    "curvature_orthogonality",
    "parallel_chain_quantities",
    "mixed_generalized_reduction",
]

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class FitResult:
    value: object  # float for alpha/mu, covector array for recurrence
    residual: float
    method: str
    verdict: Optional[str] = None


def killing_residual(frame: PointFrame, name: str) -> float:
    """max |(L_X g)_ij|."""
    return float(np.max(np.abs(lie_metric(frame, name))))


def parallel_residual(frame: PointFrame, name: str) -> float:
    """max |(nabla X)^i_j|."""
    return float(np.max(np.abs(covariant_field(frame, name))))


def concurrent_fit(frame: PointFrame, name: str, tol: float = DEFAULT_TOL) -> FitResult:
    """Fit nabla X = alpha * id by the trace slot and re-substitute."""
    grad = covariant_field(frame, name)
    alpha = float(np.trace(grad)) / frame.n
    residual = float(np.max(np.abs(grad - alpha * np.eye(frame.n))))
    if residual < tol:
        verdict = "concurrent" if abs(alpha) > tol else "parallel"
    else:
        verdict = "neither"
    return FitResult(value=alpha, residual=residual, method="exact-slot", verdict=verdict)


def cyclic_parallel_residual(frame: PointFrame) -> float:
    """max over (i,j,k) of the cyclic sum of nabla Ric."""
    nr = frame.nabla_ric
    cyc = nr + nr.transpose(1, 2, 0) + nr.transpose(2, 0, 1)
    return float(np.max(np.abs(cyc)))


def codazzi_residual(frame: PointFrame) -> float:
    """max |nabla_i Ric_jk - nabla_j Ric_ik|."""
    nr = frame.nabla_ric
    return float(np.max(np.abs(nr - nr.transpose(1, 0, 2))))


def one_form_closedness(frame: PointFrame, name: str) -> float:
    """max |(dA)_ij| = |d_i A_j - d_j A_i| for a declared one-form."""
    _, jac = frame.spec.form_jacobian(name, frame.point)
    # jac[i, j] = d_j A_i, so dA_ij = jac[j, i] - jac[i, j]
    return float(np.max(np.abs(jac.T - jac)))


def ricci_recurrence_fit(frame: PointFrame, tol: float = DEFAULT_TOL) -> FitResult:
    """Per-slot Frobenius projection of nabla Ric onto Ric."""
    ric = frame.ric
    denom = float(np.sum(ric * ric))
    if np.sqrt(denom) <= tol:
        raise CheckPreconditionError("recurrence undefined: Ricci tensor vanishes at this point")
    nr = frame.nabla_ric
    f = np.einsum("kij,ij->k", nr, ric) / denom
    residual = float(np.max(np.abs(nr - np.einsum("k,ij->kij", f, ric))))
    return FitResult(value=f, residual=residual, method="per-slot Frobenius projection")


def ricci_semisymmetry_residual(frame: PointFrame) -> float:
    """max |Ric(R(e_i,e_j)e_k, e_l) + Ric(e_k, R(e_i,e_j)e_l)|."""
    w = riemann_operator(frame)
    ric = frame.ric
    acted = np.einsum("mijk,ml->ijkl", w, ric) + np.einsum("km,mijl->ijkl", ric, w)
    return float(np.max(np.abs(acted)))


def curvature_orthogonality(
    frame: PointFrame, triple: Optional[Sequence[str]] = None
) -> float:
    """max over (i,j) of |R(e_i, e_j, V, T)| for the triple's V and T."""
    names = _resolve_triple(frame, triple)
    v = frame.spec.field_values(names[1], frame.point)
    t = frame.spec.field_values(names[2], frame.point)
    table = np.einsum("ijkl,k,l->ij", frame.riemann, v, t)
    return float(np.max(np.abs(table)))


def parallel_chain_quantities(
    frame: PointFrame,
    coeffs: EqCoefficients,
    triple: Optional[Sequence[str]] = None,
) -> dict:
    """Reported factors of the parallel-generator chain; nothing is asserted.

    The chain would pass through (a - c)(B - D) = 0, so both factors are
    emitted for inspection together with |a + b| and the three parallel
    residuals.
    """
    names = _resolve_triple(frame, triple)
    v = frame.spec.field_values(names[1], frame.point)
    t = frame.spec.field_values(names[2], frame.point)
    b_form = frame.g @ v
    d_form = frame.g @ t
    return {
        "abs_a_plus_b": abs(coeffs.a + coeffs.b),
        "abs_a_minus_c": abs(coeffs.a - coeffs.c),
        "max_b_minus_d": float(np.max(np.abs(b_form - d_form))),
        "chain_product": abs(coeffs.a - coeffs.c) * float(np.max(np.abs(b_form - d_form))),
        "parallel_residuals": {
            nm: parallel_residual(frame, nm) for nm in names
        },
    }


def _constant_over(values: Sequence[float], label: str, tol: float) -> float:
    spread = float(np.max(values) - np.min(values))
    if spread > tol:
        raise CheckPreconditionError(f"non-constant {label} across points (spread {spread:.3e})")
    return float(np.mean(values))


def mixed_generalized_reduction(
    spec: ManifoldSpec,
    coeffs_by_point: Sequence[EqCoefficients],
    triple: Optional[Sequence[str]] = None,
    mode: str = "declared",
    tol: float = DEFAULT_TOL,
) -> dict:
    """Reduce the three-form decomposition to one over B and D alone.

    Requires the triple fields to be concurrent with nonzero constants
    (alpha, beta, gamma for U, V, T), a and b constant across the sample
    set, and b*alpha != 0.  Derived coefficients:

        a1 = a,  a2 = (c*gamma)^2/(b*alpha)^2,  a3 = (c*beta)^2/(b*alpha)^2,
        a4 = c + c^2*beta*gamma/(b*alpha)^2

    The residual re-substitutes them into
    Ric - a1 g - a2 B(x)B - a3 D(x)D - a4 (B(x)D + D(x)B).
    """
    points = spec.samples
    if len(coeffs_by_point) != len(points):
        raise CheckPreconditionError(
            f"need coefficients for all {len(points)} points, got {len(coeffs_by_point)}"
        )
    frames = [build_frame(spec, p, mode=mode) for p in points]
    names = _resolve_triple(frames[0], triple)
    rates = {}
    for field_name, label in zip(names, ("alpha", "beta", "gamma")):
        fits = [concurrent_fit(fr, field_name, tol) for fr in frames]
        worst = max(fit.residual for fit in fits)
        if worst > tol:
            raise CheckPreconditionError(
                f"{field_name!r} is not concurrent (residual {worst:.3e})"
            )
        rates[label] = _constant_over([fit.value for fit in fits], label, tol)
        if abs(rates[label]) <= tol:
            raise CheckPreconditionError(f"{label} vanishes for field {field_name!r}")
    a = _constant_over([co.a for co in coeffs_by_point], "a", tol)
    b = _constant_over([co.b for co in coeffs_by_point], "b", tol)
    alpha, beta, gamma = rates["alpha"], rates["beta"], rates["gamma"]
    if abs(b * alpha) <= tol:
        raise CheckPreconditionError(f"b*alpha = {b * alpha!r} is too small to divide by")
    residuals = []
    per_point = []
    for fr, co in zip(frames, coeffs_by_point):
        c = co.c
        a1 = a
        a2 = (c * gamma) ** 2 / (b * alpha) ** 2
        a3 = (c * beta) ** 2 / (b * alpha) ** 2
        a4 = c + c**2 * beta * gamma / (b * alpha) ** 2
        v = fr.spec.field_values(names[1], fr.point)
        t = fr.spec.field_values(names[2], fr.point)
        b_form = fr.g @ v
        d_form = fr.g @ t
        model = (
            a1 * fr.g
            + a2 * np.outer(b_form, b_form)
            + a3 * np.outer(d_form, d_form)
            + a4 * (np.outer(b_form, d_form) + np.outer(d_form, b_form))
        )
        residuals.append(float(np.max(np.abs(fr.ric - model))))
        per_point.append({"a1": a1, "a2": a2, "a3": a3, "a4": a4})
    return {
        "alpha": alpha,
        "beta": beta,
        "gamma": gamma,
        "a": a,
        "b": b,
        "coefficients": per_point,
        "per_point_residuals": residuals,
        "max_residual": float(np.max(residuals)),
    }
