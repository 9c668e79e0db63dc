"""Generalized Ricci soliton and Riemann soliton residuals and fits.

The generalized Ricci soliton equation, with X lowered to X-flat,

    (L_X g)_ij + 2 c1 X_i X_j - 2 c2 Ric_ij - 2 lambda g_ij = 0

and the Riemann soliton equation, with ^ the Kulkarni-Nomizu product,

    2 R + (L_V g) ^ g - lambda (g ^ g) = 0.

Where a printed closed form for lambda is not reproducible from the
equation's own trace, every candidate value is reported side by side and
none is asserted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classify import EqCoefficients
from .curvature import (
    PointFrame,
    covariant_field,
    divergence,
    geodesic_vector,
    kulkarni_nomizu,
    lie_metric,
)
from .errors import CheckPreconditionError
from .fieldprops import FitResult

__all__ = [
    "SolitonParams",
    "grs_residual",
    "grs_lambda_formulas",
    "geodesic_residual",
    "grs_trace_identity",
    "phi_ric_fit",
    "steady_soliton_detect",
    "riemann_soliton_residual",
    "riemann_soliton_contracted_residual",
]

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class SolitonParams:
    c1: float
    c2: float
    lam: float


def grs_residual(
    frame: PointFrame, name: str, params: SolitonParams
) -> tuple[np.ndarray, float]:
    x = frame.spec.field_values(name, frame.point)
    xlow = frame.g @ x
    residual = (
        lie_metric(frame, name)
        + 2.0 * params.c1 * np.outer(xlow, xlow)
        - 2.0 * params.c2 * frame.ric
        - 2.0 * params.lam * frame.g
    )
    return residual, float(np.max(np.abs(residual)))


def grs_lambda_formulas(coeffs: EqCoefficients, c1: float, c2: float) -> dict:
    """Closed-form lambda for generator U and generator V."""
    return {
        "lambda_u": c1 - c2 * (coeffs.a + coeffs.b),
        "lambda_v": c1 - c2 * coeffs.a,
    }


def geodesic_residual(frame: PointFrame, name: str) -> float:
    """max |(nabla_X X)^i|."""
    return float(np.max(np.abs(geodesic_vector(frame, name))))


def grs_trace_identity(
    frame: PointFrame,
    name: str,
    params: SolitonParams,
    a: Optional[float] = None,
) -> dict:
    """Exact g-trace of the soliton equation next to the printed shortcuts.

    lambda_trace is forced by the trace: 2 div X + 2 c1 g(X,X) =
    2 c2 r + 2 n lambda.  The printed per-n shortcut lambda_paper and the
    printed divergence value div_x_paper (needs the scalar a) do not follow
    from that trace; they are emitted for adjudication, never asserted.
    """
    n = frame.n
    x = frame.spec.field_values(name, frame.point)
    div_x = divergence(frame, name)
    gxx = float(x @ frame.g @ x)
    r = frame.r
    lambda_trace = (div_x + params.c1 * gxx - params.c2 * r) / n
    residual, _ = grs_residual(frame, name, params)
    trace_residual = float(np.einsum("ij,ij->", frame.g_inv, residual))
    return {
        "div_x": div_x,
        "g_xx": gxx,
        "r": r,
        "lambda_given": params.lam,
        "lambda_trace": lambda_trace,
        "lambda_paper": div_x / n + params.c1 - 2.0 * params.c2,
        "div_x_paper": None if a is None else n * (2.0 * r - a) * params.c2,
        "residual_trace": trace_residual,
        "trace_identity_gap": abs(trace_residual - 2.0 * n * (lambda_trace - params.lam)),
    }


def phi_ric_fit(frame: PointFrame, name: str, tol: float = DEFAULT_TOL) -> FitResult:
    """Fit nabla phi = mu Q by Frobenius projection on the mixed tensors."""
    q = frame.q
    denom = float(np.sum(q * q))
    if np.sqrt(denom) <= tol:
        raise CheckPreconditionError(
            "phi-fit degenerate: Ricci operator vanishes, any parallel field fits every mu"
        )
    grad = covariant_field(frame, name)
    mu = float(np.sum(grad * q)) / denom
    residual = float(np.max(np.abs(grad - mu * q)))
    verdict = "proper" if abs(mu) > tol else "improper"
    return FitResult(value=mu, residual=residual, method="Frobenius projection", verdict=verdict)


def steady_soliton_detect(
    coeffs: EqCoefficients,
    params: SolitonParams,
    mu: float,
    tol: float = DEFAULT_TOL,
) -> dict:
    """Evaluate the three scalar relations tying mu to the soliton constants.

        (a + b)(mu - c2) = lambda        [lambda_relation]
        a (mu - c2) = lambda - c1        [c1_relation]
        c (mu - c2) = 0                  [c_relation]

    Branches: c = 0 short-circuits to the quasi-Einstein case; mu = c2
    forces a steady soliton exactly when lambda and c1 also vanish.
    """
    gap = mu - params.c2
    relations = {
        "lambda_relation": (coeffs.a + coeffs.b) * gap - params.lam,
        "c1_relation": coeffs.a * gap - (params.lam - params.c1),
        "c_relation": coeffs.c * gap,
    }
    violated = None
    if abs(coeffs.c) < tol:
        branch = "quasi-Einstein branch"
    elif abs(gap) < tol:
        if abs(params.lam) < tol and abs(params.c1) < tol:
            branch = "steady branch"
        else:
            branch = "inconsistent"
            violated = "lambda_relation" if abs(params.lam) >= tol else "c1_relation"
    else:
        branch = "inconsistent"
        violated = "c_relation"
    return {"branch": branch, "relations": relations, "violated": violated}


def riemann_soliton_residual(
    frame: PointFrame, name: str, lam: float
) -> tuple[np.ndarray, float]:
    residual = (
        2.0 * frame.riemann
        + kulkarni_nomizu(lie_metric(frame, name), frame.g)
        - lam * kulkarni_nomizu(frame.g, frame.g)
    )
    return residual, float(np.max(np.abs(residual)))


def riemann_soliton_contracted_residual(
    frame: PointFrame, name: str, lam: float
) -> dict:
    """Once-contracted Riemann soliton equation plus an engine cross-check.

    The printed form divides by n - 2, so dimension 2 is rejected.  The
    engine independently contracts the full residual with g-inverse; the
    two agree up to the factor n - 2, and the gap between them is emitted.
    """
    n = frame.n
    if n == 2:
        raise CheckPreconditionError(
            "contracted equation has coefficient 2/(n-2), singular in dimension 2"
        )
    lie = lie_metric(frame, name)
    div_v = float(np.trace(covariant_field(frame, name)))
    coeff = 2.0 / (n - 2)
    residual = lie + coeff * frame.ric - coeff * ((n - 1) * lam - div_v) * frame.g
    full, _ = riemann_soliton_residual(frame, name, lam)
    contraction = np.einsum("ik,ijkl->jl", frame.g_inv, full)
    cross_gap = float(np.max(np.abs(contraction - (n - 2) * residual)))
    return {
        "residual": residual,
        "max_abs": float(np.max(np.abs(residual))),
        "contraction_of_full": contraction,
        "cross_gap": cross_gap,
        "div_v": div_v,
    }
