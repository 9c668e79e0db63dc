"""Pointwise curvature: Christoffel symbols, Riemann, Ricci, derived tensors.

Conventions, fixed operationally by the unit-sphere normalization:

    gamma[k,i,j]      Gamma^k_ij = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    riemann[i,j,k,l]  g(R(e_i,e_j)e_k, e_l) for
                      R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
                      stored so that a space of constant curvature K satisfies
                      R[i,j,k,l] = K (g_ik g_jl - g_il g_jk)
    ric[j,l]          g^{ik} riemann[i,j,k,l]; unit round 2-sphere gives Ric = +g, r = +2
    sec(X,Y)          R(X,Y,X,Y) / (g(X,X) g(Y,Y) - g(X,Y)^2); +1 on the unit 2-sphere

A frame always carries the curvature computed from the metric.  When the
spec declares a Ricci table, the frame additionally evaluates it and the
``mode`` flag ("computed" or "declared") selects which tensor the
mode-sensitive properties (ric, r, q, ric2, nabla_ric) expose.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import assemble, matrix_inverse, ricci_from_riemann
from .errors import CheckPreconditionError, DegeneratePlaneError, ManifoldValidationError
from .manifold import ManifoldSpec

__all__ = [
    "PointFrame",
    "build_frame",
    "ricci_from_riemann",
    "lie_metric",
    "covariant_field",
    "divergence",
    "geodesic_vector",
    "kulkarni_nomizu",
    "sectional_curvature",
    "riemann_operator",
    "metric_compatibility_residual",
    "riemann_symmetry_residuals",
    "first_bianchi_residual",
    "second_bianchi_residual",
]

_MODES = {"computed": "computed", "declared": "declared", "declared-ricci": "declared"}


@dataclass
class PointFrame:
    spec: ManifoldSpec
    point: np.ndarray
    mode: str
    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    riemann: np.ndarray
    ric_computed: np.ndarray
    dric_computed: np.ndarray
    ric_declared: Optional[np.ndarray] = None
    dric_declared: Optional[np.ndarray] = None
    _nabla_r: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def _selected(self) -> tuple[np.ndarray, np.ndarray]:
        if self.mode == "declared":
            return self.ric_declared, self.dric_declared
        return self.ric_computed, self.dric_computed

    @property
    def ric(self) -> np.ndarray:
        return self._selected()[0]

    @property
    def r(self) -> float:
        ric = self.ric
        return float(np.einsum("jl,jl->", self.g_inv, ric))

    @property
    def q(self) -> np.ndarray:
        """Ricci operator Q^i_j with Ric(X,Y) = g(QX,Y)."""
        return self.g_inv @ self.ric

    @property
    def ric2(self) -> np.ndarray:
        """Ric^2(X,Y) = Ric(QX,Y)."""
        ric = self.ric
        return ric @ self.g_inv @ ric

    @property
    def nabla_ric(self) -> np.ndarray:
        """(nabla Ric)[k,i,j] = d_k Ric_ij - Gamma^m_ki Ric_mj - Gamma^m_kj Ric_im."""
        ric, dric = self._selected()
        return (
            dric.transpose(2, 0, 1)
            - np.einsum("mki,mj->kij", self.gamma, ric)
            - np.einsum("mkj,im->kij", self.gamma, ric)
        )

    def nabla_riemann(self) -> np.ndarray:
        """(nabla R)[m,i,j,k,l]; computed on demand, cached."""
        if self._nabla_r is None:
            g, dg, d2g, d3g = self.spec.metric_jets(self.point)
            _, _, _, _, _, _, dr = assemble(g, dg, d2g, d3g, self.g_inv, want_dr=True)
            corr = (
                np.einsum("pmi,pjkl->mijkl", self.gamma, self.riemann)
                + np.einsum("pmj,ipkl->mijkl", self.gamma, self.riemann)
                + np.einsum("pmk,ijpl->mijkl", self.gamma, self.riemann)
                + np.einsum("pml,ijkp->mijkl", self.gamma, self.riemann)
            )
            self._nabla_r = dr.transpose(4, 0, 1, 2, 3) - corr
        return self._nabla_r


def build_frame(spec: ManifoldSpec, point, mode: str = "computed") -> PointFrame:
    if mode not in _MODES:
        raise ValueError(f"unknown mode {mode!r}")
    mode = _MODES[mode]
    if mode == "declared" and spec.declared_ricci is None:
        raise CheckPreconditionError(
            f"{spec.name}: declared-ricci mode requires a declared_ricci table"
        )
    point = np.asarray(point, dtype=float)
    g, dg, d2g, d3g = spec.metric_jets(point)
    ok, ginv = matrix_inverse(g)
    if not ok:
        raise ManifoldValidationError(f"metric is singular at point {point.tolist()}")
    _, gamma, dgamma, riemann, ric, dric, _ = assemble(g, dg, d2g, d3g, ginv)
    frame = PointFrame(
        spec=spec,
        point=point,
        mode=mode,
        g=g,
        g_inv=ginv,
        dg=dg,
        gamma=gamma,
        dgamma=dgamma,
        riemann=riemann,
        ric_computed=ric,
        dric_computed=dric,
    )
    if spec.declared_ricci is not None:
        s, ds = spec.declared_ricci_jets(point)
        frame.ric_declared = s
        frame.dric_declared = ds
    return frame


def lie_metric(frame: PointFrame, name: str) -> np.ndarray:
    """(L_X g)_ij = nabla_i X_j + nabla_j X_i with X lowered by g."""
    x, jac = frame.spec.field_jacobian(name, frame.point)
    xlow = frame.g @ x
    # d_i (g_jm X^m)
    dxlow = np.einsum("jmi,m->ji", frame.dg, x) + frame.g @ jac
    grad = dxlow.T - np.einsum("pij,p->ij", frame.gamma, xlow)
    return grad + grad.T


def covariant_field(frame: PointFrame, name: str) -> np.ndarray:
    """(nabla X)^i_j = d_j X^i + Gamma^i_jm X^m."""
    x, jac = frame.spec.field_jacobian(name, frame.point)
    return jac + np.einsum("ijm,m->ij", frame.gamma, x)


def divergence(frame: PointFrame, name: str) -> float:
    return float(np.trace(covariant_field(frame, name)))


def geodesic_vector(frame: PointFrame, name: str) -> np.ndarray:
    """(nabla_X X)^i."""
    x = frame.spec.field_values(name, frame.point)
    return covariant_field(frame, name) @ x


def kulkarni_nomizu(h: np.ndarray, k: np.ndarray) -> np.ndarray:
    """(h ^ k)_ijkl = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il."""
    return (
        np.einsum("ik,jl->ijkl", h, k)
        + np.einsum("jl,ik->ijkl", h, k)
        - np.einsum("il,jk->ijkl", h, k)
        - np.einsum("jk,il->ijkl", h, k)
    )


def sectional_curvature(frame: PointFrame, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = frame.g
    gxx = float(x @ g @ x)
    gyy = float(y @ g @ y)
    gxy = float(x @ g @ y)
    gram = gxx * gyy - gxy * gxy
    scale = max(abs(gxx * gyy), gxy * gxy, 1e-300)
    if gram <= 1e-12 * scale:
        raise DegeneratePlaneError(
            f"plane is degenerate (Gram determinant {gram!r} at scale {scale!r})"
        )
    num = float(np.einsum("ijkl,i,j,k,l->", frame.riemann, x, y, x, y))
    return num / gram


def riemann_operator(frame: PointFrame) -> np.ndarray:
    """W[m,i,j,k] with R(e_i,e_j)e_k = W^m_ijk e_m (raised last slot)."""
    return np.einsum("ml,ijkl->mijk", frame.g_inv, frame.riemann)


def metric_compatibility_residual(frame: PointFrame) -> float:
    """max |nabla_k g_ij| computed through the same Gamma machinery."""
    nabla_g = (
        frame.dg.transpose(2, 0, 1)
        - np.einsum("mki,mj->kij", frame.gamma, frame.g)
        - np.einsum("mkj,im->kij", frame.gamma, frame.g)
    )
    return float(np.max(np.abs(nabla_g)))


def riemann_symmetry_residuals(frame: PointFrame) -> dict[str, float]:
    r = frame.riemann
    return {
        "antisym_first_pair": float(np.max(np.abs(r + r.transpose(1, 0, 2, 3)))),
        "antisym_second_pair": float(np.max(np.abs(r + r.transpose(0, 1, 3, 2)))),
        "pair_symmetry": float(np.max(np.abs(r - r.transpose(2, 3, 0, 1)))),
        "first_bianchi": first_bianchi_residual(frame),
    }


def first_bianchi_residual(frame: PointFrame) -> float:
    r = frame.riemann
    cyc = r + r.transpose(1, 2, 0, 3) + r.transpose(2, 0, 1, 3)
    return float(np.max(np.abs(cyc)))


def second_bianchi_residual(frame: PointFrame) -> float:
    """max of the cyclic sum of nabla R over its first three indices."""
    nr = frame.nabla_riemann()
    cyc = nr + nr.transpose(1, 2, 0, 3, 4) + nr.transpose(2, 0, 1, 3, 4)
    return float(np.max(np.abs(cyc)))
