"""Per-point curvature assembly kernels.

Two complete backends: explicit-loop routines compiled by numba, and a
vectorized einsum formulation for the numpy fallback.  Both produce the
same arrays to rounding; each is individually bit-deterministic.

Index layout, shared with the jet code:
    dg[i,j,k]      = d_k g_ij
    d2g[i,j,k,l]   = d_k d_l g_ij
    d3g[i,j,k,l,m] = d_k d_l d_m g_ij
    gamma[k,i,j]   = Gamma^k_ij
    dgamma[k,i,j,m] = d_m Gamma^k_ij
    riemann[i,j,k,l], dric[j,l,p] = d_p Ric_jl, dr[i,j,k,l,p] = d_p R_ijkl
"""

from __future__ import annotations

import numpy as np

from ._accel import NUMBA_ENABLED, njit


def _inv_impl(a):
    # pivoted Gauss-Jordan; returns (ok, inverse)
    n = a.shape[0]
    aug = np.zeros((n, 2 * n))
    for i in range(n):
        for j in range(n):
            aug[i, j] = a[i, j]
        aug[i, n + i] = 1.0
    for col in range(n):
        piv = col
        best = abs(aug[col, col])
        for r in range(col + 1, n):
            v = abs(aug[r, col])
            if v > best:
                best = v
                piv = r
        if best == 0.0:
            return False, aug[:, n:]
        if piv != col:
            for j in range(2 * n):
                tmp = aug[col, j]
                aug[col, j] = aug[piv, j]
                aug[piv, j] = tmp
        inv_pv = 1.0 / aug[col, col]
        for j in range(2 * n):
            aug[col, j] *= inv_pv
        for r in range(n):
            if r != col:
                f = aug[r, col]
                if f != 0.0:
                    for j in range(2 * n):
                        aug[r, j] -= f * aug[col, j]
    return True, np.ascontiguousarray(aug[:, n:])


_inv_nb = njit(cache=True, nogil=True)(_inv_impl)
_inv_np = _inv_impl


def matrix_inverse(a: np.ndarray) -> tuple[bool, np.ndarray]:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if NUMBA_ENABLED:
        return _inv_nb(a)
    return _inv_np(a)


@njit(cache=True, nogil=True)
def _ricci_contract_nb(ginv, riemann):
    n = ginv.shape[0]
    ric = np.zeros((n, n))
    for j in range(n):
        for l in range(n):
            s = 0.0
            for i in range(n):
                for k in range(n):
                    s += ginv[i, k] * riemann[i, j, k, l]
            ric[j, l] = s
    return ric


def _ricci_contract_np(ginv, riemann):
    return np.einsum("ik,ijkl->jl", ginv, riemann)


def ricci_from_riemann(ginv: np.ndarray, riemann: np.ndarray) -> np.ndarray:
    """The Ricci contraction; build_frame uses this exact code path."""
    if NUMBA_ENABLED:
        return _ricci_contract_nb(
            np.ascontiguousarray(ginv), np.ascontiguousarray(riemann)
        )
    return _ricci_contract_np(ginv, riemann)


@njit(cache=True, nogil=True)
def _assemble_nb(g, dg, d2g, d3g, ginv, want_dr):
    n = g.shape[0]

    dginv = np.zeros((n, n, n))
    for m in range(n):
        for a in range(n):
            for b in range(n):
                s = 0.0
                for p in range(n):
                    for q in range(n):
                        s += ginv[a, p] * dg[p, q, m] * ginv[q, b]
                dginv[a, b, m] = -s

    # S[i,j,l] = d_i g_jl + d_j g_il - d_l g_ij and its first derivative
    S = np.zeros((n, n, n))
    dS = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for l in range(n):
                S[i, j, l] = dg[j, l, i] + dg[i, l, j] - dg[i, j, l]
                for m in range(n):
                    dS[i, j, l, m] = d2g[j, l, i, m] + d2g[i, l, j, m] - d2g[i, j, l, m]

    gamma = np.zeros((n, n, n))
    dgamma = np.zeros((n, n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                s = 0.0
                for l in range(n):
                    s += ginv[k, l] * S[i, j, l]
                gamma[k, i, j] = 0.5 * s
                for m in range(n):
                    t = 0.0
                    for l in range(n):
                        t += dginv[k, l, m] * S[i, j, l] + ginv[k, l] * dS[i, j, l, m]
                    dgamma[k, i, j, m] = 0.5 * t

    W = np.zeros((n, n, n, n))
    for m in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    s = dgamma[m, i, k, j] - dgamma[m, j, k, i]
                    for p in range(n):
                        s += gamma[m, j, p] * gamma[p, i, k] - gamma[m, i, p] * gamma[p, j, k]
                    W[m, i, j, k] = s

    riemann = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    s = 0.0
                    for m in range(n):
                        s += g[l, m] * W[m, i, j, k]
                    riemann[i, j, k, l] = s

    ric = _ricci_contract_nb(ginv, riemann)

    # second derivatives of g^{-1}: d2ginv[a,b,m,p] = d_p dginv[a,b,m]
    d2ginv = np.zeros((n, n, n, n))
    for m in range(n):
        for p in range(n):
            for a in range(n):
                for b in range(n):
                    s = 0.0
                    for u in range(n):
                        for v in range(n):
                            s += (
                                dginv[a, u, p] * dg[u, v, m] * ginv[v, b]
                                + ginv[a, u] * d2g[u, v, m, p] * ginv[v, b]
                                + ginv[a, u] * dg[u, v, m] * dginv[v, b, p]
                            )
                    d2ginv[a, b, m, p] = -s

    dric = np.zeros((n, n, n))
    if want_dr:
        dr = np.zeros((n, n, n, n, n))
    else:
        dr = np.zeros((0, 0, 0, 0, 0))

    # per derivative direction p: second-derivative slices of Gamma, then dR
    d2gamma_p = np.zeros((n, n, n, n))
    dW_p = np.zeros((n, n, n, n))
    for p in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    for m in range(n):
                        s = 0.0
                        for l in range(n):
                            d2S = (
                                d3g[j, l, i, m, p]
                                + d3g[i, l, j, m, p]
                                - d3g[i, j, l, m, p]
                            )
                            s += (
                                d2ginv[k, l, m, p] * S[i, j, l]
                                + dginv[k, l, m] * dS[i, j, l, p]
                                + dginv[k, l, p] * dS[i, j, l, m]
                                + ginv[k, l] * d2S
                            )
                        d2gamma_p[k, i, j, m] = 0.5 * s
        for m in range(n):
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        s = d2gamma_p[m, i, k, j] - d2gamma_p[m, j, k, i]
                        for q in range(n):
                            s += (
                                dgamma[m, j, q, p] * gamma[q, i, k]
                                + gamma[m, j, q] * dgamma[q, i, k, p]
                                - dgamma[m, i, q, p] * gamma[q, j, k]
                                - gamma[m, i, q] * dgamma[q, j, k, p]
                            )
                        dW_p[m, i, j, k] = s
        for j in range(n):
            for l in range(n):
                s = 0.0
                for i in range(n):
                    for k in range(n):
                        dr_ijkl = 0.0
                        for m in range(n):
                            dr_ijkl += dg[l, m, p] * W[m, i, j, k] + g[l, m] * dW_p[m, i, j, k]
                        if want_dr:
                            dr[i, j, k, l, p] = dr_ijkl
                        s += dginv[i, k, p] * riemann[i, j, k, l] + ginv[i, k] * dr_ijkl
                dric[j, l, p] = s

    return dginv, gamma, dgamma, riemann, ric, dric, dr


def _assemble_np(g, dg, d2g, d3g, ginv, want_dr):
    dginv = -np.einsum("ap,pqm,qb->abm", ginv, dg, ginv)
    S = dg.transpose(2, 0, 1) + dg.transpose(0, 2, 1) - dg
    dS = d2g.transpose(2, 0, 1, 3) + d2g.transpose(0, 2, 1, 3) - d2g
    gamma = 0.5 * np.einsum("kl,ijl->kij", ginv, S)
    dgamma = 0.5 * (
        np.einsum("klm,ijl->kijm", dginv, S) + np.einsum("kl,ijlm->kijm", ginv, dS)
    )
    W = (
        np.einsum("mikj->mijk", dgamma)
        - np.einsum("mjki->mijk", dgamma)
        + np.einsum("mjp,pik->mijk", gamma, gamma)
        - np.einsum("mip,pjk->mijk", gamma, gamma)
    )
    riemann = np.einsum("lm,mijk->ijkl", g, W)
    ric = _ricci_contract_np(ginv, riemann)

    d2ginv = -(
        np.einsum("aup,uvm,vb->abmp", dginv, dg, ginv)
        + np.einsum("au,uvmp,vb->abmp", ginv, d2g, ginv)
        + np.einsum("au,uvm,vbp->abmp", ginv, dg, dginv)
    )
    d2S = (
        d3g.transpose(2, 0, 1, 3, 4)
        + d3g.transpose(0, 2, 1, 3, 4)
        - d3g
    )
    d2gamma = 0.5 * (
        np.einsum("klmp,ijl->kijmp", d2ginv, S)
        + np.einsum("klm,ijlp->kijmp", dginv, dS)
        + np.einsum("klp,ijlm->kijmp", dginv, dS)
        + np.einsum("kl,ijlmp->kijmp", ginv, d2S)
    )
    dW = (
        np.einsum("mikjp->mijkp", d2gamma)
        - np.einsum("mjkip->mijkp", d2gamma)
        + np.einsum("mjqp,qik->mijkp", dgamma, gamma)
        + np.einsum("mjq,qikp->mijkp", gamma, dgamma)
        - np.einsum("miqp,qjk->mijkp", dgamma, gamma)
        - np.einsum("miq,qjkp->mijkp", gamma, dgamma)
    )
    dr = np.einsum("lmp,mijk->ijklp", dg, W) + np.einsum("lm,mijkp->ijklp", g, dW)
    dric = np.einsum("ikp,ijkl->jlp", dginv, riemann) + np.einsum(
        "ik,ijklp->jlp", ginv, dr
    )
    if not want_dr:
        dr = np.zeros((0, 0, 0, 0, 0))
    return dginv, gamma, dgamma, riemann, ric, dric, dr


def assemble(g, dg, d2g, d3g, ginv, want_dr=False):
    """All curvature arrays from metric jets; dr is empty unless requested."""
    if NUMBA_ENABLED:
        return _assemble_nb(
            np.ascontiguousarray(g),
            np.ascontiguousarray(dg),
            np.ascontiguousarray(d2g),
            np.ascontiguousarray(d3g),
            np.ascontiguousarray(ginv),
            want_dr,
        )
    return _assemble_np(g, dg, d2g, d3g, ginv, want_dr)
