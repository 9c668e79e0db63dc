"""Curvature frame tests.

Ground truth comes from three independent sources: hand-frozen values for
the worked-example chart (computed once with a computer algebra system and
pasted here as literals), the constant-curvature model spaces where every
tensor has a closed form, and finite-difference recomputation of the same
quantities from lower-order data.
"""

from __future__ import annotations

import numpy as np
import pytest

from eqcheck import _accel, _kernels
from eqcheck import curvature as cv
from eqcheck.errors import (
    CheckPreconditionError,
    DegeneratePlaneError,
    ManifoldValidationError,
)
from eqcheck.fixtures import fixture_path
from eqcheck.manifold import load_manifold

from gen import random_metric_spec

P0 = np.array([1.0, 2.0, 0.0, 0.0])


@pytest.fixture(scope="module")
def paper():
    return load_manifold(fixture_path("paper-example"))


@pytest.fixture(scope="module")
def sphere2():
    return load_manifold(fixture_path("sphere2"))


@pytest.fixture(scope="module")
def sphere3():
    return load_manifold(fixture_path("sphere3"))


@pytest.fixture(scope="module")
def hyperbolic2():
    return load_manifold(fixture_path("hyperbolic2"))


def test_christoffel_frozen_values(paper):
    f = cv.build_frame(paper, P0)
    want = np.zeros((4, 4, 4))
    want[0, 0, 1] = want[0, 1, 0] = 0.25
    want[0, 1, 1] = -0.25
    want[1, 0, 0] = -0.5
    want[1, 0, 1] = want[1, 1, 0] = 0.5
    assert np.max(np.abs(f.gamma - want)) < 1e-12


def test_christoffel_symmetry_lower_pair(paper):
    f = cv.build_frame(paper, np.array([1.5, 2.5, 0.4, 0.6]))
    assert np.array_equal(f.gamma, f.gamma.transpose(0, 2, 1))


def test_ricci_frozen_values(paper):
    # (x1 + x2)/(4 x1^2 x2) and (x1 + x2)/(4 x1 x2^2) at (1, 2): 3/8, 3/16
    f = cv.build_frame(paper, P0)
    want = np.diag([0.375, 0.1875, 0.0, 0.0])
    assert np.max(np.abs(f.ric_computed - want)) < 1e-9
    assert abs(f.r - 0.375) < 1e-9


def test_riemann_frozen_component(paper):
    # R_1212 = (x1 + x2)/(4 x1 x2) = 3/8 at (1, 2)
    f = cv.build_frame(paper, P0)
    assert abs(f.riemann[0, 1, 0, 1] - 0.375) < 1e-12
    assert abs(f.riemann[2, 3, 2, 3]) < 1e-15


def fd_ricci(spec, point, h=1e-5):
    """Textbook Ricci from finite differences of the Christoffel symbols.

    Ric_jk = d_i Gamma^i_jk - d_j Gamma^i_ik
             + Gamma^i_ip Gamma^p_jk - Gamma^i_jp Gamma^p_ik
    """
    point = np.asarray(point, dtype=float)
    n = point.size
    gam = cv.build_frame(spec, point).gamma
    dgam = np.zeros((n, n, n, n))
    for m in range(n):
        qp = point.copy()
        qp[m] += h
        qm = point.copy()
        qm[m] -= h
        dgam[..., m] = (cv.build_frame(spec, qp).gamma - cv.build_frame(spec, qm).gamma) / (2 * h)
    return (
        np.einsum("ijki->jk", dgam)
        - np.einsum("iikj->jk", dgam)
        + np.einsum("iip,pjk->jk", gam, gam)
        - np.einsum("ijp,pik->jk", gam, gam)
    )


def test_ricci_against_fd_recomputation(paper):
    f = cv.build_frame(paper, P0)
    assert np.max(np.abs(f.ric_computed - fd_ricci(paper, P0))) < 1e-5


def test_dgamma_against_fd(paper):
    p = np.array([1.25, 0.8, 0.1, 0.2])
    f = cv.build_frame(paper, p)
    h = 1e-5
    for m in range(4):
        qp = p.copy()
        qp[m] += h
        qm = p.copy()
        qm[m] -= h
        fd = (cv.build_frame(paper, qp).gamma - cv.build_frame(paper, qm).gamma) / (2 * h)
        assert np.max(np.abs(f.dgamma[..., m] - fd)) < 1e-8


@pytest.mark.parametrize("name", ["flat-r2", "flat-r3", "flat-r4"])
def test_flat_space_curvature_vanishes(name):
    spec = load_manifold(fixture_path(name))
    for p in spec.samples:
        f = cv.build_frame(spec, p)
        assert np.max(np.abs(f.gamma)) == 0.0
        assert np.max(np.abs(f.riemann)) == 0.0
        assert np.max(np.abs(f.ric_computed)) == 0.0


def test_sphere2_einstein(sphere2):
    for p in sphere2.samples:
        f = cv.build_frame(sphere2, p)
        assert np.max(np.abs(f.ric_computed - f.g)) < 1e-12
        assert abs(f.r - 2.0) < 1e-12


def test_sphere3_einstein(sphere3):
    for p in sphere3.samples:
        f = cv.build_frame(sphere3, p)
        assert np.max(np.abs(f.ric_computed - 2.0 * f.g)) < 1e-9
        assert abs(f.r - 6.0) < 1e-9


@pytest.mark.parametrize("name,k", [("sphere2", 1.0), ("sphere3", 1.0), ("hyperbolic2", -1.0)])
def test_constant_curvature_riemann_shape(name, k):
    spec = load_manifold(fixture_path(name))
    for p in spec.samples:
        f = cv.build_frame(spec, p)
        want = (k / 2.0) * cv.kulkarni_nomizu(f.g, f.g)
        assert np.max(np.abs(f.riemann - want)) < 1e-9


def test_sectional_curvature_model_spaces(sphere2, hyperbolic2):
    rng = np.random.default_rng(7)
    for spec, k in ((sphere2, 1.0), (hyperbolic2, -1.0)):
        for p in spec.samples:
            f = cv.build_frame(spec, p)
            for _ in range(8):
                x = rng.normal(size=2)
                y = rng.normal(size=2)
                if abs(x[0] * y[1] - x[1] * y[0]) < 1e-3:
                    continue
                assert abs(cv.sectional_curvature(f, x, y) - k) < 1e-9


def test_sectional_curvature_mixed_planes(paper):
    # the chart splits into a curved 2-block and a flat 2-block
    f = cv.build_frame(paper, P0)
    e = np.eye(4)
    assert abs(cv.sectional_curvature(f, e[0], e[1]) - 0.1875) < 1e-12
    assert abs(cv.sectional_curvature(f, e[2], e[3])) < 1e-15
    assert abs(cv.sectional_curvature(f, e[0], e[2])) < 1e-15


def test_sectional_degenerate_plane_rejected(sphere2):
    f = cv.build_frame(sphere2, np.array([0.7853981633974483, 0.0]))
    with pytest.raises(DegeneratePlaneError):
        cv.sectional_curvature(f, [1.0, 0.5], [2.0, 1.0])
    with pytest.raises(DegeneratePlaneError):
        cv.sectional_curvature(f, [1.0, 0.5], [0.0, 0.0])


def test_kulkarni_nomizu_symmetries():
    rng = np.random.default_rng(11)
    h = rng.normal(size=(4, 4))
    h = h + h.T
    k = rng.normal(size=(4, 4))
    k = k + k.T
    t = cv.kulkarni_nomizu(h, k)
    # identities hold termwise; only summation-order rounding remains
    assert np.max(np.abs(t + t.transpose(1, 0, 2, 3))) < 1e-14
    assert np.max(np.abs(t + t.transpose(0, 1, 3, 2))) < 1e-14
    assert np.max(np.abs(t - cv.kulkarni_nomizu(k, h).transpose(2, 3, 0, 1))) < 1e-14
    # first Bianchi holds for h ^ k with both factors symmetric
    cyc = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    assert np.max(np.abs(cyc)) < 1e-12


def test_metric_compatibility(paper, sphere3):
    for spec in (paper, sphere3):
        for p in spec.samples:
            assert cv.metric_compatibility_residual(cv.build_frame(spec, p)) < 1e-10


def test_riemann_symmetries_worked_example(paper):
    for p in paper.samples:
        res = cv.riemann_symmetry_residuals(cv.build_frame(paper, p))
        assert max(res.values()) < 1e-9


def test_second_bianchi_worked_example(paper):
    for p in paper.samples:
        assert cv.second_bianchi_residual(cv.build_frame(paper, p)) < 1e-7


def test_random_metrics_identities():
    rng = np.random.default_rng(2024)
    for n in (2, 3, 4):
        for _ in range(2):
            spec = random_metric_spec(rng, n)
            for p in spec.samples:
                f = cv.build_frame(spec, p)
                assert np.max(np.abs(f.g @ f.g_inv - np.eye(n))) < 1e-12
                assert max(cv.riemann_symmetry_residuals(f).values()) < 1e-9
                assert cv.metric_compatibility_residual(f) < 1e-10
                assert cv.second_bianchi_residual(f) < 1e-7


def test_nabla_ric_frozen_values(paper):
    # nabla_1 Ric_11 = -5/8, nabla_1 Ric_22 = -5/16, nabla_2 Ric_12 = 0 at (1, 2)
    f = cv.build_frame(paper, P0)
    nr = f.nabla_ric
    assert abs(nr[0, 0, 0] - (-0.625)) < 1e-12
    assert abs(nr[0, 1, 1] - (-0.3125)) < 1e-12
    assert abs(nr[1, 0, 1]) < 1e-15


def test_nabla_ric_against_fd(paper):
    p = np.array([1.5, 2.5, 0.4, 0.6])
    f = cv.build_frame(paper, p)
    h = 1e-5
    n = 4
    dric = np.zeros((n, n, n))
    for m in range(n):
        qp = p.copy()
        qp[m] += h
        qm = p.copy()
        qm[m] -= h
        dric[m] = (
            cv.build_frame(paper, qp).ric_computed - cv.build_frame(paper, qm).ric_computed
        ) / (2 * h)
    want = (
        dric
        - np.einsum("mki,mj->kij", f.gamma, f.ric_computed)
        - np.einsum("mkj,im->kij", f.gamma, f.ric_computed)
    )
    assert np.max(np.abs(f.nabla_ric - want)) < 1e-6


def test_nabla_riemann_against_fd(paper):
    p = np.array([2.0, 1.0, 0.3, 0.7])
    f = cv.build_frame(paper, p)
    h = 1e-5
    n = 4
    got = f.nabla_riemann()
    for m in range(n):
        qp = p.copy()
        qp[m] += h
        qm = p.copy()
        qm[m] -= h
        dr = (cv.build_frame(paper, qp).riemann - cv.build_frame(paper, qm).riemann) / (2 * h)
        corr = (
            np.einsum("pi,pjkl->ijkl", f.gamma[:, m, :].T, f.riemann)
            + np.einsum("pj,ipkl->ijkl", f.gamma[:, m, :].T, f.riemann)
            + np.einsum("pk,ijpl->ijkl", f.gamma[:, m, :].T, f.riemann)
            + np.einsum("pl,ijkp->ijkl", f.gamma[:, m, :].T, f.riemann)
        )
        assert np.max(np.abs(got[m] - (dr - corr))) < 1e-6


def test_nabla_riemann_cached(paper):
    f = cv.build_frame(paper, P0)
    assert f.nabla_riemann() is f.nabla_riemann()


def test_lie_derivative_killing_fields():
    flat = load_manifold(fixture_path("flat-r2"))
    f = cv.build_frame(flat, np.array([0.3, -0.7]))
    assert np.max(np.abs(cv.lie_metric(f, "rotation"))) == 0.0
    assert np.max(np.abs(cv.lie_metric(f, "e1"))) == 0.0


def test_lie_derivative_position_is_twice_metric():
    flat = load_manifold(fixture_path("flat-r2"))
    f = cv.build_frame(flat, np.array([0.3, -0.7]))
    assert np.max(np.abs(cv.lie_metric(f, "position") - 2.0 * f.g)) < 1e-15


def test_lie_derivative_sphere_rotation(sphere2):
    for p in sphere2.samples:
        f = cv.build_frame(sphere2, p)
        assert np.max(np.abs(cv.lie_metric(f, "dphi"))) < 1e-12


def test_lie_derivative_hyperbolic_killing(hyperbolic2):
    for p in hyperbolic2.samples:
        f = cv.build_frame(hyperbolic2, p)
        assert np.max(np.abs(cv.lie_metric(f, "xshift"))) < 1e-12
        assert np.max(np.abs(cv.lie_metric(f, "dilate"))) < 1e-12


def test_covariant_field_flat_position():
    flat = load_manifold(fixture_path("flat-r2"))
    f = cv.build_frame(flat, np.array([0.3, -0.7]))
    assert np.array_equal(cv.covariant_field(f, "position"), np.eye(2))
    assert cv.divergence(f, "position") == 2.0


def test_divergence_sphere_theta_field(sphere2):
    # div(d/dtheta) = cot(theta); equals 1 at theta = pi/4
    f = cv.build_frame(sphere2, np.array([0.7853981633974483, 0.0]))
    assert abs(cv.divergence(f, "dtheta") - 1.0) < 1e-12


def test_geodesic_vector_sphere_parallel(sphere2):
    # nabla_X X for X = d/dphi has norm sin(theta) cos(theta); 1/2 at pi/4
    f = cv.build_frame(sphere2, np.array([0.7853981633974483, 0.0]))
    acc = cv.geodesic_vector(f, "dphi")
    norm = float(np.sqrt(acc @ f.g @ acc))
    assert abs(norm - 0.5) < 1e-10
    assert abs(acc[0] + 0.5) < 1e-10


def test_geodesic_vector_flat_straight_field():
    flat = load_manifold(fixture_path("flat-r2"))
    f = cv.build_frame(flat, np.array([0.3, -0.7]))
    assert np.max(np.abs(cv.geodesic_vector(f, "e1"))) == 0.0


def test_riemann_operator_lowers_back(paper):
    f = cv.build_frame(paper, P0)
    w = cv.riemann_operator(f)
    back = np.einsum("lm,mijk->ijkl", f.g, w)
    assert np.max(np.abs(back - f.riemann)) < 1e-12


def test_ricci_contraction_shared_code_path(paper):
    f = cv.build_frame(paper, P0)
    assert np.array_equal(f.ric_computed, cv.ricci_from_riemann(f.g_inv, f.riemann))


def test_mode_selects_ricci_tensor(paper):
    fc = cv.build_frame(paper, P0, mode="computed")
    fd = cv.build_frame(paper, P0, mode="declared-ricci")
    assert np.array_equal(fc.riemann, fd.riemann)
    assert np.array_equal(fc.ric, fc.ric_computed)
    assert np.array_equal(fd.ric, fd.ric_declared)
    # declared table on this chart reads 1/(4 x1 x2) - 1/(4 x1^2) etc.
    assert abs(fd.ric[0, 0] - (-0.125)) < 1e-15
    assert abs(fd.ric[1, 1] - (-0.0625)) < 1e-15
    assert abs(fd.r - float(np.einsum("ij,ij->", fd.g_inv, fd.ric_declared))) < 1e-15


def test_mode_declared_requires_table(sphere2):
    with pytest.raises(CheckPreconditionError):
        cv.build_frame(sphere2, sphere2.samples[0], mode="declared")


def test_unknown_mode_rejected(paper):
    with pytest.raises(ValueError):
        cv.build_frame(paper, P0, mode="sideways")


def test_singular_metric_rejected(sphere2):
    with pytest.raises(ManifoldValidationError):
        cv.build_frame(sphere2, np.array([0.0, 0.3]))


def test_ricci_operator_and_square(paper):
    f = cv.build_frame(paper, P0, mode="declared")
    s = f.ric_declared
    assert np.max(np.abs(f.q - f.g_inv @ s)) == 0.0
    assert np.max(np.abs(f.ric2 - s @ f.g_inv @ s)) == 0.0
    # Ric^2 stays symmetric
    assert np.max(np.abs(f.ric2 - f.ric2.T)) < 1e-15


@pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba not installed")
def test_backends_agree():
    rng = np.random.default_rng(5)
    spec = random_metric_spec(rng, 3)
    p = spec.samples[0]
    g, dg, d2g, d3g = spec.metric_jets(p)
    ok, ginv = _kernels._inv_nb(np.ascontiguousarray(g))
    assert ok
    out_nb = _kernels._assemble_nb(g, dg, d2g, d3g, ginv, True)
    out_np = _kernels._assemble_np(g, dg, d2g, d3g, ginv, True)
    for a, b in zip(out_nb, out_np):
        assert np.max(np.abs(np.asarray(a) - np.asarray(b))) < 1e-12
