import numpy as np
import pytest

from finslerlab import fd
from finslerlab import factors as fac
from finslerlab.automorphisms import (AffineMap, BallAutomorphism, HolomorphicMap, PolydiskAutomorphism, ProductMap,
                                      apply_with_differential, ball_rigidity_metric, identity_map,
                                      origin_pullback, pullback_connection_check, pullback_connection_residual,
                                      pullback_metric, pullback_tensor_check, random_ball_automorphism,
                                      random_ball_point, random_polydisk_automorphism)
from finslerlab.connection import KAHLER_LEVELS, cartan_norm, kahler_residual
from finslerlab.errors import DomainError, InvalidInputError
from finslerlab.geodesics import polydisk_distance
from finslerlab.linalg import cholesky_pd_check
from finslerlab.product_metric import FtkMetric, MetricParams, ProductManifold, fd_complex_tensors

from conftest import K_GRID, T_GRID

P11 = MetricParams(1.0, 2)
PD2 = ProductManifold.polydisk(2)
PD3 = ProductManifold.polydisk(3)


def polydisk_point(rng, n, radius=0.8):
    return radius * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def cvec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def fd_jacobian(fmap, z):
    dz, dzb = fd.wirtinger(fmap, np.asarray(z, dtype=complex), 1e-4)
    return dz, dzb


# ball automorphisms

def test_ball_swaps_center_and_origin():
    phi = BallAutomorphism([0.5, 0.0])
    assert np.allclose(phi([0.5, 0.0]), 0, atol=1e-15)
    assert np.allclose(phi([0.0, 0.0]), [0.5, 0.0], atol=1e-15)


def test_ball_center_zero_is_antipodal():
    assert np.allclose(BallAutomorphism([0, 0])([0.3, 0.1j]), [-0.3, -0.1j])


def test_ball_involution(rng):
    for m in (1, 2, 3):
        for _ in range(50):
            phi = BallAutomorphism(random_ball_point(m, rng))
            z = random_ball_point(m, rng)
            assert np.max(np.abs(phi(phi(z)) - z)) < 1e-10


def test_ball_stays_in_ball(rng):
    for _ in range(50):
        phi = random_ball_automorphism(3, rng)
        assert np.linalg.norm(phi(random_ball_point(3, rng, 0.99))) < 1


def test_ball_unitary_required():
    with pytest.raises(InvalidInputError):
        BallAutomorphism([0.1, 0], np.array([[1, 1], [0, 1]]))
    with pytest.raises(DomainError):
        BallAutomorphism([0.8, 0.6])


def test_ball_inverse_and_derivatives(rng):
    for _ in range(20):
        phi = random_ball_automorphism(3, rng)
        inv = phi.inverse()
        z = random_ball_point(3, rng)
        assert np.max(np.abs(inv(phi(z)) - z)) < 1e-9
        assert np.max(np.abs(inv.jacobian(phi(z)) @ phi.jacobian(z) - np.eye(3))) < 1e-8
        dz, dzb = fd_jacobian(phi, z)
        assert np.max(np.abs(phi.jacobian(z) - dz)) < 1e-7
        assert np.max(np.abs(dzb)) < 1e-7
        Hfd, _ = fd.wirtinger(phi.jacobian, z, 1e-4)
        assert np.max(np.abs(phi.hessian(z) - Hfd)) < 1e-6


# polydisk automorphisms

def test_polydisk_rotation_by_pi():
    rot = PolydiskAutomorphism([np.pi, 0.0, 0.0], [0, 0, 0])
    w, Jv = apply_with_differential(rot, [0.3 + 0.1j, 0.2, -0.5j], [1.0, 2j, 3.0])
    assert np.allclose(w, [-0.3 - 0.1j, 0.2, -0.5j], atol=1e-15)
    assert np.allclose(Jv, [-1.0, 2j, 3.0], atol=1e-15)


def test_polydisk_permutation():
    f = PolydiskAutomorphism([0, 0], [0, 0], [1, 0])
    assert np.array_equal(f([0.1, 0.2j]), [0.2j, 0.1])


def test_polydisk_bad_sigma():
    with pytest.raises(InvalidInputError):
        PolydiskAutomorphism([0, 0], [0, 0], [0, 0])
    with pytest.raises(DomainError):
        PolydiskAutomorphism([0], [1.0])


def test_polydisk_inverse_and_derivatives(rng):
    for _ in range(30):
        f = random_polydisk_automorphism(3, rng)
        inv = f.inverse()
        z = polydisk_point(rng, 3)
        assert np.all(np.abs(f(z)) < 1)
        assert np.max(np.abs(inv(f(z)) - z)) < 1e-9
        assert np.max(np.abs(f(inv(z)) - z)) < 1e-9
        assert np.max(np.abs(inv.jacobian(f(z)) @ f.jacobian(z) - np.eye(3))) < 1e-8
        dz, dzb = fd_jacobian(f, z)
        assert np.max(np.abs(f.jacobian(z) - dz)) < 1e-7
        assert np.max(np.abs(dzb)) < 1e-7
        Hfd, _ = fd.wirtinger(f.jacobian, z, 1e-4)
        assert np.max(np.abs(f.hessian(z) - Hfd)) < 1e-6


def test_identity_and_affine():
    z, v = np.array([0.1, 0.2j]), np.array([1.0, -1j])
    w, Jv = apply_with_differential(identity_map(2), z, v)
    assert np.array_equal(w, z) and np.array_equal(Jv, v)
    A = AffineMap([[1, 2j], [0, 3]], [1, 1])
    assert np.allclose(A.inverse()(A(z)), z)
    assert np.allclose(A.hessian(z), 0)


def test_generic_map_uses_finite_differences():
    class Square(HolomorphicMap):
        dim = 2

        def __call__(self, z):
            return np.asarray(z, dtype=complex) ** 2

    z = np.array([0.3 + 0.1j, -0.2j])
    assert np.allclose(Square().jacobian(z), np.diag(2 * z), atol=1e-8)
    H = Square().hessian(z)
    assert np.allclose(H[[0, 1], [0, 1], [0, 1]], 2, atol=1e-6)


def test_product_map(rng):
    mfd = ProductManifold((fac.bergman_ball(2), fac.poincare_disk()))
    phi, psi = random_ball_automorphism(2, rng), random_polydisk_automorphism(1, rng)
    g = ProductMap([phi, psi], mfd)
    z = np.array([0.1, 0.2j, -0.3])
    assert np.allclose(g(z), np.concatenate([phi(z[:2]), psi(z[2:])]))
    assert np.allclose(g.inverse()(g(z)), z, atol=1e-12)
    dz, _ = fd_jacobian(g, z)
    assert np.max(np.abs(g.jacobian(z) - dz)) < 1e-7


# pullback metric

def test_pullback_identity(rng):
    pb = pullback_metric(PD2, identity_map(2), P11)
    base = FtkMetric(PD2, P11)
    for _ in range(10):
        z, v = polydisk_point(rng, 2), cvec(rng, 2)
        assert pb.G(z, v) == base.G(z, v)


def test_polydisk_pullback_is_isometry(rng):
    for i in range(100):
        p = MetricParams(T_GRID[i % 4], K_GRID[i % 3])
        base = FtkMetric(PD3, p)
        pb = pullback_metric(base, random_polydisk_automorphism(3, rng))
        z, v = polydisk_point(rng, 3), cvec(rng, 3)
        assert pb.value(z, v) == pytest.approx(base.value(z, v), abs=1e-9 * max(1.0, base.value(z, v)))


def test_polydisk_automorphisms_preserve_distance(rng):
    for _ in range(20):
        f = random_polydisk_automorphism(3, rng)
        a, b = polydisk_point(rng, 3), polydisk_point(rng, 3)
        assert polydisk_distance(P11, f(a), f(b)).value == pytest.approx(polydisk_distance(P11, a, b).value, abs=1e-9)


def test_pullback_chain_rule_gradient(rng):
    pb = pullback_metric(PD2, random_polydisk_automorphism(2, rng), P11)
    z, v = polydisk_point(rng, 2), cvec(rng, 2)
    dv, _ = fd.wirtinger(lambda w: pb.G(z, w), v, 1e-4)
    assert np.allclose(pb.dG_dv(z, v), dv, rtol=1e-7, atol=1e-9)


def test_pullback_strongly_pseudoconvex(rng):
    for t in (0.0, 1.0, 5.0):
        base = FtkMetric(PD2, MetricParams(t, 3))
        for _ in range(5):
            pb = pullback_metric(base, random_polydisk_automorphism(2, rng))
            h, _ = fd_complex_tensors(pb, polydisk_point(rng, 2), cvec(rng, 2))
            assert cholesky_pd_check(h).is_pd


def test_pullback_by_ball_map_is_pd(rng):
    mfd = ProductManifold((fac.bergman_ball(2), fac.poincare_disk()))
    base = FtkMetric(mfd, MetricParams(1.0, 2))
    g = ProductMap([random_ball_automorphism(2, rng), random_polydisk_automorphism(1, rng)], mfd)
    z, v = np.array([0.1, 0.2j, -0.3]), cvec(rng, 3)
    pb = pullback_metric(base, g)
    h, _ = fd_complex_tensors(pb, z, v)
    assert cholesky_pd_check(h).is_pd
    assert pb.G(z, v) == pytest.approx(base.G(z, v), rel=1e-9)


# transformation laws

def test_tensor_law_random_maps(rng):
    for i in range(12):
        p = MetricParams(T_GRID[i % 4], K_GRID[i % 3])
        g = random_polydisk_automorphism(2, rng)
        assert pullback_tensor_check(PD2, g, polydisk_point(rng, 2), cvec(rng, 2), p) < 1e-4


def test_tensor_law_affine():
    A = AffineMap([[1.0, 0.5j], [0.2, 2.0]], [0.1, 0.0])
    mfd = ProductManifold((fac.euclidean(2),))
    assert pullback_tensor_check(mfd, A, [0.3, 0.1j], [1.0, 1j], P11) < 1e-4


def test_connection_law_identity():
    assert pullback_connection_residual(PD2, identity_map(2), [0.1, 0.2j], [1, 1j], P11) < 1e-6


def test_connection_law_single_moebius():
    g = PolydiskAutomorphism([0.0, 0.0], [0.4 + 0.2j, 0.0])
    rep = pullback_connection_check(PD2, P11, g, [0.1, 0.2j], [1, 1j])
    assert rep.passed and rep.max_deviation < 1e-4


def test_connection_law_affine_flat():
    A = AffineMap([[1.0, 0.5j], [0.2, 2.0]], [0.1, 0.0])
    mfd = ProductManifold((fac.euclidean(2),))
    assert pullback_connection_residual(mfd, A, [0.3, 0.1j], [1.0, 1j], P11) < 1e-6


def test_connection_law_random_maps(rng):
    for i in range(6):
        p = MetricParams(T_GRID[i % 4], K_GRID[i % 3])
        g = random_polydisk_automorphism(2, rng)
        rep = pullback_connection_check(PD2, p, g, polydisk_point(rng, 2), cvec(rng, 2))
        assert rep.passed, rep.line()


def test_kahler_transport(rng):
    g = random_polydisk_automorphism(2, rng)
    pb = pullback_metric(PD2, g, MetricParams(5.0, 3))
    z, v = polydisk_point(rng, 2), cvec(rng, 2)
    for level in KAHLER_LEVELS:
        assert kahler_residual(pb, None, z, v, level) < 1e-4


def test_cartan_witness(rng):
    g = random_polydisk_automorphism(2, rng)
    z, v = polydisk_point(rng, 2), cvec(rng, 2)
    flat = pullback_metric(PD2, g, MetricParams(0.0, 2))
    curved = pullback_metric(PD2, g, MetricParams(1.0, 2))
    assert cartan_norm(flat, None, z, v) < 1e-6
    assert cartan_norm(curved, None, z, v) > 1e-3


# ball rigidity

def test_rigidity_origin():
    v = np.array([1.0, 2j, -1.0])
    assert ball_rigidity_metric(2.5, np.zeros(3), v) == pytest.approx(2.5 * 6.0, rel=1e-15)


def test_rigidity_example():
    # [DERIVED] pullback through phi_z
    assert origin_pullback(1.0, [0.5, 0.0], [0.0, 1.0]) == pytest.approx(4 / 3, rel=1e-12)
    assert ball_rigidity_metric(1.0, [0.5, 0.0], [0.0, 1.0]) == pytest.approx(4 / 3, rel=1e-14)


def test_rigidity_errors():
    with pytest.raises(InvalidInputError):
        ball_rigidity_metric(0.0, [0, 0], [1, 0])
    with pytest.raises(DomainError):
        ball_rigidity_metric(1.0, [0.8, 0.6], [1, 0])


@pytest.mark.parametrize("c", [1.0, 2.5])
def test_rigidity_matches_pullback(c, rng):
    for m in (2, 3):
        for _ in range(100):
            z, v = random_ball_point(m, rng), cvec(rng, m)
            F2 = ball_rigidity_metric(c, z, v)
            assert origin_pullback(c, z, v) == pytest.approx(F2, abs=1e-9 * max(1.0, F2))


@pytest.mark.parametrize("c", [1.0, 2.5])
def test_rigidity_is_bergman_factor(c, rng):
    f = fac.bergman_ball(3)
    for _ in range(20):
        z, v = random_ball_point(3, rng), cvec(rng, 3)
        assert ball_rigidity_metric(c, z, v) == pytest.approx(c * fac.q_value(f, z, v), rel=1e-12)


def test_rigidity_invariance(rng):
    for _ in range(50):
        phi = random_ball_automorphism(3, rng)
        z, v = random_ball_point(3, rng), cvec(rng, 3)
        w, Jv = apply_with_differential(phi, z, v)
        F2 = ball_rigidity_metric(1.7, z, v)
        assert ball_rigidity_metric(1.7, w, Jv) == pytest.approx(F2, abs=1e-9 * max(1.0, F2))
