import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finslerlab import connection as conn
from finslerlab import factors as fac
from finslerlab.errors import InvalidInputError, ZeroSectionError
from finslerlab.product_metric import MetricParams, ProductManifold, sample_point, sample_vector

from conftest import MIXES, ConformalControl, params_strategy

P11 = MetricParams(1.0, 2)
FLAT = ProductManifold((fac.euclidean(2), fac.euclidean(1)))
KAHLER_MIXES = ("polydisk2", "ball2xdisk", "fs1xfs2", "flat2xdisk")


# nonlinear connection

def test_nonlinear_polydisk_example(polydisk2):
    # [DERIVED] the generic formula (finite-difference z-derivative) against the closed form
    z, v = np.array([0.5, 0.0]), np.array([1.0, 1.0])
    for p in (P11, MetricParams(0, 3), MetricParams(5, 4)):
        g = conn.nonlinear_connection(polydisk2, p, z, v)
        assert g[0, 0] == pytest.approx(4 / 3, abs=1e-8)
        assert abs(g[1, 0]) < 1e-8 and abs(g[0, 1]) < 1e-8
        assert np.allclose(g, conn.nonlinear_connection_closed_form(polydisk2, z, v), atol=1e-5)


def test_nonlinear_flat():
    assert np.allclose(conn.nonlinear_connection(FLAT, P11, [1, 2j, 0.5], [1, 1, 1j]), 0, atol=1e-12)


def test_nonlinear_scaling(polydisk2):
    z, v = np.array([0.2 + 0.3j, -0.4]), np.array([1.0, 2j])
    g1 = conn.nonlinear_connection(polydisk2, P11, z, v)
    assert np.allclose(conn.nonlinear_connection(polydisk2, P11, z, 2 * v), 2 * g1, rtol=1e-12)


def test_nonlinear_zero_section(polydisk2):
    with pytest.raises(ZeroSectionError):
        conn.nonlinear_connection(polydisk2, P11, [0, 0], [0, 0])


@pytest.mark.parametrize("name", sorted(MIXES))
def test_nonlinear_matches_closed_form(name, rng):
    mfd = MIXES[name]
    for t, k in ((0.5, 2), (5.0, 3)):
        z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
        g = conn.nonlinear_connection(mfd, MetricParams(t, k), z, v)
        ref = conn.nonlinear_connection_closed_form(mfd, z, v)
        assert np.max(np.abs(g - ref)) < 1e-5 * max(1.0, np.abs(ref).max())


@given(params_strategy, st.integers(0, 2**32 - 1), st.floats(0.2, 5), st.floats(0, 2 * np.pi))
@settings(max_examples=20, deadline=None)
def test_nonlinear_complex_homogeneity(p, seed, r, theta):
    mfd = MIXES["ball2xdisk"]
    rng = np.random.default_rng(seed)
    z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
    lam = r * np.exp(1j * theta)
    g = conn.nonlinear_connection(mfd, p, z, v)
    g_lam = conn.nonlinear_connection(mfd, p, z, lam * v)
    assert np.max(np.abs(g_lam - lam * g)) <= 1e-8 * max(1.0, np.abs(lam * g).max())


# horizontal coefficients

def test_horizontal_polydisk_example(polydisk2):
    # [DERIVED] finite differences of the closed-form connection
    H = conn.horizontal_coefficients(polydisk2, P11, [0.5, 0.0], [1.0, 0.3j])
    assert H[0, 0, 0] == pytest.approx(4 / 3, abs=1e-8)
    mask = np.ones((2, 2, 2), bool)
    mask[0, 0, 0] = mask[1, 1, 1] = False
    assert np.max(np.abs(H[mask])) < 1e-8


def test_horizontal_flat():
    assert np.allclose(conn.horizontal_coefficients(FLAT, P11, [1, 2j, 0.5], [1, 1, 1j]), 0, atol=1e-10)


def test_horizontal_fiber_independent_polydisk(polydisk2, rng):
    z = np.array([0.3 - 0.2j, 0.5j])
    H1 = conn.horizontal_coefficients(polydisk2, P11, z, sample_vector(polydisk2, rng))
    H2 = conn.horizontal_coefficients(polydisk2, P11, z, sample_vector(polydisk2, rng))
    assert np.max(np.abs(H1 - H2)) < 1e-6


@pytest.mark.parametrize("name", sorted(MIXES))
def test_horizontal_contraction_and_structure(name, rng):
    mfd = MIXES[name]
    p = MetricParams(1.0, 3)
    z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
    H = conn.horizontal_coefficients(mfd, p, z, v)
    g = conn.nonlinear_connection(mfd, p, z, v)
    assert np.max(np.abs(np.einsum("gba,b->ga", H, v) - g)) <= 1e-8 * max(1.0, np.abs(g).max())
    ref = conn.horizontal_closed_form(mfd, z)
    assert np.max(np.abs(H - ref)) < 1e-5
    # cross-factor blocks vanish
    for s1 in mfd.slices:
        for s2 in mfd.slices:
            if s1 != s2:
                assert np.max(np.abs(H[s1, s2, :]), initial=0) < 1e-5
                assert np.max(np.abs(H[s1, :, s2]), initial=0) < 1e-5


# Berwald

@pytest.mark.parametrize("name", sorted(MIXES))
def test_berwald_passes(name, rng):
    mfd = MIXES[name]
    for p in (MetricParams(0.5, 2), MetricParams(5.0, 4)):
        z = sample_point(mfd, rng)
        r = conn.check_berwald(mfd, p, z, [sample_vector(mfd, rng) for _ in range(10)])
        assert r.passed and r.samples == 45


def test_berwald_flat_zero(rng):
    r = conn.check_berwald(FLAT, P11, [0.5, 1j, 2], [sample_vector(FLAT, rng) for _ in range(3)])
    assert r.passed and r.max_deviation < 1e-10


def test_berwald_needs_two_samples(polydisk2):
    with pytest.raises(InvalidInputError):
        conn.check_berwald(polydisk2, P11, [0, 0], [[1, 0]])


# real spray

def test_real_spray_flat():
    x = FLAT.to_real(np.array([1, 2j, 0.5]))
    assert np.allclose(conn.real_spray(FLAT, P11, x, np.arange(1.0, 7.0)), 0, atol=1e-10)


def test_real_spray_origin(polydisk2, rng):
    u = polydisk2.to_real(sample_vector(polydisk2, rng))
    assert np.allclose(conn.real_spray(polydisk2, P11, np.zeros(4), u), 0, atol=1e-10)


def test_real_spray_example(polydisk2):
    # [DERIVED] Levi-Civita oracle of the disk factor
    x = polydisk2.to_real(np.array([0.5, 0.0]))
    u = polydisk2.to_real(np.array([1.0, 0.0]))
    s = conn.real_spray(polydisk2, P11, x, u)
    lc = fac.levi_civita(fac.poincare_disk(), x[:2], u[:2]) @ u[:2]
    assert s[0] == pytest.approx(lc[0], rel=1e-8)
    assert s[0] == pytest.approx(4 / 3, rel=1e-8)


@pytest.mark.parametrize("name", sorted(MIXES))
def test_real_spray_matches_levi_civita(name, rng):
    mfd = MIXES[name]
    for t, k in ((0.0, 2), (1.0, 3), (5.0, 4)):
        x, u = mfd.to_real(sample_point(mfd, rng)), mfd.to_real(sample_vector(mfd, rng))
        s = conn.real_spray(mfd, MetricParams(t, k), x, u)
        ref = conn.real_spray_closed_form(mfd, x, u)
        assert np.max(np.abs(s - ref)) <= 1e-4 * max(1.0, np.abs(ref).max())


@pytest.mark.parametrize("name", sorted(MIXES))
def test_real_spray_is_quadratic(name, rng):
    mfd = MIXES[name]
    x = mfd.to_real(sample_point(mfd, rng))
    us = [mfd.to_real(sample_vector(mfd, rng)) for _ in range(3)]
    assert conn.check_real_berwald(mfd, MetricParams(5.0, 3), x, us).passed


def test_polarization_needs_three(polydisk2):
    with pytest.raises(InvalidInputError):
        conn.polarization_residual(polydisk2, P11, np.zeros(4), [np.ones(4), np.ones(4)])


# Kähler

@pytest.mark.parametrize("name", KAHLER_MIXES)
def test_kahler_levels(name, rng):
    mfd = MIXES[name]
    z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
    res = {lv: conn.kahler_residual(mfd, P11, z, v, lv) for lv in conn.KAHLER_LEVELS}
    assert all(r < 1e-5 for r in res.values())
    for lv in conn.KAHLER_LEVELS:
        assert conn.check_kahler(mfd, P11, z, v, lv).passed


def test_kahler_flat_zero():
    for lv in conn.KAHLER_LEVELS:
        assert conn.kahler_residual(FLAT, P11, [0.5, 1j, 2], [1, 2, 3j], lv) < 1e-10


def test_kahler_unknown_level(polydisk2):
    with pytest.raises(InvalidInputError):
        conn.kahler_residual(polydisk2, P11, [0, 0], [1, 0], "medium")


def test_kahler_levels_nested_on_control(polydisk2):
    # strong-pass => kahler-pass => weak-pass, on a metric with nonzero torsion contractions
    metric = ConformalControl(polydisk2, MetricParams(1.0, 2))
    z, v = np.array([0.3 + 0.1j, -0.2j]), np.array([1.0, 0.5 + 0.5j])
    res = [conn.kahler_residual(metric, None, z, v, lv) for lv in conn.KAHLER_LEVELS]
    passes = [r < 1e-5 for r in res]
    assert passes == sorted(passes)     # False entries (if any) come first


# complex spray

def test_complex_spray_flat():
    s = conn.complex_spray(FLAT, P11, [0.5, 1j, 2], [1, 2, 3j])
    assert np.allclose(s.G_alpha, 0, atol=1e-12) and np.allclose(s.G_numu, 0, atol=1e-8)


def test_complex_spray_example(polydisk2):
    s = conn.complex_spray(polydisk2, P11, [0.5, 0.0], [1.0, 0.0])
    assert s.G_alpha[0] == pytest.approx(2 / 3, abs=1e-9)


def test_complex_spray_degree_two(polydisk2):
    z, v, lam = np.array([0.2, 0.4j]), np.array([1.0, -0.5j]), 1.5 - 2j
    s1 = conn.complex_spray(polydisk2, P11, z, v).G_alpha
    s2 = conn.complex_spray(polydisk2, P11, z, lam * v).G_alpha
    assert np.allclose(s2, lam**2 * s1, rtol=1e-10)


def test_complex_spray_weakly_berwald(rng):
    mfd = MIXES["ball2xdisk"]
    z = sample_point(mfd, rng)
    a = conn.complex_spray(mfd, P11, z, sample_vector(mfd, rng)).G_numu
    b = conn.complex_spray(mfd, P11, z, sample_vector(mfd, rng)).G_numu
    assert np.max(np.abs(a - b)) < 1e-5


# conformal control fixture

def test_control_fixture_is_complex_berwald(polydisk2, rng):
    metric = ConformalControl(polydisk2, MetricParams(5.0, 2))
    z = np.array([0.3 + 0.1j, -0.2j])
    assert conn.check_berwald(metric, None, z, [sample_vector(polydisk2, rng) for _ in range(4)]).passed


def test_control_fixture_fails_real_spray_quadraticity(polydisk2, rng):
    metric = ConformalControl(polydisk2, MetricParams(5.0, 2))
    x = polydisk2.to_real(np.array([0.3 + 0.1j, -0.2j]))
    us = [polydisk2.to_real(sample_vector(polydisk2, rng)) for _ in range(3)]
    assert conn.polarization_residual(metric, None, x, us) > 1e-2
    assert not conn.check_real_berwald(metric, None, x, us).passed


def test_control_fixture_hermitian_limit_is_quadratic(polydisk2, rng):
    # at t = 0 the control is a conformal Hermitian metric, whose spray stays quadratic
    metric = ConformalControl(polydisk2, MetricParams(0.0, 2))
    x = polydisk2.to_real(np.array([0.3 + 0.1j, -0.2j]))
    us = [polydisk2.to_real(sample_vector(polydisk2, rng)) for _ in range(3)]
    assert conn.polarization_residual(metric, None, x, us) < 1e-4


# Cartan tensor

def test_cartan_distinguishes_hermitian(rng):
    mfd = MIXES["ball2xdisk"]
    z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
    assert conn.cartan_norm(mfd, MetricParams(0.0, 2), z, v) < 1e-6
    assert conn.cartan_norm(mfd, MetricParams(1.0, 2), z, v) > 1e-3
