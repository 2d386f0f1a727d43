"""Holomorphic automorphisms of the ball and polydisk, and metric pullbacks.

Maps expose ``__call__``, ``jacobian`` (``J[i, j] = df^i/dz^j``), ``hessian``
(``H[i, j, k] = d2f^i/dz^j dz^k``) and ``inverse``.  The base class falls back
on finite differences for the derivatives.
"""
from typing import NamedTuple

import numpy as np
import scipy.stats

from . import fd
from .connection import as_metric, horizontal_coefficients
from .errors import DomainError, InvalidInputError
from .product_metric import FinslerMetric, ProductManifold
from .report import CheckReport

MAP_STEP = 1e-3
PULLBACK_TOL = 1e-4


class HolomorphicMap:
    dim: int

    def __call__(self, z) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "HolomorphicMap":
        raise NotImplementedError

    def jacobian(self, z) -> np.ndarray:
        dz, _ = fd.wirtinger(self, np.asarray(z, dtype=complex), MAP_STEP)
        return dz

    def hessian(self, z) -> np.ndarray:
        dz, _ = fd.wirtinger(self.jacobian, np.asarray(z, dtype=complex), MAP_STEP)
        return dz

    def push(self, z, v):
        z = np.asarray(z, dtype=complex)
        return self(z), self.jacobian(z) @ np.asarray(v, dtype=complex)


class AffineMap(HolomorphicMap):
    """``z -> M z + b``."""

    def __init__(self, M, b=None):
        self.M = np.atleast_2d(np.asarray(M, dtype=complex))
        self.dim = self.M.shape[0]
        self.b = np.zeros(self.dim, dtype=complex) if b is None else np.asarray(b, dtype=complex)

    def __call__(self, z):
        return self.M @ np.asarray(z, dtype=complex) + self.b

    def jacobian(self, z):
        return self.M.copy()

    def hessian(self, z):
        return np.zeros((self.dim,) * 3, dtype=complex)

    def inverse(self):
        Minv = np.linalg.inv(self.M)
        return AffineMap(Minv, -Minv @ self.b)


def identity_map(dim: int) -> AffineMap:
    return AffineMap(np.eye(dim))


class PolydiskAutomorphism(HolomorphicMap):
    """``f_l(z) = exp(i theta_l) (z_{sigma(l)} - a_l) / (1 - conj(a_l) z_{sigma(l)})``.

    ``sigma`` is a 0-based permutation.
    """

    def __init__(self, thetas, a, sigma=None):
        self.thetas = np.asarray(thetas, dtype=float).reshape(-1)
        self.a = np.asarray(a, dtype=complex).reshape(-1)
        self.dim = self.thetas.size
        if self.a.size != self.dim:
            raise InvalidInputError("thetas and a must have the same length")
        if np.any(np.abs(self.a) >= 1.0):
            raise DomainError("Möbius centers must lie inside the unit disk")
        self.sigma = np.arange(self.dim) if sigma is None else np.asarray(sigma, dtype=int).reshape(-1)
        if sorted(self.sigma.tolist()) != list(range(self.dim)):
            raise InvalidInputError(f"sigma must be a permutation of 0..{self.dim - 1}, got {sigma}")
        self._rot = np.exp(1j * self.thetas)

    def __repr__(self):
        return f"PolydiskAutomorphism(thetas={self.thetas}, a={self.a}, sigma={self.sigma})"

    def __call__(self, z):
        w = np.asarray(z, dtype=complex)[self.sigma]
        return self._rot * (w - self.a) / (1.0 - self.a.conj() * w)

    def jacobian(self, z):
        w = np.asarray(z, dtype=complex)[self.sigma]
        d = self._rot * (1.0 - np.abs(self.a) ** 2) / (1.0 - self.a.conj() * w) ** 2
        J = np.zeros((self.dim, self.dim), dtype=complex)
        J[np.arange(self.dim), self.sigma] = d
        return J

    def hessian(self, z):
        w = np.asarray(z, dtype=complex)[self.sigma]
        d2 = 2.0 * self._rot * (1.0 - np.abs(self.a) ** 2) * self.a.conj() / (1.0 - self.a.conj() * w) ** 3
        H = np.zeros((self.dim,) * 3, dtype=complex)
        idx = np.arange(self.dim)
        H[idx, self.sigma, self.sigma] = d2
        return H

    def inverse(self):
        inv = np.argsort(self.sigma)               # sigma^{-1}
        thetas = -self.thetas[inv]
        a = -self.a[inv] * self._rot[inv]
        return PolydiskAutomorphism(thetas, a, inv)


class BallAutomorphism(HolomorphicMap):
    """``z -> U phi_a(z)`` with the involution

        phi_a(z) = (a - P z - s (z - P z)) / (1 - <z, a>),

    ``P`` the orthogonal projection onto ``a``, ``s = sqrt(1 - |a|^2)`` and
    ``<z, a> = sum z^i conj(a^i)``.  ``phi_0(z) = -z``.
    """

    def __init__(self, a, U=None):
        self.a = np.asarray(a, dtype=complex).reshape(-1)
        self.dim = self.a.size
        r2 = float(np.real(np.vdot(self.a, self.a)))
        if r2 >= 1.0:
            raise DomainError("ball automorphism center must lie inside the unit ball")
        self.U = np.eye(self.dim, dtype=complex) if U is None else np.asarray(U, dtype=complex)
        if not np.allclose(self.U @ self.U.conj().T, np.eye(self.dim), atol=1e-12):
            raise InvalidInputError("U must be unitary")
        self.s = np.sqrt(1.0 - r2)
        self.P = np.outer(self.a, self.a.conj()) / r2 if r2 > 0 else np.zeros((self.dim, self.dim))
        self._M = -self.P - self.s * (np.eye(self.dim) - self.P)

    def _parts(self, z):
        z = np.asarray(z, dtype=complex)
        D = 1.0 - z @ self.a.conj()
        Nv = self.a + self._M @ z
        return Nv, D

    def __call__(self, z):
        Nv, D = self._parts(z)
        return self.U @ (Nv / D)

    def jacobian(self, z):
        Nv, D = self._parts(z)
        J = self._M / D + np.outer(Nv, self.a.conj()) / D**2
        return self.U @ J

    def hessian(self, z):
        Nv, D = self._parts(z)
        ab = self.a.conj()
        H = (np.einsum("ij,k->ijk", self._M, ab) + np.einsum("ik,j->ijk", self._M, ab)) / D**2 \
            + 2.0 * np.einsum("i,j,k->ijk", Nv, ab, ab) / D**3
        return np.einsum("li,ijk->ljk", self.U, H)

    def inverse(self):
        return BallAutomorphism(self.U @ self.a, self.U.conj().T)


class ProductMap(HolomorphicMap):
    """Factor-wise product of maps on a product chart."""

    def __init__(self, maps, mfd: ProductManifold):
        self.maps = list(maps)
        self.mfd = mfd
        self.dim = mfd.N

    def __call__(self, z):
        return np.concatenate([f(zl) for f, zl in zip(self.maps, self.mfd.split(z))])

    def jacobian(self, z):
        J = np.zeros((self.dim, self.dim), dtype=complex)
        for f, zl, s in zip(self.maps, self.mfd.split(z), self.mfd.slices):
            J[s, s] = f.jacobian(zl)
        return J

    def hessian(self, z):
        H = np.zeros((self.dim,) * 3, dtype=complex)
        for f, zl, s in zip(self.maps, self.mfd.split(z), self.mfd.slices):
            H[s, s, s] = f.hessian(zl)
        return H

    def inverse(self):
        return ProductMap([f.inverse() for f in self.maps], self.mfd)


def apply_with_differential(fmap: HolomorphicMap, z, v):
    """``(f(z), df_z v)``."""
    return fmap.push(z, v)


class PullbackMetric(FinslerMetric):
    """``G2(z, v) = G1(g(z), dg_z v)``."""

    def __init__(self, metric: FinslerMetric, gmap: HolomorphicMap):
        super().__init__(metric.mfd)
        self.base = metric
        self.gmap = gmap

    def G(self, z, v):
        w, Jv = self.gmap.push(z, v)
        return self.base.G(w, Jv)

    def G_batch(self, z, V):
        z = np.asarray(z, dtype=complex)
        return self.base.G_batch(self.gmap(z), np.asarray(V, dtype=complex) @ self.gmap.jacobian(z).T)

    def dG_dv(self, z, v):
        w, Jv = self.gmap.push(z, v)
        return self.gmap.jacobian(z).T @ self.base.dG_dv(w, Jv)


def pullback_metric(metric, gmap: HolomorphicMap, p=None) -> PullbackMetric:
    return PullbackMetric(as_metric(metric, p), gmap)


def pullback_tensor_check(metric, gmap: HolomorphicMap, z, v, p=None) -> float:
    """Largest entry of ``h2 - J^T h1 conj(J)`` with ``h2`` from finite differences."""
    metric = as_metric(metric, p)
    pb = PullbackMetric(metric, gmap)
    z = np.asarray(z, dtype=complex)
    v = np.asarray(v, dtype=complex)
    J = gmap.jacobian(z)
    w, Jv = gmap.push(z, v)
    lhs = pb.complex_tensor(z, v)
    rhs = J.T @ metric.complex_tensor(w, Jv) @ J.conj()
    return float(np.max(np.abs(lhs - rhs)))


def pullback_connection_residual(metric, gmap: HolomorphicMap, z, v, p=None) -> float:
    """Residual of the horizontal-coefficient transformation law.

    With ``f = g^{-1}``,
    ``Gamma2^c_{b;a} = Gamma1^s_{m;l}(g(z), dg v) df^c/dw^s dg^m/dz^b dg^l/dz^a
    + df^c/dw^s d2g^s/dz^b dz^a``.
    """
    metric = as_metric(metric, p)
    pb = PullbackMetric(metric, gmap)
    z = np.asarray(z, dtype=complex)
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    w, Jv = gmap.push(z, v)
    Jg = gmap.jacobian(z)
    Jf = np.linalg.inv(Jg)
    Hg = gmap.hessian(z)
    G1 = horizontal_coefficients(metric, None, w, Jv)
    rhs = np.einsum("sml,gs,mb,la->gba", G1, Jf, Jg, Jg) + np.einsum("gs,sba->gba", Jf, Hg)
    lhs = horizontal_coefficients(pb, None, z, v)
    return float(np.max(np.abs(lhs - rhs)))


def pullback_connection_check(metric, p, gmap: HolomorphicMap, z, v, tol: float = PULLBACK_TOL) -> CheckReport:
    r = pullback_connection_residual(metric, gmap, z, v, p)
    return CheckReport.from_deviations("pullback_connection", [r], tol)


def ball_rigidity_metric(c: float, z, v) -> float:
    """``c ((1 - |z|^2)|v|^2 + |<z, v>|^2) / (1 - |z|^2)^2``."""
    if c <= 0:
        raise InvalidInputError(f"c must be positive, got {c}")
    z = np.asarray(z, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    s = float(np.real(np.vdot(z, z)))
    if s >= 1.0:
        raise DomainError(f"point {z} is not inside the unit ball")
    pair = np.vdot(z, v)                        # conj(<z, v>); only |.| matters
    return float(c * ((1.0 - s) * np.real(np.vdot(v, v)) + abs(pair) ** 2) / (1.0 - s) ** 2)


def origin_pullback(c: float, z, v) -> float:
    """``c |d(phi_z)_z v|^2``: the norm ``c|.|^2`` at the origin moved to ``z``."""
    J = BallAutomorphism(z).jacobian(z)
    Jv = J @ np.asarray(v, dtype=complex)
    return float(c * np.real(np.vdot(Jv, Jv)))


def random_polydisk_automorphism(n: int, rng, radius: float = 0.8) -> PolydiskAutomorphism:
    thetas = rng.uniform(0.0, 2 * np.pi, size=n)
    a = radius * np.sqrt(rng.uniform(size=n)) * np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=n))
    return PolydiskAutomorphism(thetas, a, rng.permutation(n))


def random_ball_point(m: int, rng, radius: float = 0.8) -> np.ndarray:
    w = rng.normal(size=m) + 1j * rng.normal(size=m)
    return radius * rng.uniform() ** (1.0 / (2 * m)) * w / np.linalg.norm(w)


def random_ball_automorphism(m: int, rng, radius: float = 0.8) -> BallAutomorphism:
    U = scipy.stats.unitary_group.rvs(m, random_state=rng) if m > 1 else np.exp(2j * np.pi * rng.uniform()) * np.eye(1)
    return BallAutomorphism(random_ball_point(m, rng, radius), U)
