"""Holomorphic sectional curvature of F_{t,k}.

Closed form, with per-factor constant curvatures ``K_l``:

    K = (1+t) * sum_l K_l (Q_l^2 + t A^(1/k-1) Q_l^(k+1)) / (sum Q + t A^(1/k))^2

where ``A = sum Q_l^k``.  A factor with ``v_l = 0`` contributes nothing.
"""
from typing import NamedTuple

import numpy as np

from . import fd
from .connection import as_metric, nonlinear_connection
from .errors import InvalidInputError, ZeroSectionError
from .product_metric import V_STEP, FtkMetric, MetricParams, ProductManifold


class CurvatureBounds(NamedTuple):
    lo: float
    hi: float
    c: float
    n: int
    t: float
    k: int

    def contains(self, K: float, slack: float = 1e-9) -> bool:
        return self.lo - slack <= K <= self.hi + slack


class CurvatureLimits(NamedTuple):
    at_t0: float
    at_tinf: float


def _unit(v):
    v = np.asarray(v, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ZeroSectionError("tangent vector is zero")
    return v / nrm


def _factor_curvatures(mfd: ProductManifold) -> np.ndarray:
    return np.array([f.constant_curvature for f in mfd.factors])


def _q(mfd, z, v):
    return FtkMetric(mfd).q_values(z, mfd.check_vector(_unit(v)))


def sectional_curvature(mfd: ProductManifold, p: MetricParams, z, v) -> float:
    Q = _q(mfd, z, v)
    t, k = p.t, p.k
    Kl = _factor_curvatures(mfd)
    qmax = Q.max()
    A = np.sum(Q**k)
    root = qmax * np.sum((Q / qmax) ** k) ** (1.0 / k)
    a1 = np.exp((1.0 / k - 1.0) * np.log(A))
    num = np.sum(Kl * (Q**2 + t * a1 * Q ** (k + 1)))
    return float((1.0 + t) * num / (Q.sum() + t * root) ** 2)


def sectional_curvature_direct(mfd, p, z, v) -> float:
    """``K = -(2/G^2) G_g delta_mbar(Gamma^g_{;a}) v^a conj(v^m)`` by finite differences.

    ``delta_mbar = d/dzbar^m - conj(Gamma^l_{;m}) d/dvbar^l``.
    """
    metric = as_metric(mfd, p)
    z = metric.check_point(z)
    u = metric.mfd.check_vector(_unit(v))
    gam = lambda y, w: nonlinear_connection(metric, None, y, w, check_pd=False)
    _, dzb = fd.wirtinger(lambda y: gam(y, u), z, metric.z_step(z))        # [g, a, m]
    _, dvb = fd.wirtinger(lambda w: gam(z, w), u, V_STEP)                  # [g, a, l]
    G0 = gam(z, u)                                                         # [l, m]
    delta = dzb - np.einsum("lm,gal->gam", G0.conj(), dvb)
    G_g = metric.dG_dv(z, u)
    G = metric.G(z, u)
    val = np.einsum("g,gam,a,m->", G_g, delta, u, u.conj())
    return float(np.real(-2.0 * val / G**2))


def curvature_bounds(c: float, n: int, p: MetricParams) -> CurvatureBounds:
    if int(n) != n or n < 1:
        raise InvalidInputError(f"factor count must be a positive integer, got {n}")
    n = int(n)
    other = (1.0 + p.t) * c / (n + p.t * n ** (1.0 / p.k))
    lo, hi = (c, other) if c <= 0 else (other, c)
    return CurvatureBounds(float(lo), float(hi), float(c), n, p.t, p.k)


def curvature_limits(mfd: ProductManifold, z, v, k: int) -> CurvatureLimits:
    """Limits of the curvature as ``t -> 0`` and ``t -> infinity``."""
    Q = _q(mfd, z, v)
    Kl = _factor_curvatures(mfd)
    at0 = np.sum(Kl * Q**2) / Q.sum() ** 2
    qn = Q / Q.max()
    atinf = np.sum(Kl * qn ** (k + 1)) / np.sum(qn**k) ** (1.0 / k + 1.0)
    return CurvatureLimits(float(at0), float(atinf))
