"""Chern-Finsler connection, sprays, and the Berwald / Kähler checkers.

Every public routine takes ``(mfd, p, ...)``.  ``mfd`` may also be any
:class:`~finslerlab.product_metric.FinslerMetric` instance (``p`` is then
ignored), which lets the same finite-difference pipeline run on pulled-back
metrics and control fixtures.

Array layouts:

* nonlinear ``Gamma[g, a]``      = Gamma^g_{;a}
* horizontal ``Gamma[g, b, a]``  = Gamma^g_{b;a} = dGamma^g_{;a} / dv^b
"""
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from . import factors as fac
from . import fd
from .errors import InvalidInputError, SingularTensorError, ZeroSectionError
from .linalg import cholesky_pd_check
from .product_metric import V_STEP, FinslerMetric, FtkMetric, MetricParams, ProductManifold, cartan_tensor
from .report import CheckReport

BERWALD_TOL = 1e-5
KAHLER_TOL = 1e-5
SPRAY_TOL = 1e-4
KAHLER_LEVELS = ("strong", "kahler", "weak")


def as_metric(mfd, p=None) -> FinslerMetric:
    if isinstance(mfd, FinslerMetric):
        return mfd
    if not isinstance(mfd, ProductManifold):
        raise InvalidInputError(f"expected a ProductManifold or FinslerMetric, got {type(mfd).__name__}")
    return FtkMetric(mfd, p if p is not None else MetricParams())


def _unit(v):
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ZeroSectionError("tangent vector is zero")
    return v / nrm, nrm


@dataclass
class ConnectionData:
    nonlinear: np.ndarray
    horizontal: np.ndarray
    real_spray: np.ndarray


def nonlinear_connection(mfd, p, z, v, check_pd: bool = True) -> np.ndarray:
    """``Gamma^g_{;m} = G^{tbar g} d(dG/dvbar^t)/dz^m``.

    The fiber derivative ``dG/dvbar`` comes from the metric (closed form for
    F_{t,k}); its z-derivative is a Wirtinger finite difference.
    """
    metric = as_metric(mfd, p)
    z = metric.check_point(z)
    u, nrm = _unit(metric.mfd.check_vector(v))
    h_inv = metric.complex_tensor_inv(z, u)
    if check_pd and not cholesky_pd_check(h_inv).is_pd:
        raise SingularTensorError(f"complex fundamental tensor is not positive definite at z={z}")
    dz, _ = fd.wirtinger(lambda y: metric.dG_dv(y, u).conj(), z, metric.z_step(z))   # [t, m]
    return (h_inv.T @ dz) * nrm


def nonlinear_connection_closed_form(mfd: ProductManifold, z, v) -> np.ndarray:
    """Block-diagonal Hermitian connections of the factors (independent of t, k)."""
    z = mfd.check_point(z)
    v = mfd.check_vector(v)
    out = np.zeros((mfd.N, mfd.N), dtype=complex)
    for f, zl, vl, s in zip(mfd.factors, mfd.split(z), mfd.split(v), mfd.slices):
        out[s, s] = fac.hermitian_connection(f, zl, vl)
    return out


def horizontal_coefficients(mfd, p, z, v) -> np.ndarray:
    """``Gamma^g_{b;a} = d Gamma^g_{;a} / dv^b`` by Wirtinger differences in v."""
    metric = as_metric(mfd, p)
    z = metric.check_point(z)
    u, _ = _unit(metric.mfd.check_vector(v))
    dv, _ = fd.wirtinger(lambda w: nonlinear_connection(metric, None, z, w, check_pd=False), u, V_STEP)
    return np.transpose(dv, (0, 2, 1))


def horizontal_closed_form(mfd: ProductManifold, z) -> np.ndarray:
    z = mfd.check_point(z)
    out = np.zeros((mfd.N,) * 3, dtype=complex)
    for f, zl, s in zip(mfd.factors, mfd.split(z), mfd.slices):
        out[s, s, s] = fac.hermitian_connection_symbols(f, zl)
    return out


def real_spray(mfd, p, x, u) -> np.ndarray:
    """``2 G^b = g^{bc} (d2G/du^c dx^a u^a - dG/dx^c)`` with ``g`` the full real Hessian."""
    metric = as_metric(mfd, p)
    x = np.asarray(x, dtype=float)
    z = metric.check_point(metric.mfd.from_real(x))
    u = np.asarray(u, dtype=float)
    un, nrm = _unit(u)
    g_inv = metric.real_hessian_inv(x, un)
    mixed = metric.real_mixed(x, un)
    dGdx = metric.real_gradient_x(x, un)
    return (g_inv @ (mixed - dGdx)) * nrm**2


def real_spray_closed_form(mfd: ProductManifold, x, u) -> np.ndarray:
    """Per-factor Levi-Civita quadratic form ``Gamma^b_{c;a} u^c u^a``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    out = np.zeros(2 * mfd.N)
    for f, rs in zip(mfd.factors, mfd.real_slices):
        out[rs] = fac.levi_civita(f, x[rs], u[rs]) @ u[rs]
    return out


def connection_data(mfd, p, z, v) -> ConnectionData:
    metric = as_metric(mfd, p)
    return ConnectionData(
        nonlinear_connection(metric, None, z, v),
        horizontal_coefficients(metric, None, z, v),
        real_spray(metric, None, metric.mfd.to_real(z), metric.mfd.to_real(v)),
    )


class ComplexSpray(NamedTuple):
    G_alpha: np.ndarray
    G_numu: np.ndarray


def complex_spray(mfd, p, z, v) -> ComplexSpray:
    """``GG^a = Gamma^a_{;m} v^m / 2`` and ``GG^a_{nm} = d2 GG^a / dv^n dv^m``."""
    metric = as_metric(mfd, p)
    z = metric.check_point(z)
    v = metric.mfd.check_vector(v)
    u, nrm = _unit(v)

    def spray(w):
        return 0.5 * nonlinear_connection(metric, None, z, w, check_pd=False) @ w

    G_alpha = spray(u) * nrm**2
    first = lambda w: fd.wirtinger(spray, w, V_STEP)[0]              # [a, m]
    second, _ = fd.wirtinger(first, u, V_STEP)                        # [a, m, n]
    return ComplexSpray(G_alpha, np.transpose(second, (0, 2, 1)))


def _grid_kw(metric):
    params = getattr(metric, "params", None)
    if params is None:
        return {}
    return {"t": params.t, "k": params.k}


def check_berwald(mfd, p, z, v_samples, tol: float = BERWALD_TOL) -> CheckReport:
    """Max pairwise deviation of horizontal coefficients across fiber samples."""
    metric = as_metric(mfd, p)
    vs = [metric.mfd.check_vector(v) for v in v_samples]
    if len(vs) < 2:
        raise InvalidInputError("check_berwald needs at least 2 fiber samples")
    H = [horizontal_coefficients(metric, None, z, v) for v in vs]
    devs, pairs = [], []
    for i, j in combinations(range(len(H)), 2):
        devs.append(np.max(np.abs(H[i] - H[j])))
        pairs.append((i, j))
    return CheckReport.from_deviations("berwald", devs, tol, labels=pairs, **_grid_kw(metric))


def polarization_residual(mfd, p, x, u_samples) -> float:
    """Relative failure of the real spray to be a quadratic form in ``u``.

    For a quadratic ``S``, ``B(a, b) = (S(a+b) - S(a-b))/4`` is bilinear and
    ``S(a+b) + S(a-b) = 2S(a) + 2S(b)``.  Both identities are tested on
    every pair/triple of samples; the residual is scaled by the largest
    spray value seen.
    """
    metric = as_metric(mfd, p)
    us = [np.asarray(u, dtype=float) for u in u_samples]
    if len(us) < 3:
        raise InvalidInputError("polarization needs at least 3 fiber samples")
    cache = {}

    def S(w):
        key = w.tobytes()
        if key not in cache:
            cache[key] = real_spray(metric, None, x, w)
        return cache[key]

    def B(a, b):
        return 0.25 * (S(a + b) - S(a - b))

    res = 0.0
    for a, b in combinations(us, 2):
        res = max(res, np.max(np.abs(S(a + b) + S(a - b) - 2 * S(a) - 2 * S(b))))
    for a, b, c in combinations(us, 3):
        res = max(res, np.max(np.abs(B(a + b, c) - B(a, c) - B(b, c))))
    scale = max(np.max(np.abs(s)) for s in cache.values())
    return float(res / max(scale, 1e-6))


def check_real_berwald(mfd, p, x, u_samples, tol: float = SPRAY_TOL) -> CheckReport:
    metric = as_metric(mfd, p)
    r = polarization_residual(metric, None, x, u_samples)
    return CheckReport.from_deviations("real_spray_quadratic", [r], tol, **_grid_kw(metric))


def kahler_residual(mfd, p, z, v, level: str) -> float:
    if level not in KAHLER_LEVELS:
        raise InvalidInputError(f"unknown Kähler level {level!r}; expected one of {KAHLER_LEVELS}")
    metric = as_metric(mfd, p)
    u, _ = _unit(metric.mfd.check_vector(v))
    H = horizontal_coefficients(metric, None, z, u)
    T = H - np.transpose(H, (0, 2, 1))          # Gamma^g_{b;a} - Gamma^g_{a;b}
    if level == "strong":
        return float(np.max(np.abs(T)))
    Tv = np.einsum("gba,b->ga", T, u)
    if level == "kahler":
        return float(np.max(np.abs(Tv)))
    G_g = metric.dG_dv(z, u)
    return float(np.max(np.abs(G_g @ Tv)))


def check_kahler(mfd, p, z, v, level: str = "kahler", tol: float = KAHLER_TOL) -> CheckReport:
    metric = as_metric(mfd, p)
    r = kahler_residual(metric, None, z, v, level)
    return CheckReport.from_deviations(f"kahler_{level}", [r], tol, **_grid_kw(metric))


def cartan_norm(mfd, p, z, v) -> float:
    """Largest entry of ``d h_{a bbar} / dv^c`` at unit ``v``."""
    metric = as_metric(mfd, p)
    return float(np.max(np.abs(cartan_tensor(metric, z, v))))
