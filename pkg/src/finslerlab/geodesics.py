"""Geodesics and distance.

Geodesics solve ``x'' = -2 G(x, x')`` with the real spray of
:func:`finslerlab.connection.real_spray`, integrated by classical RK4 with
step-doubling error control.  On the polydisk the distance is explicit:

    sigma = sqrt(sum L_l^2 + t (sum L_l^(2k))^(1/k)) / (2 sqrt(1+t)),
    L_l = log((1 + |m_l|) / (1 - |m_l|)),  m_l = (z2 - z1) / (1 - conj(z1) z2).
"""
from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np

from . import factors as fac
from .automorphisms import BallAutomorphism
from .connection import as_metric, real_spray
from .errors import BoundaryExitError, DomainError, InvalidInputError, ZeroSectionError
from .product_metric import FtkMetric, MetricParams, ProductManifold

BOUNDARY_GUARD = 1e-6
ODE_TOL = 1e-9


class PathSample(NamedTuple):
    s: float
    x: np.ndarray
    u: np.ndarray


@dataclass
class GeodesicPath:
    samples: List[PathSample] = field(default_factory=list)
    parameterization: str = "affine"

    @property
    def s(self) -> np.ndarray:
        return np.array([p.s for p in self.samples])

    @property
    def x(self) -> np.ndarray:
        return np.array([p.x for p in self.samples])

    @property
    def u(self) -> np.ndarray:
        return np.array([p.u for p in self.samples])

    def endpoint(self) -> np.ndarray:
        return self.samples[-1].x


class DistanceResult(NamedTuple):
    value: float
    method: str


def _inside(mfd: ProductManifold, x) -> bool:
    return mfd.boundary_distance(mfd.from_real(x)) > BOUNDARY_GUARD


def integrate_geodesic(mfd, p, x0, u0, s_max: float, steps: int, tol: float = ODE_TOL) -> GeodesicPath:
    """Integrate from ``(x0, u0)`` to parameter ``s_max`` (which may be negative).

    Output is sampled on ``steps`` equal intervals; each interval is covered
    by RK4 substeps whose size is halved until the step-doubling error
    estimate is below ``tol`` per unit parameter.
    """
    metric = as_metric(mfd, p)
    mfd = metric.mfd
    if int(steps) != steps or steps < 16:
        raise InvalidInputError(f"steps must be an integer >= 16, got {steps}")
    x = np.asarray(x0, dtype=float).copy()
    u = np.asarray(u0, dtype=float).copy()
    if x.size != 2 * mfd.N or u.size != 2 * mfd.N:
        raise InvalidInputError(f"expected real vectors of length {2 * mfd.N}")
    if not np.any(u):
        raise ZeroSectionError("initial velocity is zero")
    if not _inside(mfd, x):
        raise DomainError("initial point is outside the domain")

    path = GeodesicPath([PathSample(0.0, x.copy(), u.copy())])

    def rhs(y):
        xx, uu = y[: x.size], y[x.size:]
        if not _inside(mfd, xx):
            raise _Exit()
        if not np.any(uu):
            return np.zeros_like(y)
        return np.concatenate([uu, -real_spray(metric, None, xx, uu)])

    def rk4(y, h):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    y = np.concatenate([x, u])
    H = s_max / steps
    sub = 1
    for i in range(1, steps + 1):
        try:
            while True:
                h = H / sub
                y_try = y.copy()
                err = 0.0
                for _ in range(sub):
                    full = rk4(y_try, h)
                    half = rk4(rk4(y_try, 0.5 * h), 0.5 * h)
                    err = max(err, np.max(np.abs(half - full)) / 15.0)
                    y_try = half + (half - full) / 15.0
                if err <= tol * abs(h) or sub >= 1024:
                    break
                sub *= 2
        except _Exit:
            raise BoundaryExitError(f"geodesic left the domain near s={i * H:g}", path) from None
        if not _inside(mfd, y_try[: x.size]):
            raise BoundaryExitError(f"geodesic left the domain near s={i * H:g}", path)
        y = y_try
        path.samples.append(PathSample(i * H, y[: x.size].copy(), y[x.size:].copy()))
        if sub > 1 and err < tol * abs(h) / 64:
            sub //= 2
    return path


class _Exit(Exception):
    pass


def path_length(mfd, p, path: GeodesicPath) -> float:
    """Composite trapezoid rule for ``integral F(x(s), x'(s)) ds``."""
    metric = as_metric(mfd, p)
    if not isinstance(path, GeodesicPath) or len(path.samples) < 2:
        raise InvalidInputError("path needs at least 2 samples")
    s = path.s
    F = np.array([metric.value(metric.mfd.from_real(q.x), metric.mfd.from_real(q.u))
                  if np.any(q.u) else 0.0 for q in path.samples])
    return float(np.sum(0.5 * (F[1:] + F[:-1]) * np.abs(np.diff(s))))


def _moebius_abs(z1, z2):
    # |1 - conj(z1) z2| in real arithmetic so swapping z1 and z2 is bit-identical
    x1, y1, x2, y2 = z1.real, z1.imag, z2.real, z2.imag
    den = np.hypot(1.0 - (x1 * x2 + y1 * y2), x1 * y2 - y1 * x2)
    return np.abs(z2 - z1) / den


def polydisk_distance(p: MetricParams, Z1, Z2) -> DistanceResult:
    Z1 = np.asarray(Z1, dtype=complex).reshape(-1)
    Z2 = np.asarray(Z2, dtype=complex).reshape(-1)
    if Z1.shape != Z2.shape:
        raise InvalidInputError("points must have the same dimension")
    mfd = ProductManifold.polydisk(Z1.size)
    mfd.check_point(Z1)
    mfd.check_point(Z2)
    L = 2.0 * np.arctanh(_moebius_abs(Z1, Z2))
    return DistanceResult(_combine_lengths(L, p), "closed_form")


def _combine_lengths(L, p: MetricParams) -> float:
    """``sqrt(sum L^2 + t (sum L^(2k))^(1/k)) / (2 sqrt(1+t))`` computed without overflow."""
    L = np.asarray(L, dtype=float)
    Lmax = L.max()
    if Lmax == 0.0:
        return 0.0
    r = L / Lmax
    inner = np.sum(r**2) + p.t * np.sum(r ** (2 * p.k)) ** (1.0 / p.k)
    return float(Lmax * np.sqrt(inner / (1.0 + p.t)) / 2.0)


def polydisk_closed_form_geodesic(p: MetricParams, Z2, steps: int = 64) -> GeodesicPath:
    """Unit-speed geodesic from 0 to ``Z2``: ``z_l(s) = e^{i th_l} tanh(a_l s / 2)``."""
    Z2 = np.asarray(Z2, dtype=complex).reshape(-1)
    mfd = ProductManifold.polydisk(Z2.size)
    sigma = polydisk_distance(p, np.zeros_like(Z2), Z2).value
    path = GeodesicPath()
    if sigma == 0.0:
        x = mfd.to_real(Z2)
        path.samples = [PathSample(0.0, x, np.zeros_like(x)), PathSample(0.0, x, np.zeros_like(x))]
        return path
    a = 2.0 * np.arctanh(np.abs(Z2)) / sigma
    phase = np.exp(1j * np.angle(Z2))
    for s in np.linspace(0.0, sigma, steps + 1):
        z = phase * np.tanh(a * s / 2)
        v = phase * (a / 2) / np.cosh(a * s / 2) ** 2
        path.samples.append(PathSample(float(s), mfd.to_real(z), mfd.to_real(v)))
    return path


def _factor_log(f: fac.FactorMetric, z1, z2):
    """Initial velocity at ``z1`` of the factor geodesic reaching ``z2`` at ``s = 1``."""
    if f.eps == 0.0:
        return z2 - z1
    if not f.bounded:
        raise InvalidInputError(f"no geodesic log map for {f}")
    phi = BallAutomorphism(z1)                 # swaps z1 and 0
    w = phi(z2)
    r = np.linalg.norm(w)
    if r == 0.0:
        return np.zeros_like(z1)
    d = np.arctanh(r)                          # factor distance (curvature -4)
    return phi.jacobian(np.zeros_like(z1)) @ (d * w / r)


def initial_velocity(mfd: ProductManifold, Z1, Z2) -> np.ndarray:
    """Complex ``v`` at ``Z1`` whose geodesic hits ``Z2`` at ``s = 1``.

    Factors follow their own geodesics, so this is the factor-wise log map.
    Only ball, disk and flat factors are supported.
    """
    Z1 = mfd.check_point(Z1)
    Z2 = mfd.check_point(Z2)
    return np.concatenate([_factor_log(f, a, b) for f, a, b
                           in zip(mfd.factors, mfd.split(Z1), mfd.split(Z2))])


def distance(mfd: ProductManifold, p: MetricParams, Z1, Z2, method: str = "auto", steps: int = 64) -> DistanceResult:
    """Distance between two points.

    ``closed_form`` is available on the polydisk; ``path_integral`` integrates
    the geodesic spray from ``Z1`` with the factor-wise log-map velocity and
    measures the resulting path.
    """
    if method == "auto":
        method = "closed_form" if mfd.is_polydisk else "path_integral"
    if method == "closed_form":
        if not mfd.is_polydisk:
            raise InvalidInputError("closed-form distance exists only on the polydisk")
        return polydisk_distance(p, Z1, Z2)
    if method != "path_integral":
        raise InvalidInputError(f"unknown distance method {method!r}")
    v0 = initial_velocity(mfd, Z1, Z2)
    if not np.any(v0):
        return DistanceResult(0.0, "path_integral")
    metric = FtkMetric(mfd, p)
    path = integrate_geodesic(metric, None, mfd.to_real(Z1), mfd.to_real(v0), 1.0, steps)
    return DistanceResult(path_length(metric, None, path), "path_integral")
