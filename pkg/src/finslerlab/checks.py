"""Sampled property checks, one grid cell ``(t, k)`` at a time.

Each check has the signature ``check(mfd, p, rng, samples, tol) -> CheckReport``
and is registered in :data:`REGISTRY` under the name used by run manifests.
"""
import numpy as np

from . import connection as conn
from . import curvature as curv
from .automorphisms import (ProductMap, random_ball_automorphism,
                            random_polydisk_automorphism)
from .geodesics import polydisk_distance
from .linalg import cholesky_pd_check
from .product_metric import (FtkMetric, MetricParams, ProductManifold, fd_complex_tensors,
                             fd_real_tensor, sample_point, sample_vector)
from .report import CheckReport

DEFAULT_TOLERANCES = {
    "strong_convexity": 1e-5,
    "berwald": 1e-5,
    "kahler": 1e-5,
    "real_spray": 1e-4,
    "curvature_bounds": 1e-9,
    "curvature_oracle": 1e-4,
    "distance": 1e-9,
    "invariance": 1e-9,
    "homogeneity": 1e-12,
    "non_isometry": 1e-6,
}


def _rel(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def _cell(p):
    return {"t": p.t, "k": p.k}


def strong_convexity(mfd, p, rng, samples, tol):
    """Cholesky on both fundamental tensors plus closed form vs finite differences."""
    metric = FtkMetric(mfd, p)
    devs, pivots = [], []
    for _ in range(samples):
        z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
        cf = metric.fundamental(z, v)
        x, u = mfd.to_real(z), mfd.to_real(v)
        rf = metric.real_fundamental(x, u)
        pc, pr = cholesky_pd_check(cf.h), cholesky_pd_check(rf.g)
        pivots.append(min(pc.min_pivot, pr.min_pivot))
        if not (pc.is_pd and pr.is_pd):
            devs.append(np.inf)
            continue
        h_fd, _ = fd_complex_tensors(metric, z, v)
        devs.append(max(_rel(cf.h, h_fd), _rel(rf.g, fd_real_tensor(metric, x, u))))
    rep = CheckReport.from_deviations("strong_convexity", devs, tol, **_cell(p))
    rep.details["min_pivot"] = float(min(pivots)) if pivots else None
    return rep


def berwald(mfd, p, rng, samples, tol, fibers: int = 10):
    worst = []
    for _ in range(samples):
        z = sample_point(mfd, rng)
        r = conn.check_berwald(mfd, p, z, [sample_vector(mfd, rng) for _ in range(fibers)], tol)
        worst.append(r.max_deviation)
    return CheckReport.from_deviations("berwald", worst, tol, **_cell(p))


def kahler(mfd, p, rng, samples, tol):
    devs, labels = [], []
    for i in range(samples):
        z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
        for level in conn.KAHLER_LEVELS:
            devs.append(conn.kahler_residual(mfd, p, z, v, level))
            labels.append((i, level))
    return CheckReport.from_deviations("kahler", devs, tol, labels=labels, **_cell(p))


def real_spray(mfd, p, rng, samples, tol):
    devs = []
    for _ in range(samples):
        x, u = mfd.to_real(sample_point(mfd, rng)), mfd.to_real(sample_vector(mfd, rng))
        s = conn.real_spray(mfd, p, x, u)
        ref = conn.real_spray_closed_form(mfd, x, u)
        devs.append(np.max(np.abs(s - ref)) / max(np.max(np.abs(ref)), 1.0))
    return CheckReport.from_deviations("real_spray", devs, tol, **_cell(p))


def _common_curvature(mfd):
    cs = {f.constant_curvature for f in mfd.factors}
    return cs.pop() if len(cs) == 1 else None


def curvature_bounds(mfd, p, rng, samples, tol):
    c = _common_curvature(mfd)
    if c is None:
        return CheckReport.skip("curvature_bounds", "factors have different curvatures", **_cell(p))
    b = curv.curvature_bounds(c, mfd.n, p)
    devs = []
    for _ in range(samples):
        K = curv.sectional_curvature(mfd, p, sample_point(mfd, rng), sample_vector(mfd, rng))
        devs.append(max(b.lo - K, K - b.hi, 0.0))
    rep = CheckReport.from_deviations("curvature_bounds", devs, tol, **_cell(p))
    rep.details["bounds"] = [b.lo, b.hi]
    return rep


def curvature_oracle(mfd, p, rng, samples, tol):
    devs = []
    for _ in range(samples):
        z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
        a = curv.sectional_curvature(mfd, p, z, v)
        b = curv.sectional_curvature_direct(mfd, p, z, v)
        devs.append(abs(a - b) / max(abs(a), 1.0))
    return CheckReport.from_deviations("curvature_oracle", devs, tol, **_cell(p))


def distance(mfd, p, rng, samples, tol):
    """Symmetry and triangle inequality of the polydisk distance."""
    if not mfd.is_polydisk:
        return CheckReport.skip("distance", "closed-form distance needs a polydisk", **_cell(p))
    devs = []
    for _ in range(samples):
        a, b, c = (sample_point(mfd, rng) for _ in range(3))
        dab = polydisk_distance(p, a, b).value
        devs.append(abs(dab - polydisk_distance(p, b, a).value))
        devs.append(max(dab - polydisk_distance(p, a, c).value - polydisk_distance(p, c, b).value, 0.0))
    return CheckReport.from_deviations("distance", devs, tol, **_cell(p))


def _random_automorphism(mfd, rng):
    if mfd.is_polydisk:
        return random_polydisk_automorphism(mfd.n, rng)
    if all(f.bounded for f in mfd.factors):
        return ProductMap([random_ball_automorphism(f.dim, rng) for f in mfd.factors], mfd)
    return None


def invariance(mfd, p, rng, samples, tol):
    """``F(phi(z), dphi v) = F(z, v)`` (and distances on the polydisk)."""
    metric = FtkMetric(mfd, p)
    devs = []
    for _ in range(samples):
        phi = _random_automorphism(mfd, rng)
        if phi is None:
            return CheckReport.skip("invariance", "no automorphism sampler for these factors", **_cell(p))
        z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
        F0 = metric.value(z, v)
        devs.append(abs(metric.value(*phi.push(z, v)) - F0) / F0)
        if mfd.is_polydisk:
            w = sample_point(mfd, rng)
            devs.append(abs(polydisk_distance(p, phi(z), phi(w)).value - polydisk_distance(p, z, w).value))
    return CheckReport.from_deviations("invariance", devs, tol, **_cell(p))


def homogeneity(mfd, p, rng, samples, tol):
    metric = FtkMetric(mfd, p)
    devs = []
    for _ in range(samples):
        z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
        lam = complex(rng.normal(), rng.normal())
        F = metric.value(z, v)
        devs.append(abs(metric.value(z, lam * v) - abs(lam) * F) / (abs(lam) * F))
    return CheckReport.from_deviations("homogeneity", devs, tol, **_cell(p))


def non_isometry(mfd, p, rng, samples, tol):
    """Witness that ``F_{t,k}`` differs from ``F_{t',k}`` with ``t' = t + 1/2``."""
    other = MetricParams(p.t + 0.5, p.k)
    a, b = FtkMetric(mfd, p), FtkMetric(mfd, other)
    diffs = []
    for _ in range(samples):
        z, v = sample_point(mfd, rng), sample_vector(mfd, rng)
        diffs.append(abs(a.value(z, v) - b.value(z, v)))
    rep = CheckReport.from_deviations("non_isometry", diffs, tol, fail_above=False, **_cell(p))
    rep.details["compared_with"] = {"t": other.t, "k": other.k}
    return rep


REGISTRY = {
    "strong_convexity": strong_convexity,
    "berwald": berwald,
    "kahler": kahler,
    "real_spray": real_spray,
    "curvature_bounds": curvature_bounds,
    "curvature_oracle": curvature_oracle,
    "distance": distance,
    "invariance": invariance,
    "homogeneity": homogeneity,
    "non_isometry": non_isometry,
}
