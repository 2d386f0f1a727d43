"""Constant-curvature Hermitian factor metrics.

Four model factors are supported.  With ``s = |z|^2`` and the pairing
``<z, v> = sum z^a conj(v^a)``:

    PoincareDisk   |v|^2 / (1 - |z|^2)^2                          (m = 1)
    BergmanBall    ((1 - s)|v|^2 + |<z,v>|^2) / (1 - s)^2
    FubiniStudy    ((1 + s)|v|^2 - |<z,v>|^2) / (1 + s)^2
    EuclideanFlat  |v|^2

The disk is the one-dimensional ball.  Ball and projective space share the
tensor ``delta/w - eps * conj(z_a) z_b / w^2`` with ``w = 1 + eps*s`` and
``eps = -1`` (ball) or ``+1`` (Fubini-Study); all closed forms below are
written in terms of ``eps`` and ``w``.

Index conventions: ``tensor[a, b]`` is ``[Q]_{a bbar}``; Hermitian connection
symbols are stored as ``gamma[c, a, b]`` for ``Gamma^c_{a;b}`` (upper index,
fiber index, base index).
"""
import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import fd
from .errors import DomainError, InvalidInputError

BOUNDARY_MARGIN = 1e-6


class FactorKind(str, enum.Enum):
    POINCARE_DISK = "PoincareDisk"
    BERGMAN_BALL = "BergmanBall"
    FUBINI_STUDY = "FubiniStudy"
    EUCLIDEAN_FLAT = "EuclideanFlat"


_CURVATURE = {
    FactorKind.POINCARE_DISK: -4.0,
    FactorKind.BERGMAN_BALL: -4.0,
    FactorKind.FUBINI_STUDY: 4.0,
    FactorKind.EUCLIDEAN_FLAT: 0.0,
}

_ALIASES = {
    "poincaredisk": FactorKind.POINCARE_DISK, "disk": FactorKind.POINCARE_DISK,
    "bergmanball": FactorKind.BERGMAN_BALL, "ball": FactorKind.BERGMAN_BALL,
    "fubinistudy": FactorKind.FUBINI_STUDY, "fs": FactorKind.FUBINI_STUDY,
    "projective": FactorKind.FUBINI_STUDY,
    "euclideanflat": FactorKind.EUCLIDEAN_FLAT, "flat": FactorKind.EUCLIDEAN_FLAT,
    "euclidean": FactorKind.EUCLIDEAN_FLAT,
}


@dataclass(frozen=True)
class FactorMetric:
    kind: FactorKind
    dim: int = 1

    def __post_init__(self):
        kind = parse_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidInputError(f"factor dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        if kind is FactorKind.POINCARE_DISK and self.dim != 1:
            raise InvalidInputError("PoincareDisk is one-dimensional")

    @property
    def constant_curvature(self) -> float:
        return _CURVATURE[self.kind]

    @property
    def bounded(self) -> bool:
        return self.kind in (FactorKind.POINCARE_DISK, FactorKind.BERGMAN_BALL)

    @property
    def eps(self) -> float:
        if self.bounded:
            return -1.0
        if self.kind is FactorKind.FUBINI_STUDY:
            return 1.0
        return 0.0

    def __str__(self):
        return f"{self.kind.value}({self.dim})"


def parse_kind(kind) -> FactorKind:
    if isinstance(kind, FactorKind):
        return kind
    key = str(kind).replace("_", "").replace("-", "").lower()
    try:
        return _ALIASES[key]
    except KeyError:
        raise InvalidInputError(f"unknown factor kind {kind!r}") from None


def poincare_disk() -> FactorMetric:
    return FactorMetric(FactorKind.POINCARE_DISK, 1)


def bergman_ball(m: int) -> FactorMetric:
    return FactorMetric(FactorKind.BERGMAN_BALL, m)


def fubini_study(m: int) -> FactorMetric:
    return FactorMetric(FactorKind.FUBINI_STUDY, m)


def euclidean(m: int) -> FactorMetric:
    return FactorMetric(FactorKind.EUCLIDEAN_FLAT, m)


def check_point(f: FactorMetric, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.size != f.dim:
        raise InvalidInputError(f"{f} expects {f.dim} coordinates, got {z.size}")
    if not np.all(np.isfinite(z)):
        raise DomainError(f"non-finite point {z}")
    if f.bounded and np.linalg.norm(z) >= 1.0 - BOUNDARY_MARGIN:
        raise DomainError(f"point {z} is not inside the unit ball of {f} (margin {BOUNDARY_MARGIN:g})")
    return z


def _w(f, z):
    return 1.0 + f.eps * np.real(np.vdot(z, z))


def q_tensor(f: FactorMetric, z) -> np.ndarray:
    """Hermitian matrix ``[Q]_{a bbar}(z)``."""
    z = check_point(f, z)
    eye = np.eye(f.dim, dtype=complex)
    if f.eps == 0.0:
        return eye
    w = _w(f, z)
    return eye / w - f.eps * np.outer(z.conj(), z) / w**2


def q_tensor_inv(f: FactorMetric, z) -> np.ndarray:
    """Closed-form inverse ``w (I + eps conj(z) z^T)`` of :func:`q_tensor`."""
    z = check_point(f, z)
    eye = np.eye(f.dim, dtype=complex)
    if f.eps == 0.0:
        return eye
    return _w(f, z) * (eye + f.eps * np.outer(z.conj(), z))


def q_value(f: FactorMetric, z, v):
    """``Q(z, v)``; ``v`` may carry leading batch axes."""
    T = q_tensor(f, z)
    v = np.asarray(v, dtype=complex)
    if v.ndim == 0:
        v = v.reshape(1)
    return np.real(np.einsum("...a,ab,...b->...", v, T, v.conj()))


class QDerivatives(NamedTuple):
    tensor: np.ndarray
    dv: np.ndarray
    dz: np.ndarray


def q_tensor_dz(f: FactorMetric, z) -> np.ndarray:
    """``dT[a, l, b] = d[Q]_{a lbar} / dz^b``."""
    z = check_point(f, z)
    m = f.dim
    if f.eps == 0.0:
        return np.zeros((m, m, m), dtype=complex)
    eps, w = f.eps, _w(f, z)
    zb = z.conj()
    eye = np.eye(m)
    return (-eps * np.einsum("al,b->alb", eye, zb) / w**2
            - eps * np.einsum("a,lb->alb", zb, eye) / w**2
            + 2 * eps**2 * np.einsum("a,l,b->alb", zb, z, zb) / w**3)


def q_derivatives(f: FactorMetric, z, v) -> QDerivatives:
    """Tensor, ``dQ/dv`` and ``dQ/dz`` at ``(z, v)``.

    ``dv[a] = [Q]_{a bbar} conj(v^b)`` so that ``dv . v = Q``.
    """
    T = q_tensor(f, z)
    v = np.asarray(v, dtype=complex).reshape(-1)
    dv = T @ v.conj()
    dT = q_tensor_dz(f, z)
    dz = np.einsum("a,alb,l->b", v, dT, v.conj())
    return QDerivatives(T, dv, dz)


def hermitian_connection_symbols(f: FactorMetric, z) -> np.ndarray:
    """``gamma[c, a, b] = [Q]^{lbar c} d[Q]_{a lbar}/dz^b``."""
    return np.einsum("alb,lc->cab", q_tensor_dz(f, z), q_tensor_inv(f, z))


def hermitian_connection(f: FactorMetric, z, v) -> np.ndarray:
    """Nonlinear Hermitian connection ``Gamma^c_{;b}(z, v)``, complex-linear in ``v``."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.einsum("cab,a->cb", hermitian_connection_symbols(f, z), v)


# Real picture: x = (Re z, Im z), u = (Re v, Im v).

def to_real(z) -> np.ndarray:
    return fd.realify(z)


def from_real(x) -> np.ndarray:
    return fd.complexify(x)


def real_tensor(f: FactorMetric, x) -> np.ndarray:
    """``[Q]_{ab}(x) = d2Q/du^a du^b`` (so that ``Q = u^T [Q] u / 2``)."""
    T = q_tensor(f, from_real(x))
    A, B = T.real, T.imag
    return 2.0 * np.block([[A, B], [-B, A]])


def _fd_step(f: FactorMetric, z, base: float = 1e-4) -> float:
    if f.bounded:
        return base * (1.0 - np.linalg.norm(z))
    return base


def levi_civita_symbols(f: FactorMetric, x, h: float = None) -> np.ndarray:
    """Christoffel symbols ``gamma[c, a, b]`` of the real metric ``[Q]_{ab}``.

    Metric derivatives come from central differences; the step shrinks with
    the distance to the boundary for bounded factors.
    """
    x = np.asarray(x, dtype=float)
    z = check_point(f, from_real(x))
    if f.eps == 0.0:
        n = 2 * f.dim
        return np.zeros((n, n, n))
    if h is None:
        h = _fd_step(f, z)
    dg = fd.gradient(lambda y: real_tensor(f, y), x, h)   # dg[a, b, d] = d g_ab / dx^d
    ginv = np.linalg.inv(real_tensor(f, x))
    # Gamma^c_{ab} = 1/2 g^{cd} (d_a g_bd + d_b g_ad - d_d g_ab)
    bracket = (np.einsum("bda->abd", dg) + np.einsum("adb->abd", dg) - dg)
    return 0.5 * np.einsum("cd,abd->cab", ginv, bracket)


def levi_civita(f: FactorMetric, x, u, h: float = None) -> np.ndarray:
    """``Gamma^c_{;b}(x, u) = Gamma^c_{a;b}(x) u^a`` as a ``[c, b]`` matrix."""
    u = np.asarray(u, dtype=float)
    return np.einsum("cab,a->cb", levi_civita_symbols(f, x, h), u)


def holomorphic_sectional_curvature(f: FactorMetric, z, v, h: float = None) -> float:
    """``-(2/Q^2) dQ/dv^c  d/dzbar^m (Gamma^c_{;a}) v^a conj(v^m)`` by finite differences."""
    z = check_point(f, z)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if h is None:
        h = _fd_step(f, z, 1e-3)
    d = q_derivatives(f, z, v)
    Q = np.real(d.dv @ v)
    _, dzb = fd.wirtinger(lambda y: hermitian_connection(f, y, v), z, h)   # [c, a, m]
    val = np.einsum("c,cam,a,m->", d.dv, dzb, v, v.conj())
    return float(np.real(-2.0 / Q**2 * val))
