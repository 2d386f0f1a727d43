"""The F_{t,k} metric family on products of model factors.

    G = F^2 = (sum_l Q_l + t * (sum_l Q_l^k)^(1/k)) / (1 + t)

Two layers live here:

* :class:`FinslerMetric` is a generic complex Finsler metric known only
  through ``G(z, v)``.  Every derivative it offers is a finite-difference
  oracle, which is what the connection checks use for control fixtures and
  pulled-back metrics.
* :class:`FtkMetric` overrides the tensor routines with the closed forms
  (block matrices plus rank-1 corrections and their Sherman-Morrison
  inverses).

Real coordinates are laid out factor by factor, ``x = (Re z_1, Im z_1,
Re z_2, Im z_2, ...)``, and the same for ``u`` against ``v``.  The real
fundamental tensor is the full Hessian ``d2G/du du``; the Hermitian one is
``d2G/dv dvbar`` with ``h[a, b]`` indexing ``G_{a bbar}``.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import factors as fac
from . import fd
from .errors import DomainError, InvalidInputError, ZeroSectionError
from .linalg import block_diag_inverse, rank1_update_inverse

V_STEP = 1e-3          # fiber-direction step after normalizing |v| = 1
Z_STEP = 1e-3          # base-direction step, shrunk near boundaries
CARTAN_STEP = 1e-2


@dataclass(frozen=True)
class MetricParams:
    t: float = 0.0
    k: int = 2

    def __post_init__(self):
        if not np.isfinite(self.t) or self.t < 0:
            raise InvalidInputError(f"t must be a finite nonnegative real, got {self.t}")
        if int(self.k) != self.k or self.k < 2:
            raise InvalidInputError(f"k must be an integer >= 2, got {self.k}")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class ProductManifold:
    factors: tuple

    def __post_init__(self):
        fs = tuple(self.factors)
        if not fs:
            raise InvalidInputError("a product manifold needs at least one factor")
        object.__setattr__(self, "factors", tuple(f if isinstance(f, fac.FactorMetric)
                                                   else fac.FactorMetric(*f) for f in fs))

    @classmethod
    def polydisk(cls, n: int) -> "ProductManifold":
        return cls(tuple(fac.poincare_disk() for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.factors)

    @cached_property
    def N(self) -> int:
        return sum(f.dim for f in self.factors)

    @cached_property
    def slices(self) -> tuple:
        out, o = [], 0
        for f in self.factors:
            out.append(slice(o, o + f.dim))
            o += f.dim
        return tuple(out)

    @cached_property
    def real_slices(self) -> tuple:
        return tuple(slice(2 * s.start, 2 * s.stop) for s in self.slices)

    @cached_property
    def real_perm(self) -> np.ndarray:
        """Index map from ``(Re z, Im z)`` global ordering to per-factor ordering."""
        idx = []
        for s in self.slices:
            idx.extend(range(s.start, s.stop))
            idx.extend(range(self.N + s.start, self.N + s.stop))
        return np.array(idx)

    @property
    def is_polydisk(self) -> bool:
        return all(f.kind is fac.FactorKind.POINCARE_DISK for f in self.factors)

    def split(self, z) -> list:
        z = np.asarray(z, dtype=complex)
        return [z[..., s] for s in self.slices]

    def check_point(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).reshape(-1)
        if z.size != self.N:
            raise InvalidInputError(f"expected {self.N} complex coordinates, got {z.size}")
        for f, zl in zip(self.factors, self.split(z)):
            fac.check_point(f, zl)
        return z

    def check_vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.size != self.N:
            raise InvalidInputError(f"expected {self.N} complex components, got {v.size}")
        return v

    def boundary_distance(self, z) -> float:
        d = np.inf
        for f, zl in zip(self.factors, self.split(z)):
            if f.bounded:
                d = min(d, 1.0 - np.linalg.norm(zl))
        return d

    def to_real(self, z) -> np.ndarray:
        return fd.realify(np.asarray(z, dtype=complex).reshape(-1))[self.real_perm]

    def from_real(self, x) -> np.ndarray:
        """Inverse of :meth:`to_real`; leading batch axes are kept."""
        x = np.asarray(x, dtype=float)
        x = x.reshape(-1) if x.ndim < 2 else x
        y = np.empty_like(x)
        y[..., self.real_perm] = x
        return fd.complexify(y)

    def __str__(self):
        return " x ".join(str(f) for f in self.factors)


def _unit(v):
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ZeroSectionError("tangent vector is zero")
    return v / nrm, nrm


class FinslerMetric:
    """A complex Finsler metric on a product chart, known through ``G = F^2``.

    Subclasses implement :meth:`G`; everything else defaults to
    finite differences and may be overridden with closed forms.
    """

    def __init__(self, mfd: ProductManifold):
        self.mfd = mfd

    @property
    def N(self) -> int:
        return self.mfd.N

    def G(self, z, v) -> float:
        raise NotImplementedError

    def check_point(self, z):
        return self.mfd.check_point(z)

    def z_step(self, z) -> float:
        d = self.mfd.boundary_distance(z)
        return Z_STEP * min(1.0, d)

    def value(self, z, v) -> float:
        return float(np.sqrt(max(self.G(z, v), 0.0)))

    def G_batch(self, z, V) -> np.ndarray:
        """``G(z, v)`` for each row ``v`` of ``V``; subclasses may vectorize."""
        return np.array([self.G(z, v) for v in V], dtype=float)

    # fiber derivatives

    def dG_dv(self, z, v) -> np.ndarray:
        """``dG/dv^a`` (Wirtinger); ``dG/dvbar`` is its conjugate."""
        v = self.mfd.check_vector(v)
        u, nrm = _unit(v)
        dv, _ = fd.wirtinger(lambda w: self.G(z, w), u, V_STEP)
        return dv * nrm

    def complex_hessians(self, z, v):
        """``(d2G/dv dvbar, d2G/dv dv)`` by finite differences."""
        z = self.check_point(z)
        u, _ = _unit(self.mfd.check_vector(v))
        return fd.vvbar_hessian(lambda W: self.G_batch(z, W), u, V_STEP, batched=True)

    def complex_tensor(self, z, v) -> np.ndarray:
        return self.complex_hessians(z, v)[0]

    def complex_tensor_inv(self, z, v) -> np.ndarray:
        return np.linalg.inv(self.complex_tensor(z, v))

    # real picture

    def G_real(self, x, u) -> float:
        return self.G(self.mfd.from_real(x), self.mfd.from_real(u))

    def real_gradient_u(self, x, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            raise ZeroSectionError("tangent vector is zero")
        return fd.gradient(lambda w: self.G_real(x, w), u / nrm, V_STEP) * nrm

    def real_gradient_x(self, x, u) -> np.ndarray:
        """``dG/dx`` at fixed ``u``."""
        z = self.check_point(self.mfd.from_real(x))
        return fd.gradient(lambda y: self.G_real(y, u), np.asarray(x, dtype=float), self.z_step(z))

    def real_mixed(self, x, u) -> np.ndarray:
        """``d2G/du dx^a u^a``: the fiber gradient differentiated along ``u`` in the base."""
        z = self.check_point(self.mfd.from_real(x))
        u = np.asarray(u, dtype=float)
        return fd.directional(lambda y: self.real_gradient_u(y, u), np.asarray(x, dtype=float), u, self.z_step(z))

    def real_hessian(self, x, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            raise ZeroSectionError("tangent vector is zero")
        z = self.mfd.from_real(x)
        return fd.hessian_batched(lambda W: self.G_batch(z, self.mfd.from_real(W)), u / nrm, V_STEP)

    def real_hessian_inv(self, x, u) -> np.ndarray:
        return np.linalg.inv(self.real_hessian(x, u))


@dataclass
class ComplexFundamentalTensor:
    h: np.ndarray
    h_inv: np.ndarray
    g_value: float
    A: float
    E: np.ndarray
    calE: float


@dataclass
class RealFundamentalTensor:
    g: np.ndarray
    g_inv: np.ndarray
    C: float
    W: list = field(default_factory=list)
    E: np.ndarray = None


class _Pieces(NamedTuple):
    Q: np.ndarray        # per-factor Q_l
    A: float             # sum Q_l^k
    a1: float            # A^(1/k - 1)
    a2: float            # A^(1/k - 2)
    E: np.ndarray        # 1 + t A^(1/k-1) Q_l^(k-1)


class FtkMetric(FinslerMetric):
    """``F_{t,k}`` with closed-form fundamental tensors."""

    def __init__(self, mfd: ProductManifold, params: MetricParams = MetricParams()):
        super().__init__(mfd)
        self.params = params

    def __repr__(self):
        return f"FtkMetric({self.mfd}, t={self.params.t:g}, k={self.params.k})"

    def q_values(self, z, v) -> np.ndarray:
        """Per-factor ``Q_l``; ``v`` may be batched on leading axes."""
        z = self.check_point(z)
        v = np.asarray(v, dtype=complex)
        return np.stack([fac.q_value(f, zl, vl) for f, zl, vl
                         in zip(self.mfd.factors, self.mfd.split(z), self.mfd.split(v))], axis=-1)

    def combine(self, Q) -> np.ndarray:
        """``G`` from per-factor values (last axis)."""
        t, k = self.params.t, self.params.k
        Q = np.asarray(Q, dtype=float)
        qmax = np.max(Q, axis=-1)
        safe = np.where(qmax > 0, qmax, 1.0)
        root = qmax * np.sum((Q / safe[..., None]) ** k, axis=-1) ** (1.0 / k)
        return (np.sum(Q, axis=-1) + t * root) / (1.0 + t)

    def G(self, z, v):
        out = self.combine(self.q_values(z, v))
        return float(out) if np.ndim(out) == 0 else out

    def G_batch(self, z, V):
        return self.combine(self.q_values(z, V))

    def _pieces(self, Q) -> _Pieces:
        t, k = self.params.t, self.params.k
        A = float(np.sum(Q ** k))
        if A <= 0.0:
            raise ZeroSectionError("tangent vector is zero")
        logA = np.log(A)
        a1 = np.exp((1.0 / k - 1.0) * logA)
        a2 = np.exp((1.0 / k - 2.0) * logA)
        E = 1.0 + t * a1 * Q ** (k - 1)
        return _Pieces(Q, A, a1, a2, E)

    def dG_dv(self, z, v) -> np.ndarray:
        z = self.check_point(z)
        v = self.mfd.check_vector(v)
        u, nrm = _unit(v)
        P = self._pieces(self.q_values(z, u))
        out = np.empty(self.N, dtype=complex)
        for l, (f, zl, ul, s) in enumerate(zip(self.mfd.factors, self.mfd.split(z),
                                               self.mfd.split(u), self.mfd.slices)):
            out[s] = P.E[l] * (fac.q_tensor(f, zl) @ ul.conj())
        return out * nrm / (1.0 + self.params.t)

    def fundamental(self, z, v) -> ComplexFundamentalTensor:
        """Hermitian tensor ``G_{a bbar}`` and its inverse in closed form.

        ``H = (C - t(k-1) A^(1/k-2) Y Y^*) / (1+t)`` with block-diagonal ``C``;
        ``C^{-1}`` is explicit per block and ``H^{-1}`` follows from one
        Sherman-Morrison step.
        """
        z = self.check_point(z)
        v = self.mfd.check_vector(v)
        u, nrm = _unit(v)
        t, k = self.params.t, self.params.k
        P = self._pieces(self.q_values(z, u))
        C_blocks, Cinv_blocks, Y = [], [], []
        for l, (f, zl, ul) in enumerate(zip(self.mfd.factors, self.mfd.split(z), self.mfd.split(u))):
            T = fac.q_tensor(f, zl)
            Tinv = fac.q_tensor_inv(f, zl)
            Ql = P.Q[l]
            dv = T @ ul.conj()
            coef = t * (k - 1) * P.a1 * Ql ** (k - 2)
            C_blocks.append(P.E[l] * T + coef * np.outer(dv, dv.conj()))
            corr = coef / (1.0 + t * k * P.a1 * Ql ** (k - 1))
            Cinv_blocks.append((Tinv - corr * np.outer(ul.conj(), ul)) / P.E[l])
            Y.append(Ql ** (k - 1) * dv)
        Y = np.concatenate(Y)
        lam = t * (k - 1) * P.a2
        H = block_diag_inverse(C_blocks) - lam * np.outer(Y, Y.conj())
        Cinv = block_diag_inverse(Cinv_blocks)
        Hinv = rank1_update_inverse(Cinv, Y, lam)
        calE = float(np.sum(P.E * P.Q ** k / (1.0 + t * k * P.a1 * P.Q ** (k - 1))) / P.A)
        h = H / (1.0 + t)
        h = 0.5 * (h + h.conj().T)
        h_inv = Hinv * (1.0 + t)
        h_inv = 0.5 * (h_inv + h_inv.conj().T)
        g_value = self.combine(P.Q) * nrm**2
        return ComplexFundamentalTensor(h, h_inv, float(g_value), P.A, P.E, calE)

    def complex_tensor(self, z, v):
        return self.fundamental(z, v).h

    def complex_tensor_inv(self, z, v):
        return self.fundamental(z, v).h_inv

    # real picture

    def real_gradient_u(self, x, u) -> np.ndarray:
        z = self.mfd.from_real(x)
        v = self.mfd.from_real(u)
        dv = self.dG_dv(z, v)
        # dG/du = 2 Re(dG/dv) on real parts, -2 Im(dG/dv) on imaginary parts
        return self.mfd.to_real(2.0 * dv.conj())

    def real_gradient_x(self, x, u) -> np.ndarray:
        z = self.check_point(self.mfd.from_real(x))
        v = self.mfd.from_real(u)
        un, nrm = _unit(v)
        P = self._pieces(self.q_values(z, un))
        dz = np.empty(self.N, dtype=complex)
        for l, (f, zl, vl, s) in enumerate(zip(self.mfd.factors, self.mfd.split(z),
                                               self.mfd.split(un), self.mfd.slices)):
            dz[s] = P.E[l] * fac.q_derivatives(f, zl, vl).dz
        dz *= nrm**2 / (1.0 + self.params.t)
        # real G: d/dRe = 2 Re(dG/dz), d/dIm = -2 Im(dG/dz)
        return self.mfd.to_real(2.0 * dz.conj())

    def real_mixed(self, x, u) -> np.ndarray:
        z = self.check_point(self.mfd.from_real(x))
        v = self.mfd.from_real(u)
        un, nrm = _unit(v)
        t, k = self.params.t, self.params.k
        P = self._pieces(self.q_values(z, un))
        dv, DQ, DdV = [], [], []
        for f, zl, vl in zip(self.mfd.factors, self.mfd.split(z), self.mfd.split(un)):
            d = fac.q_derivatives(f, zl, vl)
            dT = fac.q_tensor_dz(f, zl)
            # derivative of T along the base direction vl (holomorphic + antiholomorphic parts)
            DT = np.einsum("abc,c->ab", dT, vl) + np.einsum("bac,c->ab", dT, vl).conj()
            dv.append(d.dv)
            DQ.append(2.0 * np.real(d.dz @ vl))
            DdV.append(DT @ vl.conj())
        DQ = np.array(DQ)
        DA = np.sum(k * P.Q ** (k - 1) * DQ)
        DE = t * ((1.0 / k - 1.0) * P.a2 * DA * P.Q ** (k - 1)
                  + P.a1 * (k - 1) * P.Q ** np.maximum(k - 2, 0) * DQ)
        out = np.concatenate([DE[l] * dv[l] + P.E[l] * DdV[l] for l in range(len(dv))])
        out *= nrm**2 / (1.0 + t)
        return self.mfd.to_real(2.0 * out.conj())

    def real_fundamental(self, x, u) -> RealFundamentalTensor:
        """Full real Hessian ``d2G/du du`` and its closed-form inverse."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        z = self.check_point(self.mfd.from_real(x))
        un, _ = _unit(u)
        v = self.mfd.from_real(un)
        t, k = self.params.t, self.params.k
        P = self._pieces(self.q_values(z, v))
        B_blocks, Binv_blocks, Z, W = [], [], [], []
        for l, (f, zl, rs) in enumerate(zip(self.mfd.factors, self.mfd.split(z), self.mfd.real_slices)):
            ul = un[rs]
            Qr = 2.0 * _real_block(fac.q_tensor(f, zl))
            Qr_inv = 0.5 * _real_block(fac.q_tensor_inv(f, zl))
            Ql = P.Q[l]
            du = Qr @ ul
            coef = t * (k - 1) * P.a1 * Ql ** (k - 2)
            denom = 1.0 + t * (2 * k - 1) * P.a1 * Ql ** (k - 1)
            B_blocks.append(P.E[l] * Qr + coef * np.outer(du, du))
            Binv_blocks.append((Qr_inv - coef / denom * np.outer(ul, ul)) / P.E[l])
            Z.append(Ql ** (k - 1) * du)
            W.append(Ql ** (k - 1) * ul / denom)
        Z = np.concatenate(Z)
        lam = t * (k - 1) * P.a2
        g = (block_diag_inverse(B_blocks) - lam * np.outer(Z, Z)) / (1.0 + t)
        C = float(np.sum(P.E * P.Q ** k / (1.0 + t * (2 * k - 1) * P.a1 * P.Q ** (k - 1))) / P.A)
        Wv = np.concatenate(W)
        g_inv = (block_diag_inverse(Binv_blocks) + lam / C * np.outer(Wv, Wv)) * (1.0 + t)
        return RealFundamentalTensor(0.5 * (g + g.T), 0.5 * (g_inv + g_inv.T), C, W, P.E)

    def real_hessian(self, x, u):
        return self.real_fundamental(x, u).g

    def real_hessian_inv(self, x, u):
        return self.real_fundamental(x, u).g_inv


def _real_block(T) -> np.ndarray:
    """Real symmetric form of a Hermitian ``T``: ``v^T T conj(v) = u^T S u``."""
    A, B = T.real, T.imag
    return np.block([[A, B], [-B, A]])


# Module-level operations.

def metric_value(mfd: ProductManifold, p: MetricParams, z, v) -> float:
    return FtkMetric(mfd, p).value(z, v)


def complex_fundamental_tensor(mfd, p, z, v) -> ComplexFundamentalTensor:
    return FtkMetric(mfd, p).fundamental(z, v)


def real_fundamental_tensor(mfd, p, x, u) -> RealFundamentalTensor:
    return FtkMetric(mfd, p).real_fundamental(x, u)


def fd_complex_tensors(metric: FinslerMetric, z, v):
    """Finite-difference ``(G_{a bbar}, G_{ab})``, independent of any closed form."""
    return FinslerMetric.complex_hessians(metric, z, v)


def fd_real_tensor(metric: FinslerMetric, x, u) -> np.ndarray:
    """Finite-difference full real Hessian ``d2G/du du``."""
    return FinslerMetric.real_hessian(metric, x, u)


def cartan_tensor(metric: FinslerMetric, z, v) -> np.ndarray:
    """``C[a, b, c] = d3G / dv^a dvbar^b dv^c`` by differentiating the Hermitian tensor."""
    u, nrm = _unit(metric.mfd.check_vector(v))
    # the inner tensor may itself be a finite difference; a wider outer step
    # keeps its roundoff from being amplified
    dv, _ = fd.wirtinger(lambda w: metric.complex_tensor(z, w), u, CARTAN_STEP)
    return dv / nrm


class BridgeResult(NamedTuple):
    lhs: float
    rhs: float


def real_complex_bridge_check(mfd, p, z, v, V) -> BridgeResult:
    """Both sides of ``U^T (d2G/du du) U = 2 Re(V^T G_{a bbar} conj V + V^T G_{ab} V)``.

    The left side comes from the closed-form real tensor; the right side
    from the closed-form Hermitian tensor plus a finite-difference
    holomorphic-holomorphic block.
    """
    metric = FtkMetric(mfd, p)
    z = metric.check_point(z)
    v = mfd.check_vector(v)
    V = mfd.check_vector(V)
    g = metric.real_fundamental(mfd.to_real(z), mfd.to_real(v)).g
    U = mfd.to_real(V)
    lhs = float(U @ g @ U)
    h = metric.fundamental(z, v).h
    _, S = fd_complex_tensors(metric, z, v)
    rhs = float(2.0 * np.real(V @ h @ V.conj() + V @ S @ V))
    return BridgeResult(lhs, rhs)


def sample_point(mfd: ProductManifold, rng, radius: float = 0.8, fs_radius: float = 2.0) -> np.ndarray:
    """Random point: uniform in the ``radius`` sub-ball for bounded factors."""
    out = []
    for f in mfd.factors:
        w = rng.normal(size=f.dim) + 1j * rng.normal(size=f.dim)
        w /= np.linalg.norm(w)
        if f.bounded:
            r = radius * rng.uniform() ** (1.0 / (2 * f.dim))
        elif f.kind is fac.FactorKind.FUBINI_STUDY:
            r = fs_radius * rng.uniform()
        else:
            r = rng.exponential()
        out.append(r * w)
    return np.concatenate(out)


def sample_vector(mfd: ProductManifold, rng) -> np.ndarray:
    return rng.normal(size=mfd.N) + 1j * rng.normal(size=mfd.N)
