"""Finite-difference oracles.

All stencils are fourth-order central differences.  Complex derivatives are
taken in Wirtinger form: a complex coordinate ``z = x + iy`` is bumped along
its real and imaginary parts separately and

    d/dz    = (d/dx - i d/dy) / 2
    d/dzbar = (d/dx + i d/dy) / 2
"""
import numpy as np

_OFFSETS = (-2.0, -1.0, 1.0, 2.0)
_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


def directional(f, x, direction, h):
    """Derivative of ``f`` at ``x`` along ``direction`` (array-valued f allowed)."""
    x = np.asarray(x)
    direction = np.asarray(direction)
    acc = 0.0
    for o, w in zip(_OFFSETS, _WEIGHTS):
        acc = acc + w * np.asarray(f(x + (o * h) * direction))
    return acc / h


def gradient(f, x, h):
    """Real gradient of ``f`` stacked on the last axis."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = 1.0
        cols.append(directional(f, x, e, h))
    return np.stack(cols, axis=-1)


def hessian(f, x, h):
    """Real Hessian of a scalar function by nested fourth-order stencils."""
    return hessian_batched(lambda X: np.array([f(r) for r in X], dtype=float), x, h)


def hessian_batched(fb, x, h):
    """As :func:`hessian`, with ``fb`` mapping an ``(m, n)`` array of points to ``m`` values.

    Every stencil point is gathered first so ``fb`` is called once.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    eye = np.eye(n)
    offs = np.array(_OFFSETS)
    wts = np.array(_WEIGHTS)
    diag_off = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    diag_w = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    pairs = [(i, j) for i in range(n) for j in range(i)]
    pts = [x + h * o * eye[i] for i in range(n) for o in diag_off]
    for i, j in pairs:
        pts.extend(x + h * (oi * eye[i] + oj * eye[j]) for oi in offs for oj in offs)
    vals = np.asarray(fb(np.array(pts).reshape(-1, n)), dtype=float)
    H = np.empty((n, n))
    dv, rest = vals[: 5 * n].reshape(n, 5), vals[5 * n:].reshape(-1, 4, 4)
    H[np.arange(n), np.arange(n)] = dv @ diag_w / (h * h)
    ww = np.outer(wts, wts)
    for (i, j), block in zip(pairs, rest):
        H[i, j] = H[j, i] = np.sum(ww * block) / (h * h)
    return H


def wirtinger(f, z, h):
    """Wirtinger derivatives of ``f`` w.r.t. every coordinate of ``z``.

    Returns ``(d_z, d_zbar)``, each with the coordinate index on the last axis.
    """
    z = np.asarray(z, dtype=complex)
    dz, dzb = [], []
    for j in range(z.size):
        e = np.zeros_like(z)
        e[j] = 1.0
        fx = directional(f, z, e, h)
        fy = directional(f, z, 1j * e, h)
        dz.append(0.5 * (fx - 1j * fy))
        dzb.append(0.5 * (fx + 1j * fy))
    return np.stack(dz, axis=-1), np.stack(dzb, axis=-1)


def realify(z) -> np.ndarray:
    """``(Re z, Im z)`` concatenated on the last axis."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def complexify(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def complex_hessians(R):
    """Split a real Hessian in ``(Re v, Im v)`` ordering into complex parts.

    Returns ``(H, S)`` with ``H[a, b] = d2/dv^a dvbar^b`` and
    ``S[a, b] = d2/dv^a dv^b``.
    """
    n = R.shape[0] // 2
    aa, ab = R[:n, :n], R[:n, n:]
    ba, bb = R[n:, :n], R[n:, n:]
    H = 0.25 * (aa + bb + 1j * (ab - ba))
    S = 0.25 * (aa - bb - 1j * (ab + ba))
    return H, S


def vvbar_hessian(g, v, h, batched=False):
    """Complex Hessian ``d2 g / dv dvbar`` of a real function of complex ``v``.

    With ``batched`` the function accepts an ``(m, n)`` array of vectors.
    """
    if batched:
        R = hessian_batched(lambda X: g(complexify(X)), realify(v), h)
    else:
        R = hessian(lambda x: g(complexify(x)), realify(v), h)
    return complex_hessians(R)
