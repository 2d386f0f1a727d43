"""Small dense linear algebra for fundamental tensors.

Everything here works on plain numpy arrays.  Matrices are at most a few
dozen rows, so clarity wins over blocking or LAPACK calls; the one place we
lean on scipy is block-diagonal assembly.
"""
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, SingularUpdateError

SINGULAR_THRESHOLD = 1e-12


class PDResult(NamedTuple):
    is_pd: bool
    min_pivot: float


def _square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        raise InvalidInputError("matrix has dimension 0")
    return m


def hermitian(m) -> np.ndarray:
    """Return the Hermitian part ``(m + m^*)/2`` as a complex array."""
    m = _square(np.asarray(m, dtype=complex))
    return 0.5 * (m + m.conj().T)


def symmetric(m) -> np.ndarray:
    """Return the symmetric part ``(m + m^T)/2`` as a real array."""
    m = _square(np.asarray(m, dtype=float))
    return 0.5 * (m + m.T)


def cholesky_pd_check(m) -> PDResult:
    """Attempt a Cholesky factorization and report the smallest pivot.

    Works for real symmetric and complex Hermitian input.  The pivots are the
    diagonal entries of D in ``m = L D L^*``; the factorization stops at the
    first pivot that is not strictly positive and reports it.
    """
    a = _square(m)
    n = a.shape[0]
    dtype = complex if np.iscomplexobj(a) else float
    L = np.zeros((n, n), dtype=dtype)
    min_pivot = np.inf
    for j in range(n):
        pivot = a[j, j].real - np.sum(np.abs(L[j, :j]) ** 2)
        min_pivot = min(min_pivot, pivot)
        if not pivot > 0.0:
            return PDResult(False, float(pivot))
        d = np.sqrt(pivot)
        L[j, j] = d
        for i in range(j + 1, n):
            L[i, j] = (a[i, j] - L[i, :j] @ L[j, :j].conj()) / d
    return PDResult(True, float(min_pivot))


def rank1_update_inverse(a_inv, y, lam: float, threshold: float = SINGULAR_THRESHOLD) -> np.ndarray:
    """Inverse of ``A - lam * y y^*`` given ``A^{-1}`` (Sherman-Morrison).

    ``a_inv`` must be Hermitian (or real symmetric), so ``A^{-1} y y^* A^{-1}``
    collapses to ``w w^*`` with ``w = A^{-1} y``.
    """
    a_inv = _square(a_inv)
    y = np.asarray(y)
    if y.shape != (a_inv.shape[0],):
        raise InvalidInputError(f"vector of length {a_inv.shape[0]} expected, got shape {y.shape}")
    w = a_inv @ y
    denom = 1.0 - lam * np.real(np.vdot(y, w))
    if abs(denom) <= threshold:
        raise SingularUpdateError(f"rank-1 update denominator {denom:.3e} below {threshold:g}")
    return a_inv + (lam / denom) * np.outer(w, w.conj())


def block_diag_inverse(blocks: Sequence) -> np.ndarray:
    """Assemble already-inverted diagonal blocks into one matrix."""
    if len(blocks) == 0:
        raise InvalidInputError("no blocks given")
    return scipy.linalg.block_diag(*[_square(np.atleast_2d(b)) for b in blocks])
