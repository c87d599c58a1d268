"""Dense linear algebra kernel.

Every routine accepts a single matrix of shape ``(n, n)`` or a stack of
matrices of shape ``(..., n, n)`` and works on the whole stack at once.
Determinants and inverses use partial-pivoted elimination, the symmetric
eigensolver is cyclic Jacobi. Nothing here calls into LAPACK.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergenceError,
    NonFiniteError,
    NotSkewError,
    NotSymmetricError,
    SingularError,
)

SYMMETRY_TOL = 1e-12
SINGULAR_TOL = 1e-12
JACOBI_SWEEPS = 30
_JACOBI_TOL = 1e-15


def as_matrix(a, *, square: bool = True) -> np.ndarray:
    """Convert to a float64 array, checking shape and finiteness."""
    arr = np.array(a, dtype=float)
    if arr.ndim < 2:
        raise ValueError(f"expected a matrix, got shape {arr.shape}")
    if square and arr.shape[-1] != arr.shape[-2]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("matrix has non-finite entries")
    return arr


def frobenius(a) -> np.ndarray | float:
    a = np.asarray(a, dtype=float)
    return np.sqrt(np.sum(a * a, axis=(-2, -1)))


def sym(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def skew(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return 0.5 * (a - np.swapaxes(a, -1, -2))


@dataclass(frozen=True)
class SymEigen:
    """Eigen-decomposition ``A = V diag(w) V^T`` with ``w`` descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ np.swapaxes(v, -1, -2)


def _check_symmetric(a: np.ndarray) -> None:
    resid = frobenius(a - np.swapaxes(a, -1, -2))
    scale = frobenius(a)
    if np.any(resid > SYMMETRY_TOL * np.maximum(scale, np.finfo(float).tiny)):
        raise NotSymmetricError("matrix is not symmetric to tolerance")


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[:, p, q]
    active = np.abs(apq) > 0.0
    if not np.any(active):
        return
    safe = np.where(active, apq, 1.0)
    # an infinite theta gives t = 0, the identity rotation
    with np.errstate(over="ignore"):
        theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
        t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    c2, s2 = c[:, None], s[:, None]

    ap, aq = a[:, :, p].copy(), a[:, :, q].copy()
    a[:, :, p] = c2 * ap - s2 * aq
    a[:, :, q] = s2 * ap + c2 * aq
    ap, aq = a[:, p, :].copy(), a[:, q, :].copy()
    a[:, p, :] = c2 * ap - s2 * aq
    a[:, q, :] = s2 * ap + c2 * aq
    a[:, p, q] = 0.0
    a[:, q, p] = 0.0

    vp, vq = v[:, :, p].copy(), v[:, :, q].copy()
    v[:, :, p] = c2 * vp - s2 * vq
    v[:, :, q] = s2 * vp + c2 * vq


def sym_eigen(a, max_sweeps: int = JACOBI_SWEEPS) -> SymEigen:
    """Symmetric eigendecomposition by cyclic Jacobi rotations.

    Eigenvalues come back sorted descending. Each eigenvector is sign-fixed
    so that its largest-magnitude component is positive, which makes the
    result reproducible.
    """
    a = as_matrix(a)
    _check_symmetric(a)
    shape = a.shape
    n = shape[-1]
    work = sym(a).reshape(-1, n, n).copy()
    vecs = np.broadcast_to(np.eye(n), work.shape).copy()
    scale = np.maximum(frobenius(work), np.finfo(float).tiny)
    offdiag = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps + 1):
        off = np.sqrt(np.sum(work[:, offdiag] ** 2, axis=-1))
        if np.all(off <= _JACOBI_TOL * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(work, vecs, p, q)
    else:
        raise NoConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diagonal(work, axis1=-2, axis2=-1).copy()
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=-1)
    pivot = np.argmax(np.abs(vecs), axis=-2)
    signs = np.sign(np.take_along_axis(vecs, pivot[:, None, :], axis=-2))
    vecs = vecs * np.where(signs == 0, 1.0, signs)
    return SymEigen(w.reshape(shape[:-1]), vecs.reshape(shape))


def eigvalsh(a) -> np.ndarray:
    """Eigenvalues only, descending."""
    return sym_eigen(a).eigenvalues


def _lu_pivots(a: np.ndarray):
    """Forward elimination on a stack; returns (pivots, permutation sign)."""
    n = a.shape[-1]
    work = a.reshape(-1, n, n).copy()
    batch = np.arange(work.shape[0])
    sign = np.ones(work.shape[0])
    pivots = np.empty((work.shape[0], n))
    for j in range(n):
        piv = j + np.argmax(np.abs(work[:, j:, j]), axis=-1)
        swap = piv != j
        if np.any(swap):
            rows_j = work[batch, j].copy()
            work[batch, j] = work[batch, piv]
            work[batch, piv] = rows_j
            sign = np.where(swap, -sign, sign)
        d = work[:, j, j]
        pivots[:, j] = d
        if j + 1 < n:
            safe = np.where(d == 0.0, 1.0, d)
            factors = work[:, j + 1:, j] / safe[:, None]
            factors[d == 0.0] = 0.0
            work[:, j + 1:, j:] -= factors[:, :, None] * work[:, None, j, j:]
    return pivots, sign


def det_lu(a) -> np.ndarray | float:
    """Determinant by partial-pivoted elimination.

    Matrices whose smallest pivot falls below ``1e-12 * |A|_F`` are treated as
    singular and get determinant exactly 0.
    """
    a = as_matrix(a)
    shape = a.shape[:-2]
    n = a.shape[-1]
    pivots, sign = _lu_pivots(a)
    scale = frobenius(a.reshape(-1, n, n))
    singular = np.min(np.abs(pivots), axis=-1) <= SINGULAR_TOL * scale
    det = np.where(singular, 0.0, sign * np.prod(pivots, axis=-1))
    det = det.reshape(shape)
    return float(det) if det.ndim == 0 else det


def invert(a) -> np.ndarray:
    """Gauss-Jordan inverse with partial pivoting; raises on singular input."""
    a = as_matrix(a)
    shape = a.shape
    n = shape[-1]
    work = a.reshape(-1, n, n).copy()
    inv = np.broadcast_to(np.eye(n), work.shape).copy()
    batch = np.arange(work.shape[0])
    scale = frobenius(work)
    for j in range(n):
        piv = j + np.argmax(np.abs(work[:, j:, j]), axis=-1)
        d = work[batch, piv, j]
        if np.any(np.abs(d) <= SINGULAR_TOL * scale):
            raise SingularError("matrix is singular to working tolerance")
        swap = piv != j
        if np.any(swap):
            for m in (work, inv):
                row_j = m[batch, j].copy()
                m[batch, j] = m[batch, piv]
                m[batch, piv] = row_j
        inv[:, j] /= d[:, None]
        work[:, j] /= d[:, None]
        factors = work[:, :, j].copy()
        factors[:, j] = 0.0
        work -= factors[:, :, None] * work[:, None, j, :]
        inv -= factors[:, :, None] * inv[:, None, j, :]
    return inv.reshape(shape)


def skew_spectrum(b) -> np.ndarray:
    """Magnitudes ``eta_j >= 0`` of the eigenvalue pairs ``+-i eta_j`` of a skew matrix.

    Returns ``ceil(n/2)`` values sorted descending; for odd ``n`` the last one
    is the zero eigenvalue. Computed from the eigenvalues of ``B^T B``.
    """
    b = as_matrix(b)
    resid = frobenius(b + np.swapaxes(b, -1, -2))
    if np.any(resid > SYMMETRY_TOL * np.maximum(frobenius(b), 1.0)):
        raise NotSkewError("matrix is not skew-symmetric to tolerance")
    btb = np.swapaxes(b, -1, -2) @ b
    w = eigvalsh(sym(btb))
    return np.sqrt(np.clip(w, 0.0, None))[..., ::2]


def op_norm(a) -> np.ndarray | float:
    """Operator 2-norm (largest singular value)."""
    a = as_matrix(a, square=False)
    ata = np.swapaxes(a, -1, -2) @ a
    top = np.sqrt(np.clip(eigvalsh(sym(ata))[..., 0], 0.0, None))
    return float(top) if np.ndim(top) == 0 else top
