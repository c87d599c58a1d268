"""``F_k(R) = log S_k(R)`` on augmented matrices ``R = omega + beta``.

``S_k`` is the sum of the k x k principal minors. Everything here works by
enumerating minors in lexicographic order, in chunks, with the batched
routines of :mod:`hessk.linkernel`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linkernel
from .errors import (
    BadDegreeError,
    NonPositiveMinorError,
    NonPositiveSkError,
    NotPositiveDefiniteError,
    NotPositiveError,
    SingularError,
    SingularMinorError,
)
from .scalarform import ENUMERATION_BUDGET, subsets
from .sympoly import GammaSchedule, elementary_symmetric, in_sigma_gamma

CHUNK = 20000


@dataclass(frozen=True)
class AugmentedMatrix:
    R: np.ndarray
    omega: np.ndarray = field(init=False)
    beta: np.ndarray = field(init=False)

    def __post_init__(self):
        r = linkernel.as_matrix(self.R)
        object.__setattr__(self, "R", r)
        object.__setattr__(self, "omega", linkernel.sym(r))
        object.__setattr__(self, "beta", linkernel.skew(r))

    @property
    def eig(self) -> linkernel.SymEigen:
        cached = self.__dict__.get("_eig")
        if cached is None:
            cached = linkernel.sym_eigen(self.omega)
            object.__setattr__(self, "_eig", cached)
        return cached

    @property
    def n(self) -> int:
        return self.R.shape[-1]


@dataclass(frozen=True)
class AdmissibilityParams:
    delta: float
    mu: float
    schedule: GammaSchedule | None = None

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise BadDegreeError(f"minor size {k} outside [1, {n}]")


def minor_indices(n: int, k: int) -> np.ndarray:
    """All increasing index tuples of length k, lexicographic, shape ``(C(n,k), k)``."""
    _check_k(k, n)
    return subsets(n, k)


def _check_index(idx, n: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.intp)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("a minor index is a non-empty 1-d sequence")
    if np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= n:
        raise ValueError(f"minor index must be strictly increasing in [0, {n}), got {idx.tolist()}")
    return idx


def _stack(r: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Principal submatrices for a ``(m, k)`` index array, shape ``(m, k, k)``."""
    return r[idx[:, :, None], idx[:, None, :]]


def minor_matrix(R, idx) -> np.ndarray:
    r = linkernel.as_matrix(R)
    idx = _check_index(idx, r.shape[-1])
    return r[np.ix_(idx, idx)]


def minor_det(R, idx) -> float:
    return float(linkernel.det_lu(minor_matrix(R, idx)))


def minor_log(R, idx) -> float:
    d = minor_det(R, idx)
    if d <= 0:
        raise NonPositiveMinorError(f"minor {list(idx)} has determinant {d}")
    return math.log(d)


def _chunks(n: int, k: int):
    idx = minor_indices(n, k)
    for start in range(0, len(idx), CHUNK):
        yield idx[start:start + CHUNK]


def minor_dets(R, k: int) -> np.ndarray:
    """Determinants of every k x k principal minor, lexicographic order."""
    r = linkernel.as_matrix(R)
    return np.concatenate([np.atleast_1d(linkernel.det_lu(_stack(r, c))) for c in _chunks(r.shape[-1], k)])


def S_k(R, k: int) -> float:
    return float(np.sum(minor_dets(R, k)))


def F_k(R, k: int) -> float:
    s = S_k(R, k)
    if s <= 0:
        raise NonPositiveSkError(f"S_{k}(R) = {s} is not positive")
    return math.log(s)


def _inverses(sub: np.ndarray) -> np.ndarray:
    try:
        return linkernel.invert(sub)
    except SingularError as exc:
        raise SingularMinorError("a principal minor is singular") from exc


def _minor_data(r: np.ndarray, k: int):
    """Per chunk: indices, minor dets and minor inverses."""
    for c in _chunks(r.shape[-1], k):
        sub = _stack(r, c)
        yield c, np.atleast_1d(linkernel.det_lu(sub)), _inverses(sub)


def _positive_sk(dets_total: float, k: int) -> float:
    if dets_total <= 0:
        raise NonPositiveSkError(f"S_{k}(R) = {dets_total} is not positive")
    return dets_total


def grad_F_k(R, k: int) -> np.ndarray:
    """Gradient matrix, entry ``(i, j)`` is the derivative in ``R_ij``."""
    r = linkernel.as_matrix(R)
    n = r.shape[-1]
    _check_k(k, n)
    grad = np.zeros((n, n))
    total = 0.0
    for c, dets, inv in _minor_data(r, k):
        total += dets.sum()
        vals = dets[:, None, None] * np.swapaxes(inv, -1, -2)
        rows = np.broadcast_to(c[:, :, None], vals.shape)
        cols = np.broadcast_to(c[:, None, :], vals.shape)
        np.add.at(grad, (rows, cols), vals)
    return grad / _positive_sk(total, k)


def _traces(inv: np.ndarray, sub_p: np.ndarray, sub_q: np.ndarray):
    """``Tr(A^-1 P)``, ``Tr(A^-1 Q)`` and ``Tr(A^-1 P A^-1 Q)`` per minor."""
    ap = inv @ sub_p
    aq = inv @ sub_q
    tp = np.trace(ap, axis1=-2, axis2=-1)
    tq = np.trace(aq, axis1=-2, axis2=-1)
    tpq = np.einsum("mij,mji->m", ap, aq)
    return tp, tq, tpq


def _bilinear(R, k: int, P, Q) -> float:
    r = linkernel.as_matrix(R)
    p = linkernel.as_matrix(P)
    q = linkernel.as_matrix(Q)
    n = r.shape[-1]
    _check_k(k, n)
    total = sum_tp = sum_tq = sum_second = 0.0
    for c, dets, inv in _minor_data(r, k):
        tp, tq, tpq = _traces(inv, _stack(p, c), _stack(q, c))
        total += dets.sum()
        sum_tp += dets @ tp
        sum_tq += dets @ tq
        sum_second += dets @ (tp * tq - tpq)
    s = _positive_sk(total, k)
    return float(sum_second / s - (sum_tp / s) * (sum_tq / s))


def d2F(R, k: int, M) -> float:
    """Second directional derivative of ``F_k`` at R along M.

    Per minor ``A`` the log-determinant contributes ``Tr(A^-1 M)`` to first
    order and ``-Tr(A^-1 M A^-1 M)`` to second order.
    """
    return _bilinear(R, k, M, M)


def split_pq(M) -> tuple[np.ndarray, np.ndarray]:
    m = linkernel.as_matrix(M)
    return linkernel.sym(m), linkernel.skew(m)


@dataclass(frozen=True)
class CrossTerm:
    polarized: float
    direct: float


def cross_term(R, k: int, P, Q) -> CrossTerm:
    """Mixed term between P and Q, once by polarization and once directly."""
    p = linkernel.as_matrix(P)
    q = linkernel.as_matrix(Q)
    polar = 0.5 * (d2F(R, k, p + q) - d2F(R, k, p) - d2F(R, k, q))
    return CrossTerm(polar, _bilinear(R, k, p, q))


@dataclass(frozen=True)
class Reduced:
    R_tilde: np.ndarray
    M_tilde: np.ndarray
    C: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return np.diag(np.diag(self.R_tilde))

    @property
    def beta_tilde(self) -> np.ndarray:
        return linkernel.skew(self.R_tilde)


def conjugate_reduce(R, M=None) -> Reduced:
    """Rotate into the eigenbasis of ``sym(R)``: ``R~ = C R C^T``, ``M~ = C M C^T``."""
    aug = AugmentedMatrix(R)
    eig = aug.eig
    if eig.eigenvalues[-1] <= 0:
        raise NotPositiveDefiniteError("symmetric part is not positive definite")
    c = eig.eigenvectors.T
    rt = c @ aug.R @ c.T
    mt = None if M is None else c @ linkernel.as_matrix(M) @ c.T
    return Reduced(rt, mt, c)


def _diag_entries(D) -> np.ndarray:
    d = np.asarray(D, dtype=float)
    return np.diagonal(d).copy() if d.ndim == 2 else d


def double_tilde(D, X) -> np.ndarray:
    """``D^{-1/2} X D^{-1/2}`` for D given as a diagonal matrix or its diagonal."""
    d = _diag_entries(D)
    if np.any(d <= 0):
        raise NotPositiveError("double_tilde needs a positive diagonal")
    s = 1.0 / np.sqrt(d)
    return s[:, None] * linkernel.as_matrix(X) * s[None, :]


def _reduced_blocks(R_tilde, k: int):
    r = linkernel.as_matrix(R_tilde)
    n = r.shape[-1]
    _check_k(k, n)
    d = np.diag(r).copy()
    if np.any(d <= 0):
        raise NotPositiveError("reduced matrix needs a positive diagonal")
    idx = minor_indices(n, k)
    sigma_t = _stack(double_tilde(d, linkernel.skew(r)), idx)
    return r, d, idx, sigma_t


@dataclass(frozen=True)
class SigmaTildeDiag:
    indices: np.ndarray
    sigma_norm: np.ndarray
    k_norm: np.ndarray
    literal_k_norm: np.ndarray

    def max_sigma_norm(self) -> float:
        return float(self.sigma_norm.max())

    def sigma_ok(self, delta: float, slack: float = 1e-12) -> bool:
        return bool(np.all(self.sigma_norm <= delta + slack))

    def k_ok(self, delta: float, slack: float = 1e-12) -> bool:
        k = self.indices.shape[-1]
        bound = math.sqrt(k) * delta**2 / (1.0 - delta**2)
        return bool(np.all(self.k_norm <= bound + slack))


def sigma_tilde_diag(R_tilde, k: int) -> SigmaTildeDiag:
    """Per-minor size of the scaled skew part and of its inverse correction.

    ``k_norm`` uses ``K = sym((E + s)^-1) - E = s^2 (E - s^2)^-1``; the plain
    ``(E + s)^-1 - E`` is first order in ``s`` and is reported as ``literal_k_norm``.
    """
    _, _, idx, st = _reduced_blocks(R_tilde, k)
    eye = np.eye(k)
    inv = _inverses(eye + st)
    corr = linkernel.sym(inv) - eye
    return SigmaTildeDiag(
        indices=idx,
        sigma_norm=np.atleast_1d(linkernel.op_norm(st)),
        k_norm=np.atleast_1d(linkernel.frobenius(corr)),
        literal_k_norm=np.atleast_1d(linkernel.frobenius(inv - eye)),
    )


def h_bound_constant(k: int) -> int:
    return 2 ** (k // 2) - 1


@dataclass(frozen=True)
class HFactors:
    indices: np.ndarray
    h_sub: np.ndarray
    h_k: float
    g_sub: np.ndarray
    h_spectral: np.ndarray

    def within_bounds(self, delta: float, slack: float = 1e-12) -> bool:
        k = self.indices.shape[-1]
        bound = h_bound_constant(k) * delta**2
        return bool(
            np.all(self.h_sub >= -slack) and np.all(self.h_sub <= bound + slack)
            and -slack <= self.h_k <= bound + slack
            and np.all(np.abs(self.g_sub) <= bound + slack)
        )


def h_factors(R_tilde, k: int) -> HFactors:
    """How far each minor of ``D + beta~`` sits above the minor of D."""
    r, d, idx, st = _reduced_blocks(R_tilde, k)
    det_d = np.prod(d[idx], axis=-1)
    g_r = np.atleast_1d(linkernel.det_lu(_stack(r, idx)))
    h_sub = g_r / det_d - 1.0
    sk_d = elementary_symmetric(d, k)[k]
    h_k = float(h_sub @ det_d / sk_d)
    g_sub = (1.0 + h_sub) / (1.0 + h_k) - 1.0
    eta = linkernel.skew_spectrum(st)
    h_spec = np.prod(1.0 + eta**2, axis=-1) - 1.0
    return HFactors(idx, h_sub, h_k, g_sub, np.atleast_1d(h_spec))


def in_admissible(R, params: AdmissibilityParams, k: int | None = None) -> bool:
    """Membership of R in the admissible set, optionally the ratio-restricted one."""
    try:
        aug = AugmentedMatrix(R)
        lam = aug.eig.eigenvalues
    except (ValueError, ArithmeticError):
        return False
    lam_min = lam[-1]
    if lam_min <= 0:
        return False
    if linkernel.op_norm(aug.beta) > params.mu:
        return False
    if params.mu > params.delta * lam_min:
        return False
    sched = params.schedule
    if sched is not None:
        if sched.n != aug.n or (k is not None and sched.k != k):
            return False
        return bool(in_sigma_gamma(lam, sched))
    return True


def diagonal_reduction_gap(D, P_tilde, k: int) -> float:
    """Residual of the identity linking the full symmetric direction to its diagonal.

    ``d2F(D, P~) + (1/S_k(D)) sum_minors G(D) sum_{p != q} |P~~_pq|^2 - d2F(D, U~)``
    with U~ the diagonal of P~; zero up to rounding.
    """
    d = _diag_entries(D)
    dm = np.diag(d)
    p = linkernel.as_matrix(P_tilde)
    u = np.diag(np.diag(p))
    pp = double_tilde(d, p) ** 2
    np.fill_diagonal(pp, 0.0)
    idx = minor_indices(d.size, k)
    weights = np.prod(d[idx], axis=-1)
    off = pp[idx[:, :, None], idx[:, None, :]].sum(axis=(-2, -1))
    sk_d = weights.sum()
    return d2F(dm, k, p) + float(weights @ off) / sk_d - d2F(dm, k, u)


def load_matrix(source) -> np.ndarray:
    """Read ``{"n": int, "entries": [[...], ...]}`` from a path or a JSON string."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text()
    else:
        text = source
    obj = json.loads(text)
    entries = np.array(obj["entries"], dtype=float)
    n = int(obj["n"])
    if entries.shape != (n, n):
        raise ValueError(f"entries have shape {entries.shape}, expected ({n}, {n})")
    return linkernel.as_matrix(entries)


def dump_matrix(R) -> str:
    r = linkernel.as_matrix(R)
    return json.dumps({"n": r.shape[-1], "entries": r.tolist()})


__all__ = [
    "AdmissibilityParams", "AugmentedMatrix", "CrossTerm", "ENUMERATION_BUDGET", "HFactors",
    "Reduced", "SigmaTildeDiag", "F_k", "S_k", "conjugate_reduce", "cross_term", "d2F",
    "diagonal_reduction_gap", "double_tilde", "dump_matrix", "grad_F_k", "h_bound_constant",
    "h_factors", "in_admissible", "load_matrix", "minor_det", "minor_dets", "minor_indices",
    "minor_log", "minor_matrix", "sigma_tilde_diag", "split_pq",
]
