"""The scalar function ``f_k(lam) = log sigma_k(lam)`` and its second-order forms.

``tilde`` quantities are the forms in the scaled variable ``eta`` where the
increment is ``xi = lam * eta``; they are homogeneous of degree 0 in ``lam``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from . import linkernel
from .errors import (
    BadDegreeError,
    BadIndexError,
    BadRangeError,
    MissingFreeGammaError,
    NonPositiveSigmaError,
    TooLargeError,
)
from .sympoly import (
    Branch,
    GammaSchedule,
    as_spectrum,
    deleted_table,
    elementary_symmetric,
    gamma_schedule,
    in_sigma_gamma,
    pair_deleted_table,
)

ENUMERATION_BUDGET = 10**6


def _sigma_k(k: int, lam: np.ndarray) -> np.ndarray:
    n = lam.shape[-1]
    if not 1 <= k <= n:
        raise BadDegreeError(f"degree {k} outside [1, {n}]")
    s = elementary_symmetric(lam, k)[..., k]
    if np.any(s <= 0):
        raise NonPositiveSigmaError(f"sigma_{k} is not positive at the given spectrum")
    return s


def _deleted(k: int, lam: np.ndarray) -> np.ndarray:
    """``sigma_{k-1}^{(i)}`` for every i."""
    return deleted_table(lam, k - 1)[..., k - 1]


def _pair_deleted(m: int, lam: np.ndarray) -> np.ndarray:
    """``sigma_m^{(i,j)}`` for every pair, zero on the diagonal and for ``m < 0``."""
    n = lam.shape[-1]
    if m < 0:
        return np.zeros(lam.shape + (n,))
    table = pair_deleted_table(lam, m)[..., m]
    return np.where(np.eye(n, dtype=bool), 0.0, table)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def f_k(k: int, values) -> np.ndarray | float:
    lam = as_spectrum(values)
    return _scalar(np.log(_sigma_k(k, lam)))


def grad_f_k(k: int, values) -> np.ndarray:
    lam = as_spectrum(values)
    s = _sigma_k(k, lam)
    return _deleted(k, lam) / s[..., None]


def hessian_f_k(k: int, values) -> np.ndarray:
    """Hessian of ``log sigma_k``: ``G_k(lam)/sigma_k - grad grad^T``."""
    lam = as_spectrum(values)
    s = _sigma_k(k, lam)[..., None, None]
    g = _deleted(k, lam) / s[..., 0]
    return _pair_deleted(k - 2, lam) / s - g[..., :, None] * g[..., None, :]


def _quad(m: np.ndarray, v: np.ndarray):
    return _scalar(np.einsum("...i,...ij,...j->...", v, m, v))


def d2f(k: int, values, xi) -> np.ndarray | float:
    lam = as_spectrum(values)
    return _quad(hessian_f_k(k, lam), np.asarray(xi, dtype=float))


def d2f_tilde(k: int, values, eta) -> np.ndarray | float:
    lam = as_spectrum(values)
    return d2f(k, lam, lam * np.asarray(eta, dtype=float))


def tilde_coeff_matrix(k: int, values) -> np.ndarray:
    """Symmetric ``M`` with ``eta^T M eta == d2f_tilde``; ``diag(lam) H diag(lam)``."""
    lam = as_spectrum(values)
    h = hessian_f_k(k, lam)
    m = lam[..., :, None] * h * lam[..., None, :]
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def max_tilde_eigenvalue(k: int, values) -> np.ndarray | float:
    """Largest eigenvalue of :func:`tilde_coeff_matrix`; negative means definite."""
    return _scalar(linkernel.eigvalsh(tilde_coeff_matrix(k, values))[..., 0])


class ACoefficient(NamedTuple):
    printed: float
    hessian: float


def a_coeff(k: int, values, i: int, j: int) -> ACoefficient:
    """Off-diagonal coefficient of the reduced form, in two versions.

    ``printed`` keeps a factor 1/2 on the squared term,
    ``0.5 * s_{k-1}^2 - s_k s_{k-2}`` over the doubly deleted spectrum.
    ``hessian`` is what the Hessian actually implies,
    ``s_{k-1}^2 - s_k s_{k-2}``; only this one reproduces ``d2f_tilde``.
    """
    lam = as_spectrum(values)
    if lam.ndim != 1:
        raise ValueError("a_coeff takes a single spectrum")
    n = lam.size
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise BadIndexError(f"need distinct indices in [0, {n}), got {i}, {j}")
    if not 2 <= k <= n - 1:
        raise BadDegreeError(f"need 2 <= k <= n-1, got k={k}")
    reduced = lam.copy()
    reduced[[i, j]] = 0.0
    e = elementary_symmetric(reduced, k)
    s_km1, s_k, s_km2 = e[k - 1], e[k], e[k - 2]
    return ACoefficient(float(0.5 * s_km1**2 - s_k * s_km2), float(s_km1**2 - s_k * s_km2))


@dataclass(frozen=True)
class TermDecomposition:
    A: float
    B: float
    C: float
    E: float


def subsets(n: int, k: int) -> np.ndarray:
    if math.comb(n, k) > ENUMERATION_BUDGET:
        raise TooLargeError(f"C({n},{k}) exceeds the enumeration budget")
    return np.array(list(combinations(range(n), k)), dtype=np.intp).reshape(-1, k)


def term_decomposition(k: int, values, eta) -> TermDecomposition:
    """The four weighted subset sums behind the reduced form, by enumeration.

    With subset weights ``w_I = prod(lam_I) / sigma_k`` and ``s_I = sum(eta_I)``:
    ``A = (sum w s)^2``, ``B = sum w s^2``, ``C = sum w sum(eta_I^2)`` and
    ``E = sum w sum_{p != q} eta_p eta_q``.
    """
    lam = as_spectrum(values)
    eta = np.asarray(eta, dtype=float)
    idx = subsets(lam.shape[-1], k)
    prods = np.prod(lam[idx], axis=-1)
    w = prods / prods.sum()
    e_sub = eta[idx]
    s = e_sub.sum(axis=-1)
    sq = (e_sub**2).sum(axis=-1)
    A = float(w @ s) ** 2
    B = float(w @ s**2)
    C = float(w @ sq)
    E = float(w @ (s**2 - sq))
    return TermDecomposition(A, B, C, E)


def _closed_terms(k: int, lam: np.ndarray, eta: np.ndarray):
    """A, C, E from deleted polynomials, without enumeration (B = C + E)."""
    s = _sigma_k(k, lam)
    inclusion = lam * _deleted(k, lam) / s[..., None]
    pair = lam[..., :, None] * _pair_deleted(k - 2, lam) * lam[..., None, :] / s[..., None, None]
    A = np.sum(inclusion * eta, axis=-1) ** 2
    C = np.sum(inclusion * eta**2, axis=-1)
    E = np.einsum("...i,...ij,...j->...", eta, pair, eta)
    return A, C, E


def d2g_k(k: int, values, xi) -> np.ndarray | float:
    """Second directional derivative of ``g_k = sigma_k^(1/k)``.

    ``(k-1)/k^2 * g_k * (-A + B - C + E/(k-1))`` with the terms taken at
    ``eta = xi / lam``. Non-positive on the positive cone.
    """
    lam = as_spectrum(values)
    if k < 2:
        raise BadDegreeError("d2g_k needs k >= 2 (g_1 is linear)")
    xi = np.asarray(xi, dtype=float)
    A, C, E = _closed_terms(k, lam, xi / lam)
    B = C + E
    g = _sigma_k(k, lam) ** (1.0 / k)
    return _scalar((k - 1) / k**2 * g * (-A + B - C + E / (k - 1)))


def g_matrix(k: int, values) -> np.ndarray:
    """Zero-diagonal matrix of ``sigma_{k-2}^{(i,j)}``."""
    lam = as_spectrum(values)
    n = lam.shape[-1]
    if not 2 <= k <= n - 1:
        raise BadDegreeError(f"need 2 <= k <= n-1, got k={k}")
    return _pair_deleted(k - 2, lam)


def g_matrix_degenerate(k: int, values, tol: float = 1e-10):
    g = g_matrix(k, values)
    n = g.shape[-1]
    scale = np.max(np.abs(g), axis=(-2, -1))
    out = np.abs(linkernel.det_lu(g)) <= tol * scale**n
    return bool(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class RatioBounds:
    """Outcome of the deleted-ratio bounds on a descending spectrum in Sigma(gamma_k)."""

    last_entry_bound: bool
    last_ratio_is_max: np.ndarray
    entrywise_bound: np.ndarray
    sup_ratio: float
    sup_expected: float

    @property
    def sup_ok(self) -> bool:
        return abs(self.sup_ratio - self.sup_expected) <= 1e-9 * abs(self.sup_expected)

    @property
    def ok(self) -> bool:
        return (self.last_entry_bound and bool(np.all(self.last_ratio_is_max))
                and bool(np.all(self.entrywise_bound)) and self.sup_ok)


def deleted_ratios(k: int, values) -> np.ndarray:
    """``sigma_k^{(j)} / sigma_{k-1}^{(j)}`` for every j."""
    lam = as_spectrum(values)
    table = deleted_table(lam, k)
    return table[..., k] / table[..., k - 1]


def ratio_bounds_check(k: int, lam_sorted_desc, sched: GammaSchedule | None = None,
                       rtol: float = 1e-12) -> RatioBounds:
    lam = as_spectrum(lam_sorted_desc)
    if lam.ndim != 1:
        raise ValueError("ratio_bounds_check takes a single spectrum")
    n = lam.size
    if sched is None:
        try:
            sched = gamma_schedule(n, k)
        except MissingFreeGammaError:
            raise BadRangeError(f"k={k} is outside the mid range for n={n}") from None
    if sched.branch is not Branch.MIDRANGE or sched.k != k:
        raise BadRangeError(f"k={k} is outside the mid range for n={n}")
    if np.any(np.diff(lam) > 0):
        raise ValueError("spectrum must be sorted descending")
    if not in_sigma_gamma(lam, sched):
        raise BadRangeError("spectrum is not in Sigma(gamma_k)")

    ratios = deleted_ratios(k, lam)
    slack = rtol * lam[0]
    flat = np.full(n - 1, lam[0])
    e = elementary_symmetric(flat, k)
    return RatioBounds(
        last_entry_bound=bool(lam[-1] >= ratios[-1] - slack),
        last_ratio_is_max=ratios[-1] >= ratios[:-1] - slack,
        entrywise_bound=lam >= ratios - slack,
        sup_ratio=float(e[k] / e[k - 1]),
        sup_expected=sched.gamma_k * lam[0],
    )
