"""Elementary symmetric polynomials, their deleted variants, and the cones
``Gamma_k``, ``Gamma_n`` and ``Sigma(gamma_k)``.

Indices are 0-based. All evaluators accept either a single spectrum of
shape ``(n,)`` or a stack ``(..., n)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadDegreeError,
    BadIndexError,
    BadRangeError,
    MissingFreeGammaError,
    NonFiniteError,
    NotPositiveError,
)


def as_spectrum(values) -> np.ndarray:
    lam = np.array(values, dtype=float)
    if lam.ndim == 0 or lam.shape[-1] < 2:
        raise ValueError("a spectrum needs at least two entries")
    if not np.all(np.isfinite(lam)):
        raise NonFiniteError("spectrum has non-finite entries")
    return lam


def elementary_symmetric(values, kmax: int | None = None) -> np.ndarray:
    """All of ``e_0 .. e_kmax`` along a new last axis.

    Uses the prefix recurrence ``e_k(x_1..x_m) = e_k(x_1..x_{m-1}) + x_m e_{k-1}(x_1..x_{m-1})``.
    """
    x = np.asarray(values, dtype=float)
    n = x.shape[-1]
    kmax = n if kmax is None else kmax
    e = np.zeros(x.shape[:-1] + (kmax + 1,))
    e[..., 0] = 1.0
    for m in range(n):
        xm = x[..., m, None]
        top = min(m + 1, kmax)
        e[..., 1:top + 1] = e[..., 1:top + 1] + xm * e[..., 0:top]
    return e


def _check_degree(k: int, n: int) -> None:
    if k < 0 or k > n:
        raise BadDegreeError(f"degree {k} outside [0, {n}]")


def sigma(k: int, values) -> np.ndarray | float:
    lam = as_spectrum(values)
    _check_degree(k, lam.shape[-1])
    out = elementary_symmetric(lam, k)[..., k]
    return float(out) if out.ndim == 0 else out


def _check_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise BadIndexError(f"index {i} outside [0, {n})")


def sigma_deleted(k: int, values, i: int) -> np.ndarray | float:
    """``sigma_k`` with entry ``i`` set to zero."""
    lam = as_spectrum(values)
    n = lam.shape[-1]
    _check_degree(k, n)
    _check_index(i, n)
    return sigma(k, np.where(np.arange(n) == i, 0.0, lam))


def sigma_deleted2(k: int, values, i: int, j: int) -> np.ndarray | float:
    """``sigma_k`` with entries ``i`` and ``j`` (distinct) set to zero."""
    lam = as_spectrum(values)
    n = lam.shape[-1]
    _check_degree(k, n)
    _check_index(i, n)
    _check_index(j, n)
    if i == j:
        raise BadIndexError("the two deleted indices must differ")
    idx = np.arange(n)
    return sigma(k, np.where((idx == i) | (idx == j), 0.0, lam))


def deleted_table(values, kmax: int) -> np.ndarray:
    """``out[..., i, m] = sigma_m^{(i)}`` for ``m = 0..kmax`` (negative ``m`` is never stored)."""
    lam = np.asarray(values, dtype=float)
    n = lam.shape[-1]
    masked = np.where(np.eye(n, dtype=bool), 0.0, lam[..., None, :])
    return elementary_symmetric(masked, kmax)


def pair_deleted_table(values, kmax: int) -> np.ndarray:
    """``out[..., i, j, m] = sigma_m^{(i,j)}``; the diagonal holds ``sigma_m^{(i)}``."""
    lam = np.asarray(values, dtype=float)
    n = lam.shape[-1]
    eye = np.eye(n, dtype=bool)
    drop = eye[:, None, :] | eye[None, :, :]
    masked = np.where(drop, 0.0, lam[..., None, None, :])
    return elementary_symmetric(masked, kmax)


def dual_spectrum(values) -> np.ndarray:
    lam = as_spectrum(values)
    if np.any(lam <= 0):
        raise NotPositiveError("dual spectrum needs strictly positive entries")
    return 1.0 / lam


class Branch(enum.Enum):
    FREE = "FREE"
    MIDRANGE = "MIDRANGE"
    LOW_DUAL = "LOW_DUAL"


@dataclass(frozen=True)
class GammaSchedule:
    n: int
    k: int
    gamma_k: float
    branch: Branch


def free_degrees(n: int) -> set[int]:
    return {2, 3, 4, n - 2, n - 1}


def gamma_schedule(n: int, k: int, free_gamma: float | None = None) -> GammaSchedule:
    """Ratio bound ``gamma_k`` defining ``Sigma(gamma_k)`` for degree ``k``.

    The small degrees and the two top degrees take a caller-chosen value in
    (0, 1); they win over the other branches when they overlap at small n.
    """
    if n < 3 or not 2 <= k <= n - 1:
        raise BadRangeError(f"need n >= 3 and 2 <= k <= n-1, got n={n}, k={k}")
    half = n // 2
    if k in free_degrees(n):
        if free_gamma is None:
            raise MissingFreeGammaError(f"k={k} (n={n}) needs a caller-supplied gamma")
        if not 0.0 < free_gamma < 1.0:
            raise BadRangeError(f"free gamma must lie in (0, 1), got {free_gamma}")
        return GammaSchedule(n, k, float(free_gamma), Branch.FREE)
    if free_gamma is not None:
        raise BadRangeError(f"k={k} (n={n}) has a fixed gamma; do not pass one")
    if half + 1 <= k <= n - 3:
        return GammaSchedule(n, k, (n - k) / k, Branch.MIDRANGE)
    if 5 <= k <= half:
        return GammaSchedule(n, k, (k - 2) / (n - (k - 2)), Branch.LOW_DUAL)
    raise BadRangeError(f"no schedule branch covers n={n}, k={k}")  # pragma: no cover


def schedule_for(n: int, k: int, gamma: float) -> GammaSchedule:
    """Like :func:`gamma_schedule`, but ``gamma`` is only used where k is free."""
    return gamma_schedule(n, k, gamma if k in free_degrees(n) else None)


def in_gamma_cone(values, k: int) -> bool | np.ndarray:
    """Membership in ``Gamma_k``; for ``k == n`` this is the positive orthant."""
    lam = as_spectrum(values)
    n = lam.shape[-1]
    if not 1 <= k <= n:
        raise BadDegreeError(f"cone degree {k} outside [1, {n}]")
    if k == n:
        out = np.all(lam > 0, axis=-1)
    else:
        out = np.all(elementary_symmetric(lam, k)[..., 1:] > 0, axis=-1)
    return bool(out) if np.ndim(out) == 0 else out


def in_sigma_gamma(values, sched: GammaSchedule) -> bool | np.ndarray:
    lam = as_spectrum(values)
    if lam.shape[-1] != sched.n:
        raise ValueError(f"spectrum length {lam.shape[-1]} does not match schedule n={sched.n}")
    lo, hi = lam.min(axis=-1), lam.max(axis=-1)
    out = (lo > 0) & (lo >= sched.gamma_k * hi)
    return bool(out) if np.ndim(out) == 0 else out
