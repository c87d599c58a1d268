"""Independent reference computations used to certify the analytic formulas.

Nothing here reuses the deleted-polynomial tables or the minor calculus of
the other modules: derivatives come from central differences, symmetric sums
from literal subset enumeration, and minor sums from the characteristic
polynomial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import NonFiniteError, TooLargeError
from .scalarform import ENUMERATION_BUDGET, TermDecomposition


@dataclass(frozen=True)
class FDConfig:
    relative_step: float = 1e-5
    scheme: str = "central"

    def __post_init__(self):
        if not 1e-9 < self.relative_step < 1e-2:
            raise ValueError(f"relative_step must lie in (1e-9, 1e-2), got {self.relative_step}")
        if self.scheme != "central":
            raise ValueError("only central differences are supported")


def _scale(x: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(x)))) if x.size else 1.0


def _eval(f, x) -> float:
    v = float(f(x))
    if not math.isfinite(v):
        raise NonFiniteError("function is not finite at a probe point")
    return v


def fd_grad(f, x, cfg: FDConfig | None = None) -> np.ndarray:
    cfg = cfg or FDConfig()
    x = np.array(x, dtype=float)
    h = cfg.relative_step * _scale(x)
    out = np.empty_like(x)
    flat = out.reshape(-1)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        e = e.reshape(x.shape)
        flat[i] = (_eval(f, x + e) - _eval(f, x - e)) / (2 * h)
    return out


def fd_second_directional(f, x, direction, cfg: FDConfig | None = None) -> float:
    """``[f(x + hM) - 2 f(x) + f(x - hM)] / h^2``.

    The default step here is 1e-4 rather than the gradient default, since the
    second difference loses about twice as many digits to rounding.
    """
    cfg = cfg or FDConfig(relative_step=1e-4)
    x = np.array(x, dtype=float)
    m = np.asarray(direction, dtype=float)
    h = cfg.relative_step * _scale(x)
    return (_eval(f, x + h * m) - 2.0 * _eval(f, x) + _eval(f, x - h * m)) / h**2


def charpoly_ek(A) -> np.ndarray:
    """``e_1 .. e_n`` of the eigenvalues of A, by the Faddeev-LeVerrier recurrence."""
    a = np.array(A, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("charpoly_ek needs a square matrix")
    if n > 64:
        raise ValueError("charpoly_ek is limited to n <= 64")
    m = np.zeros((n, n))
    c = 1.0
    ek = np.empty(n)
    for k in range(1, n + 1):
        m = a @ m + c * np.eye(n)
        c = -np.trace(a @ m) / k
        ek[k - 1] = (-1) ** k * c
    return ek


def _subsets(n: int, k: int):
    if math.comb(n, k) > ENUMERATION_BUDGET:
        raise TooLargeError(f"C({n},{k}) exceeds the enumeration budget")
    return combinations(range(n), k)


def subset_sigma(k: int, lam) -> float:
    lam = [float(v) for v in lam]
    return math.fsum(math.prod(lam[i] for i in s) for s in _subsets(len(lam), k))


def subset_terms(k: int, lam, eta) -> TermDecomposition:
    """The four weighted subset sums, one subset at a time in plain Python."""
    lam = [float(v) for v in lam]
    eta = [float(v) for v in eta]
    n = len(lam)
    total = subset_sigma(k, lam)
    a = b = c = e = 0.0
    for s in _subsets(n, k):
        w = math.prod(lam[i] for i in s) / total
        lin = sum(eta[i] for i in s)
        sq = sum(eta[i] ** 2 for i in s)
        a += w * lin
        b += w * lin * lin
        c += w * sq
        e += w * sum(eta[p] * eta[q] for p in s for q in s if p != q)
    return TermDecomposition(a * a, b, c, e)


def subset_d2f(k: int, lam, xi) -> float:
    """Second directional derivative of ``log sigma_k`` from the subset sums."""
    lam_a = np.asarray(lam, dtype=float)
    t = subset_terms(k, lam_a, np.asarray(xi, dtype=float) / lam_a)
    return -t.A + t.B - t.C
