"""Empirical estimate of the uniform definiteness constant of the reduced scalar form.

The reduced form is homogeneous of degree 0 in the spectrum, so the ratio cone
can be explored on the box ``[gamma_k, 1]^n``. The estimate is a minimum over
evaluated points and therefore an upper bound on the true constant.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .. import linkernel
from ..errors import NonPositiveEstimateError
from ..scalarform import tilde_coeff_matrix
from ..sympoly import Branch, GammaSchedule
from .samplers import make_rng, sample_sigma_slices

BATCH = 2000
MAX_VERTEX_DIM = 12
DESCENT_ITERS = 200


@dataclass(frozen=True)
class GammaEstimate:
    n: int
    k: int
    gamma_k: float
    value: float
    argmin: tuple
    samples: int
    sampled_max_eig: float
    violations: int
    label: str = "empirical upper bound"

    def to_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "gamma_k": self.gamma_k, "value": self.value,
            "argmin": list(self.argmin), "samples": self.samples,
            "sampled_max_eig": self.sampled_max_eig, "violations": self.violations,
            "label": self.label,
        }


def form_values(k: int, lam: np.ndarray) -> np.ndarray:
    """``-(largest eigenvalue)`` of the reduced coefficient matrix, per row of ``lam``."""
    out = np.empty(len(lam))
    for start in range(0, len(lam), BATCH):
        chunk = lam[start:start + BATCH]
        out[start:start + BATCH] = -linkernel.eigvalsh(tilde_coeff_matrix(k, chunk))[:, 0]
    return out


def _vertices(n: int, g: float) -> np.ndarray:
    if n > MAX_VERTEX_DIM:
        return np.empty((0, n))
    return np.array(list(itertools.product((g, 1.0), repeat=n)))


def _descend(k: int, start: np.ndarray, value: float, g: float):
    """Coordinate search on the box, all 2n moves evaluated together, step halving."""
    x, best = start.copy(), value
    n = x.size
    step = 0.25 * (1.0 - g)
    for _ in range(DESCENT_ITERS):
        if step < 1e-7:
            break
        moves = np.repeat(x[None, :], 2 * n, axis=0)
        moves[np.arange(n), np.arange(n)] += step
        moves[n + np.arange(n), np.arange(n)] -= step
        moves = np.clip(moves, g, 1.0)
        vals = form_values(k, moves)
        i = int(np.argmin(vals))
        if vals[i] < best:
            x, best = moves[i], float(vals[i])
        else:
            step *= 0.5
    return x, best


@functools.lru_cache(maxsize=256)
def _estimate(n: int, k: int, gamma_k: float, branch: str, budget: int, seed: int) -> GammaEstimate:
    sched = GammaSchedule(n, k, gamma_k, Branch(branch))
    lam = sample_sigma_slices(sched, make_rng(seed, n, k), budget)
    vals = form_values(k, lam)
    sampled_max_eig = float(-vals.min()) if budget else float("-inf")
    violations = int(np.sum(vals <= 0))

    verts = _vertices(n, gamma_k)
    pool = np.concatenate([lam / lam.max(axis=1, keepdims=True), verts])
    pool_vals = np.concatenate([vals, form_values(k, verts)]) if len(verts) else vals
    i = int(np.argmin(pool_vals))
    x, best = _descend(k, pool[i], float(pool_vals[i]), gamma_k)
    x = x / np.linalg.norm(x)
    return GammaEstimate(n, k, gamma_k, best, tuple(float(v) for v in x), budget,
                         sampled_max_eig, violations)


def estimate_gamma_uniform(sched: GammaSchedule, budget: int = 10_000, seed: int = 0,
                           strict: bool = True) -> GammaEstimate:
    """Minimum over sampled and refined spectra of ``-(largest eigenvalue)``.

    With ``strict`` a non-positive result raises, since it means the reduced
    form failed to be negative definite somewhere in the cone.
    """
    est = _estimate(sched.n, sched.k, float(sched.gamma_k), sched.branch.value, int(budget), int(seed))
    if strict and (est.value <= 0 or est.violations):
        raise NonPositiveEstimateError(
            f"reduced form is not negative definite for n={sched.n}, k={sched.k}: "
            f"estimate {est.value}, {est.violations} sampled violations")
    return est
