"""Seeded samplers for spectra in the ratio cone and for admissible augmented matrices."""
from __future__ import annotations

import math

import numpy as np

from .. import linkernel
from ..errors import InfeasibleParamsError
from ..matform import AdmissibilityParams, AugmentedMatrix
from ..sympoly import GammaSchedule

# keeps |beta| strictly inside the bound after rounding
_SHRINK = 1.0 - 1e-12


def make_rng(seed: int, *index: int) -> np.random.Generator:
    """Counter-based generator keyed by a master seed and an optional sample index."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, index)])))


def sample_sigma_slices(sched: GammaSchedule, rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` unit-norm spectra, each with ratio min/max at least ``gamma_k``."""
    n, g = sched.n, sched.gamma_k
    lam = g + (1.0 - g) * rng.random((count, n))
    lam[:, 0] = 1.0
    lam = rng.permuted(lam, axis=1)
    return lam / np.sqrt(np.sum(lam * lam, axis=1, keepdims=True))


def sample_sigma_slice(sched: GammaSchedule, rng: np.random.Generator) -> np.ndarray:
    return sample_sigma_slices(sched, rng, 1)[0]


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    return q * np.where(signs == 0, 1.0, signs)


def random_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    return linkernel.skew(rng.standard_normal((n, n)))


def random_symmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    return linkernel.sym(rng.standard_normal((n, n)))


def max_feasible_mu(n: int, params: AdmissibilityParams) -> float:
    """Largest mu for which every spectrum the sampler can draw keeps ``mu <= delta lam_min``.

    Spectra are unit-norm with ratio at least gamma, then scaled by a factor of at
    least 1/2, so ``lam_min >= gamma / (2 sqrt(n))``. Without a schedule the
    entries are drawn from [1/2, 2] directly.
    """
    sched = params.schedule
    floor = 0.5 if sched is None else 0.5 * sched.gamma_k / math.sqrt(n)
    return params.delta * floor


def sample_admissible(n: int, k: int, params: AdmissibilityParams,
                      rng: np.random.Generator) -> AugmentedMatrix:
    sched = params.schedule
    if sched is not None and (sched.n != n or sched.k != k):
        raise ValueError(f"schedule is for (n={sched.n}, k={sched.k}), not ({n}, {k})")
    if params.mu > max_feasible_mu(n, params):
        raise InfeasibleParamsError(
            f"mu={params.mu} exceeds delta * (smallest reachable lam_min) = {max_feasible_mu(n, params)}")
    if sched is None:
        lam = rng.uniform(0.5, 2.0, n)
    else:
        lam = sample_sigma_slice(sched, rng) * rng.uniform(0.5, 2.0)
    q = random_orthogonal(n, rng)
    omega = linkernel.sym(q.T @ (lam[:, None] * q))
    b = random_skew(n, rng)
    target = rng.random() * min(params.mu, params.delta * lam.min()) * _SHRINK
    norm = linkernel.op_norm(b)
    beta = b * (target / norm) if norm > 0 else np.zeros_like(b)
    return AugmentedMatrix(omega + beta)
