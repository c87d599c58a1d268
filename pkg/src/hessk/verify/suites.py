"""Monte Carlo inequality suites.

Each suite draws samples with a per-sample generator keyed by (seed, index),
turns every inequality into a :class:`Record`, and reduces the records in
index order, so thread count never changes the report.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import linkernel
from ..errors import BadBranchError
from ..matform import (
    AdmissibilityParams,
    F_k,
    conjugate_reduce,
    cross_term,
    d2F,
    double_tilde,
    grad_F_k,
    h_bound_constant,
    h_factors,
    minor_indices,
    sigma_tilde_diag,
)
from ..scalarform import deleted_ratios, g_matrix, ratio_bounds_check
from ..sympoly import Branch, GammaSchedule, sigma
from .gamma import estimate_gamma_uniform
from .ledger import ConstantsLedger, build_ledger
from .report import CheckStats, Record, VerificationReport
from .samplers import (
    make_rng,
    random_skew,
    random_symmetric,
    sample_admissible,
    sample_sigma_slice,
)

GAMMA_BUDGET = 10_000
TAU_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
STRUCTURAL_SLACK = 1e-12
MINOR_REL_SLACK = 1e-10


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HESSK_THREADS", "1")))
    except ValueError:
        return 1


def _map_samples(fn, count: int, seed: int):
    def one(i):
        return fn(make_rng(seed, i))

    threads = thread_count()
    if threads == 1 or count < 2:
        return [one(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(count)))


def _require_schedule(params: AdmissibilityParams) -> GammaSchedule:
    if params.schedule is None:
        raise ValueError("suites need a gamma schedule in the admissibility params")
    return params.schedule


def ledger_for(params: AdmissibilityParams, seed: int = 0) -> ConstantsLedger:
    sched = _require_schedule(params)
    est = estimate_gamma_uniform(sched, GAMMA_BUDGET, seed, strict=False)
    return build_ledger(sched.n, sched.k, params.delta, sched, est.value)


def _params_dict(n: int, k: int, params: AdmissibilityParams) -> dict:
    sched = params.schedule
    return {
        "n": n, "k": k, "delta": params.delta, "mu": params.mu,
        "gamma_k": None if sched is None else sched.gamma_k,
        "branch": None if sched is None else sched.branch.value,
    }


def _run(name: str, n: int, k: int, params: AdmissibilityParams, samples: int, seed: int,
         per_sample, ledger: ConstantsLedger | None) -> VerificationReport:
    report = VerificationReport(
        suite=name, params=_params_dict(n, k, params), seed=seed, samples=samples,
        ledger=None if ledger is None else ledger.to_dict(),
    )
    for records in _map_samples(per_sample, samples, seed):
        report.add_records(records)
    return report


def _fro2(x) -> float:
    return float(np.sum(np.asarray(x) ** 2))


def suite_prop31_34(n: int, k: int, params: AdmissibilityParams, samples: int = 1000,
                    seed: int = 0) -> VerificationReport:
    """Perturbation bounds in the rotated frame, for symmetric, skew and mixed directions."""
    led = ledger_for(params, seed)
    delta = params.delta

    def per_sample(rng):
        aug = sample_admissible(n, k, params, rng)
        red = conjugate_reduce(aug.R, random_symmetric(n, rng))
        c = red.C
        rt, pt = red.R_tilde, red.M_tilde
        qt = c @ random_skew(n, rng) @ c.T
        dm = red.D
        p2 = _fro2(double_tilde(dm, pt))
        q2 = _fro2(double_tilde(dm, qt))
        base = d2F(dm, k, pt)
        return [
            Record("symmetric", d2F(rt, k, pt), base + led.C4 * delta**2 * p2),
            Record("skew", d2F(rt, k, qt), led.C8 * q2),
            Record("mixed", cross_term(rt, k, pt, qt).direct, led.C9 * delta * math.sqrt(p2 * q2)),
            Record("combined", d2F(rt, k, pt + qt),
                   base + (led.C4 + 1) * delta**2 * p2 + (led.C9**2 + led.C8) * q2),
        ]

    return _run("prop31_34", n, k, params, samples, seed, per_sample, led)


def pair_weights(k: int, lam) -> np.ndarray:
    """Weight of all k-subsets containing both l and m, for every pair (zero diagonal)."""
    lam = np.asarray(lam, dtype=float)
    return lam[:, None] * g_matrix(k, lam) * lam[None, :] / sigma(k, lam)


def suite_prop51(n: int, k: int, params: AdmissibilityParams, samples: int = 1000,
                 seed: int = 0) -> VerificationReport:
    """Uniform concavity along symmetric directions, plus the pair-weight floor."""
    led = ledger_for(params, seed)
    off = ~np.eye(n, dtype=bool)

    def per_sample(rng):
        aug = sample_admissible(n, k, params, rng)
        p = random_symmetric(n, rng)
        red = conjugate_reduce(aug.R, p)
        lam = np.diag(red.R_tilde)
        return [
            Record("symmetric_concavity", d2F(aug.R, k, p),
                   -led.C10 * _fro2(double_tilde(lam, red.M_tilde))),
            Record("pair_weight_floor", led.mu_k, float(pair_weights(k, lam)[off].min())),
        ]

    return _run("prop51", n, k, params, samples, seed, per_sample, led)


def suite_dconcavity(n: int, k: int, params: AdmissibilityParams, samples: int = 1000,
                     seed: int = 0) -> VerificationReport:
    """First-order inequalities between sampled pairs, and the mixed-direction bound."""
    led = ledger_for(params, seed)
    taus = np.array(TAU_GRID)

    def per_sample(rng):
        a0 = sample_admissible(n, k, params, rng)
        a1 = sample_admissible(n, k, params, rng)
        m = rng.standard_normal((n, n))
        step = a1.R - a0.R
        gap = F_k(a1.R, k) - F_k(a0.R, k)
        linear = float(np.sum(grad_F_k(a0.R, k) * step))
        path = (1 - taus)[:, None, None] * a0.omega + taus[:, None, None] * a1.omega
        lam_path = float(linkernel.eigvalsh(path)[:, -1].max())
        lam0 = float(a0.eig.eigenvalues[-1])
        return [
            Record("d_concavity", gap, linear + led.d),
            Record("mean_value", gap, linear + led.C12 * _fro2(a1.beta - a0.beta) / lam_path**2),
            Record("mixed_direction", d2F(a0.R, k, m), led.C12 * _fro2(linkernel.skew(m)) / lam0**2),
        ]

    return _run("dconcavity", n, k, params, samples, seed, per_sample, led)


def suite_prop45(n: int, k: int, params: AdmissibilityParams, samples: int = 1000,
                 seed: int = 0) -> VerificationReport:
    """Deleted-ratio bounds on sorted spectra; only defined on the mid-range branch."""
    sched = _require_schedule(params)
    if sched.branch is not Branch.MIDRANGE:
        raise BadBranchError(f"k={k} is not in the mid range for n={n}")

    def per_sample(rng):
        lam = np.sort(sample_sigma_slice(sched, rng))[::-1]
        ratios = deleted_ratios(k, lam)
        rb = ratio_bounds_check(k, lam, sched)
        return [
            Record("last_entry", float(ratios[-1]), float(lam[-1]), 1e-12 * lam[0]),
            Record("last_ratio_max", float(ratios[:-1].max()), float(ratios[-1]), 1e-12 * lam[0]),
            Record("entrywise", float((ratios - lam).max()), 0.0, 1e-12 * lam[0]),
            Record("supremum", abs(rb.sup_ratio - rb.sup_expected), 0.0, 1e-9 * rb.sup_expected),
        ]

    return _run("prop45", n, k, params, samples, seed, per_sample, None)


def suite_structural(n: int, k: int, params: AdmissibilityParams, samples: int = 1000,
                     seed: int = 0) -> VerificationReport:
    """Size of the scaled skew part per minor and the determinant gain it causes."""
    led = ledger_for(params, seed)
    delta = params.delta
    bound = h_bound_constant(k) * delta**2
    k_bound = math.sqrt(k) * delta**2 / (1 - delta**2)
    tol = STRUCTURAL_SLACK

    def per_sample(rng):
        red = conjugate_reduce(sample_admissible(n, k, params, rng).R)
        st = sigma_tilde_diag(red.R_tilde, k)
        hf = h_factors(red.R_tilde, k)
        return [
            Record("sigma_norm", float(st.sigma_norm.max()), delta, tol),
            Record("k_norm", float(st.k_norm.max()), k_bound, tol),
            Record("h_lower", float(-hf.h_sub.min()), 0.0, tol),
            Record("h_upper", float(hf.h_sub.max()), bound, tol),
            Record("h_aggregate_lower", -hf.h_k, 0.0, tol),
            Record("h_aggregate_upper", hf.h_k, bound, tol),
            Record("g_bound", float(np.abs(hf.g_sub).max()), bound, tol),
            Record("h_spectral_match", float(np.abs(hf.h_sub - hf.h_spectral).max()), 0.0, tol),
        ]

    return _run("structural", n, k, params, samples, seed, per_sample, led)


def suite_minors(n: int, k: int, params: AdmissibilityParams, samples: int = 1000,
                 seed: int = 0) -> VerificationReport:
    """Determinant chain and eigenvalue interlacing for every principal minor, all sizes."""
    led = ledger_for(params, seed) if params.schedule is not None else None
    strict = -np.finfo(float).tiny

    def per_sample(rng):
        aug = sample_admissible(n, k, params, rng)
        lam_min = float(aug.eig.eigenvalues[-1])
        lam_max = float(aug.eig.eigenvalues[0])
        records = []
        for size in range(1, n + 1):
            idx = minor_indices(n, size)
            rows, cols = idx[:, :, None], idx[:, None, :]
            d_r = np.atleast_1d(linkernel.det_lu(aug.R[rows, cols]))
            d_w = np.atleast_1d(linkernel.det_lu(aug.omega[rows, cols]))
            d_b = np.atleast_1d(linkernel.det_lu(aug.beta[rows, cols]))
            sub_min = linkernel.eigvalsh(aug.omega[rows, cols])[:, -1]
            scale = np.maximum(1.0, np.abs(d_r))
            gap = (d_w + d_b - d_r) / scale
            records += [
                Record("det_chain_skew", float(gap.max()), 0.0, MINOR_REL_SLACK),
                Record("skew_det_nonneg", float(-d_b.min()), 0.0, MINOR_REL_SLACK),
                Record("omega_det_pos", float(-d_w.min()), 0.0, strict),
                Record("sub_lambda_min", lam_min - float(sub_min.min()), 0.0, MINOR_REL_SLACK * lam_max),
            ]
        return records

    return _run("minors", n, k, params, samples, seed, per_sample, led)


def suite_theorem41(n: int, k: int, params: AdmissibilityParams, samples: int = 10_000,
                    seed: int = 0) -> VerificationReport:
    """Negative definiteness of the reduced scalar form over sampled ratio-cone spectra."""
    sched = _require_schedule(params)
    est = estimate_gamma_uniform(sched, samples, seed, strict=False)
    led = build_ledger(n, k, params.delta, sched, est.value)
    report = VerificationReport(
        suite="theorem41", params=_params_dict(n, k, params), seed=seed, samples=samples,
        ledger=led.to_dict(), extra={"gamma_estimate": est.to_dict()},
    )
    report.checks["negative_definite"] = CheckStats(
        samples=samples, violations=est.violations, worst_margin=est.sampled_max_eig)
    report.add_records([Record("estimate_positive", -est.value, 0.0, -np.finfo(float).tiny)])
    return report


SUITES = {
    "prop31_34": suite_prop31_34,
    "prop51": suite_prop51,
    "dconcavity": suite_dconcavity,
    "prop45": suite_prop45,
    "structural": suite_structural,
    "minors": suite_minors,
    "theorem41": suite_theorem41,
}
