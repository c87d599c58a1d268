import json
import math

import numpy as np
import pytest

from hessk import linkernel as lk
from hessk import sympoly as sp
from hessk.errors import BadBranchError, BadDeltaError, InfeasibleParamsError, NonPositiveEstimateError
from hessk.matform import AdmissibilityParams, in_admissible
from hessk.verify import (
    SUITES,
    CheckStats,
    Record,
    VerificationReport,
    build_ledger,
    estimate_gamma_uniform,
    make_rng,
    max_feasible_mu,
    random_orthogonal,
    reports_to_csv,
    reports_to_json,
    sample_admissible,
    sample_sigma_slices,
)


def params_for(n, k, delta=0.05, gamma=0.5, mu=None):
    sched = sp.schedule_for(n, k, gamma)
    if mu is None:
        mu = max_feasible_mu(n, AdmissibilityParams(delta, 0.0, sched))
    return AdmissibilityParams(delta, mu, sched)


def test_make_rng_is_keyed():
    a = make_rng(1, 2).random(4)
    assert np.array_equal(a, make_rng(1, 2).random(4))
    assert not np.array_equal(a, make_rng(1, 3).random(4))
    assert not np.array_equal(a, make_rng(2, 2).random(4))


def test_sigma_slices_round_trip():
    sched = sp.gamma_schedule(10, 7)
    lam = sample_sigma_slices(sched, make_rng(0), 500)
    np.testing.assert_allclose(np.linalg.norm(lam, axis=1), 1.0, rtol=1e-14)
    assert all(sp.in_sigma_gamma(row, sched) for row in lam)


def test_random_orthogonal():
    q = random_orthogonal(7, make_rng(3))
    np.testing.assert_allclose(q.T @ q, np.eye(7), atol=1e-13)


@pytest.mark.parametrize("n,k", [(5, 3), (6, 4), (10, 7)])
def test_sample_admissible_round_trip(n, k):
    params = params_for(n, k, delta=0.1)
    for i in range(100):
        aug = sample_admissible(n, k, params, make_rng(7, i))
        assert in_admissible(aug.R, params, k)


def test_sample_admissible_without_schedule():
    params = AdmissibilityParams(0.1, 0.05)
    for i in range(50):
        aug = sample_admissible(4, 2, params, make_rng(8, i))
        assert in_admissible(aug.R, params)


def test_sampler_rejects_infeasible_mu():
    params = params_for(5, 3, delta=0.05)
    with pytest.raises(InfeasibleParamsError):
        sample_admissible(5, 3, AdmissibilityParams(0.05, 10 * params.mu, params.schedule), make_rng(0))
    with pytest.raises(ValueError):
        sample_admissible(6, 3, params, make_rng(0))


def test_zero_mu_gives_symmetric_samples():
    aug = sample_admissible(5, 3, params_for(5, 3, mu=0.0), make_rng(0))
    assert np.all(aug.beta == 0)


def test_ledger_known_values():
    sched = sp.schedule_for(5, 3, 0.5)
    led = build_ledger(5, 3, 0.0, sched, 1.0)
    assert led.C6 == pytest.approx(7.0)
    assert led.C7 == led.C6
    assert led.C4 == pytest.approx(22.0)
    assert led.C8 == 1.0
    assert led.mu_k == pytest.approx(0.0375)
    assert led.d == 0.0


def test_ledger_recomputed_independently():
    n, k, delta, g = 3, 2, 0.05, 0.2
    sched = sp.schedule_for(n, k, 0.5)
    led = build_ledger(n, k, delta, sched, g)
    t = 1 - delta**2
    c6 = (2 ** (k // 2) - 1) + k * delta**2 / t**2 + 2 * k / t
    c4 = 2 * c6 + 8
    c9 = 2 * k * ((1 + (math.sqrt(k) - 1) * delta**2) / t**2 + 1 / (1 + delta**2))
    c12 = c9**2 + 1 + c4 * delta
    mu_k = (k - 1) * k / ((n - 1) * n) * 0.5**k
    c11 = min(g, mu_k)
    assert led.C6 == pytest.approx(c6, rel=1e-15)
    assert led.C9 == pytest.approx(c9, rel=1e-15)
    assert led.C12 == pytest.approx(c12, rel=1e-15)
    assert led.d == pytest.approx(0.03 * c12, rel=1e-14)
    assert led.C11 == pytest.approx(c11) and led.C10 == pytest.approx(c11 / 2)
    d0 = min(0.5, math.sqrt(c11 / (2 * c4)))
    assert led.delta0 == pytest.approx(d0)
    assert led.delta1 == pytest.approx(min(d0, math.sqrt(c11 / (c4 + 1))))
    assert led.delta_within_proven_range is (delta <= led.delta1)


def test_ledger_rejects_bad_delta():
    sched = sp.schedule_for(5, 3, 0.5)
    with pytest.raises(BadDeltaError):
        build_ledger(5, 3, 1.0, sched, 0.1)
    with pytest.raises(BadDeltaError):
        build_ledger(5, 3, -0.1, sched, 0.1)


def test_gamma_estimate_positive_and_labelled():
    est = estimate_gamma_uniform(sp.schedule_for(5, 3, 0.5), 2000, 0)
    assert est.value > 0 and est.violations == 0
    assert est.sampled_max_eig < 0
    assert -est.sampled_max_eig >= est.value
    assert est.label == "empirical upper bound"
    assert json.loads(json.dumps(est.to_dict()))["n"] == 5


def test_gamma_estimate_shrinks_with_wider_cone():
    wide = estimate_gamma_uniform(sp.schedule_for(5, 3, 0.3), 2000, 0)
    narrow = estimate_gamma_uniform(sp.schedule_for(5, 3, 0.5), 2000, 0)
    assert wide.value < narrow.value


def test_gamma_estimate_strict_raises(monkeypatch):
    from hessk.verify import gamma

    sched = sp.schedule_for(5, 3, 0.5)
    real = gamma._estimate(5, 3, sched.gamma_k, sched.branch.value, 100, 0)
    bad = gamma.GammaEstimate(5, 3, sched.gamma_k, -1e-3, real.argmin, 100, 1e-3, 4)
    monkeypatch.setattr(gamma, "_estimate", lambda *a: bad)
    with pytest.raises(NonPositiveEstimateError):
        estimate_gamma_uniform(sched, 100, 0)
    assert estimate_gamma_uniform(sched, 100, 0, strict=False) is bad


def test_record_tolerance():
    assert not Record("x", 1.0, 1.0).violated
    assert not Record("x", 1.0 + 1e-10, 1.0).violated
    assert Record("x", 1.0 + 1e-8, 1.0).violated
    assert Record("x", 1e-13, 0.0, 1e-14).violated
    assert Record("x", math.nan, 0.0).violated
    stats = CheckStats()
    for lhs in (0.5, 0.9, 0.2):
        stats.add(Record("x", lhs, 1.0))
    assert stats.samples == 3 and stats.violations == 0
    assert stats.worst_margin == pytest.approx(-0.1)


def test_report_serialization():
    rep = VerificationReport("demo", {"n": 3, "k": 2, "delta": 0.1, "mu": 0.0, "gamma_k": 0.5,
                                      "branch": "free"}, 1, 2)
    rep.add_records([Record("a", 0.0, 1.0), Record("a", math.inf, 1.0)])
    d = json.loads(rep.to_json())
    assert set(d) == {"suite", "params", "ledger", "samples", "violations", "worst_margin", "seed", "checks"}
    assert d["violations"] == 1 and d["worst_margin"] == "inf"
    rep.wall_ms = 1.5
    assert json.loads(rep.to_json())["wall_ms"] == 1.5
    lines = reports_to_csv([rep, rep]).splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("suite,n,k,delta")
    assert len(json.loads(reports_to_json([rep]))) == 1


@pytest.mark.parametrize("name", ["prop31_34", "structural", "minors"])
def test_suites_clean_at_small_scale(name):
    rep = SUITES[name](5, 3, params_for(5, 3), 50, 1)
    assert rep.samples == 50
    assert rep.violations == 0, rep.to_json()
    assert all(c.samples > 0 for c in rep.checks.values())


def test_dconcavity_suite_clean():
    rep = SUITES["dconcavity"](6, 4, params_for(6, 4), 50, 2)
    assert rep.violations == 0, rep.to_json()
    assert set(rep.checks) == {"d_concavity", "mean_value", "mixed_direction"}


def test_prop51_suite_clean():
    rep = SUITES["prop51"](5, 3, params_for(5, 3), 50, 3)
    assert rep.violations == 0, rep.to_json()


def test_prop45_suite_and_branch_guard():
    rep = SUITES["prop45"](10, 7, params_for(10, 7), 200, 0)
    assert rep.violations == 0, rep.to_json()
    with pytest.raises(BadBranchError):
        SUITES["prop45"](5, 3, params_for(5, 3), 10, 0)


def test_theorem41_suite_reports_estimate():
    rep = SUITES["theorem41"](5, 3, params_for(5, 3), 1000, 0)
    assert rep.violations == 0
    assert rep.extra["gamma_estimate"]["value"] > 0


def test_suites_need_a_schedule():
    with pytest.raises(ValueError):
        SUITES["structural"](5, 3, AdmissibilityParams(0.05, 0.0), 5, 0)


@pytest.mark.parametrize("name", ["dconcavity", "structural"])
def test_suites_are_deterministic_across_threads(name, monkeypatch):
    params = params_for(5, 3)
    monkeypatch.setenv("HESSK_THREADS", "1")
    serial = SUITES[name](5, 3, params, 40, 9).to_json()
    assert SUITES[name](5, 3, params, 40, 9).to_json() == serial
    monkeypatch.setenv("HESSK_THREADS", "4")
    assert SUITES[name](5, 3, params, 40, 9).to_json() == serial
    assert SUITES[name](5, 3, params, 40, 10).to_json() != serial


def test_detects_planted_violation():
    # a skew part far beyond the bound must show up in the sigma-norm check
    from hessk.matform import conjugate_reduce, sigma_tilde_diag

    r = np.eye(4) + 0.5 * lk.skew(make_rng(0).standard_normal((4, 4)))
    st = sigma_tilde_diag(conjugate_reduce(r).R_tilde, 2)
    assert Record("sigma_norm", float(st.sigma_norm.max()), 0.05, 1e-12).violated
