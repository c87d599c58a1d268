import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hessk import linkernel as lk
from hessk import oracle
from hessk import scalarform as sf
from hessk import sympoly as sp
from hessk.errors import BadDegreeError, BadIndexError, BadRangeError, NonPositiveSigmaError, TooLargeError


def _rng(seed=0):
    return np.random.default_rng(seed)


positive = st.lists(st.floats(0.1, 10.0), min_size=3, max_size=8)


def test_f_k_examples():
    assert sf.f_k(2, [1, 1, 1]) == pytest.approx(math.log(3))
    assert sf.f_k(4, np.ones(4)) == 0.0
    assert sf.f_k(2, [1, 2, 3]) == pytest.approx(math.log(11))
    with pytest.raises(NonPositiveSigmaError):
        sf.f_k(3, [1.0, 1.0, -1.0])
    with pytest.raises(BadDegreeError):
        sf.f_k(0, [1.0, 2.0])


def test_grad_examples():
    np.testing.assert_allclose(sf.grad_f_k(2, [1, 1, 1]), [2 / 3] * 3)
    np.testing.assert_allclose(sf.grad_f_k(2, [1, 2, 3]), [5 / 11, 4 / 11, 3 / 11])


@settings(max_examples=40, deadline=None)
@given(positive, st.integers(1, 7))
def test_grad_euler_and_fd(lam, k):
    lam = np.array(lam)
    k = min(k, lam.size)
    g = sf.grad_f_k(k, lam)
    assert g @ lam == pytest.approx(k, rel=1e-12)
    fd = oracle.fd_grad(lambda x: sf.f_k(k, x), lam)
    np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-9)


def test_hessian_example():
    h = sf.hessian_f_k(2, np.ones(3))
    expected = np.full((3, 3), -1 / 9)
    np.fill_diagonal(expected, -4 / 9)
    np.testing.assert_allclose(h, expected, atol=1e-15)


def test_hessian_matches_fd_of_gradient():
    lam = _rng(1).uniform(0.5, 2.0, 5)
    for k in range(1, 6):
        h = sf.hessian_f_k(k, lam)
        rows = [oracle.fd_grad(lambda x: sf.grad_f_k(k, x)[i], lam) for i in range(5)]
        np.testing.assert_allclose(h, np.array(rows), rtol=1e-5, atol=1e-8)


def test_d2f_examples():
    assert sf.d2f(2, [1, 1, 1], [1, 1, 1]) == pytest.approx(-2)
    lam = _rng(2).uniform(0.5, 2, 6)
    assert sf.d2f(3, lam, np.zeros(6)) == 0.0
    assert sf.d2f(3, lam, lam) == pytest.approx(-3, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(positive, st.integers(0, 2**32 - 1))
def test_d2f_matches_subset_oracle(lam, seed):
    lam = np.array(lam)
    xi = _rng(seed).standard_normal(lam.size)
    for k in range(2, lam.size):
        a = sf.d2f(k, lam, xi)
        b = oracle.subset_d2f(k, lam, xi)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12 * max(1.0, np.sum((xi / lam) ** 2)))


def test_d2f_tilde_examples():
    lam = _rng(3).uniform(0.5, 2, 5)
    assert sf.d2f_tilde(3, lam, np.ones(5)) == pytest.approx(-3, abs=1e-10)
    assert sf.d2f_tilde(3, lam, np.zeros(5)) == 0.0
    eta = _rng(4).standard_normal(5)
    t = oracle.subset_terms(3, lam, eta)
    assert sf.d2f_tilde(3, lam, eta) == pytest.approx(-t.A + t.B - t.C, rel=1e-10)


def test_batched_d2f():
    lam = _rng(5).uniform(0.5, 2, (4, 6))
    xi = _rng(6).standard_normal((4, 6))
    batched = sf.d2f(3, lam, xi)
    for i in range(4):
        assert batched[i] == pytest.approx(sf.d2f(3, lam[i], xi[i]), rel=1e-13)


def test_a_coeff_examples():
    a = sf.a_coeff(2, np.ones(4), 0, 1)
    assert a.printed == pytest.approx(1.0)
    assert a.hessian == pytest.approx(3.0)
    with pytest.raises(BadIndexError):
        sf.a_coeff(2, np.ones(4), 1, 1)
    with pytest.raises(BadDegreeError):
        sf.a_coeff(4, np.ones(4), 0, 1)


@pytest.mark.parametrize("n,k", [(4, 2), (5, 3), (6, 4), (7, 2)])
def test_only_hessian_coefficient_reproduces_reduced_form(n, k):
    lam = _rng(n + k).uniform(0.5, 2.0, n)
    m = sf.tilde_coeff_matrix(k, lam)
    s = sp.sigma(k, lam)
    for i in range(n):
        for j in range(i + 1, n):
            a = sf.a_coeff(k, lam, i, j)
            implied = -lam[i] * lam[j] * a.hessian / s**2
            assert m[i, j] == pytest.approx(implied, rel=1e-10)
            misprint = -lam[i] * lam[j] * a.printed / s**2
            assert abs(m[i, j] - misprint) > 1e-6 * abs(m[i, j])


def test_tilde_matrix_properties():
    h = sf.hessian_f_k(3, np.ones(5))
    np.testing.assert_allclose(sf.tilde_coeff_matrix(3, np.ones(5)), h)
    lam = _rng(7).uniform(0.5, 2, 4)
    m = sf.tilde_coeff_matrix(2, lam)
    assert np.ones(4) @ m @ np.ones(4) == pytest.approx(-2, abs=1e-12)
    np.testing.assert_array_equal(m, m.T)
    etas = _rng(8).standard_normal((100, 4))
    direct = np.array([sf.d2f_tilde(2, lam, e) for e in etas])
    via_m = np.einsum("bi,ij,bj->b", etas, m, etas)
    assert np.max(np.abs(direct - via_m)) <= 1e-9 * lk.frobenius(m)


def test_term_decomposition():
    lam = _rng(9).uniform(0.5, 2, 5)
    t0 = sf.term_decomposition(3, lam, np.zeros(5))
    assert (t0.A, t0.B, t0.C, t0.E) == (0, 0, 0, 0)
    t1 = sf.term_decomposition(3, lam, np.ones(5))
    assert t1.A == pytest.approx(9)
    assert t1.E == pytest.approx(6)
    eta = _rng(10).standard_normal(5)
    t = sf.term_decomposition(3, lam, eta)
    assert t.B - t.C - t.E == pytest.approx(0, abs=1e-10 * max(1, abs(t.B)))
    assert -t.A + t.E == pytest.approx(sf.d2f_tilde(3, lam, eta), rel=1e-10)
    ref = oracle.subset_terms(3, lam, eta)
    for name in "ABCE":
        assert getattr(t, name) == pytest.approx(getattr(ref, name), rel=1e-10, abs=1e-13)


def test_term_decomposition_budget():
    with pytest.raises(TooLargeError):
        sf.subsets(40, 20)


@pytest.mark.parametrize("n", range(3, 13))
def test_g_matrix_k2_closed_form_determinant(n):
    g = sf.g_matrix(2, np.ones(n))
    assert lk.det_lu(g) == pytest.approx((-1) ** (n - 1) * (n - 1), rel=1e-9)
    assert not sf.g_matrix_degenerate(2, np.ones(n))


def test_g_matrix_n4_k3():
    g = sf.g_matrix(3, np.ones(4))
    assert np.all(g[~np.eye(4, dtype=bool)] == 2)
    assert lk.det_lu(g) == pytest.approx(-48)


def test_g_matrix_duality_scaling():
    lam = _rng(11).uniform(0.5, 2, 6)
    for k in range(2, 6):
        kd = 6 - k + 2
        if not 2 <= kd <= 5:
            continue
        lhs = lk.det_lu(sf.g_matrix(kd, 1 / lam))
        rhs = lk.det_lu(sf.g_matrix(k, lam)) / np.prod(lam) ** 4
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_d2g_examples_and_sign():
    lam = _rng(12).uniform(0.5, 2, 5)
    assert sf.d2g_k(3, lam, lam) == pytest.approx(0, abs=1e-12)
    with pytest.raises(BadDegreeError):
        sf.d2g_k(1, lam, lam)
    xi = _rng(13).standard_normal(5)
    fd = oracle.fd_second_directional(lambda x: sp.sigma(3, x) ** (1 / 3), lam, xi)
    assert sf.d2g_k(3, lam, xi) == pytest.approx(fd, rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(positive, st.integers(0, 2**32 - 1))
def test_d2g_nonpositive_on_positive_cone(lam, seed):
    lam = np.array(lam)
    xi = _rng(seed).standard_normal(lam.size)
    for k in range(2, lam.size + 1):
        v = sf.d2g_k(k, lam, xi)
        scale = sp.sigma(k, lam) ** (1 / k) * np.sum((xi / lam) ** 2)
        assert v <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(positive)
def test_reduced_form_semidefinite_on_positive_cone(lam):
    lam = np.array(lam)
    for k in range(2, lam.size):
        m = sf.tilde_coeff_matrix(k, lam)
        assert sf.max_tilde_eigenvalue(k, lam) <= 1e-10 * max(1.0, lk.frobenius(m))


def test_nondegenerate_g_implies_definite():
    rng = _rng(14)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(3, 8))
        k = int(rng.integers(2, n))
        lam = rng.uniform(0.05, 3.0, n)
        if not sf.g_matrix_degenerate(k, lam):
            checked += 1
            assert sf.max_tilde_eigenvalue(k, lam) < 0
    assert checked > 100


def test_ratio_bounds_all_ones():
    rb = sf.ratio_bounds_check(7, np.ones(10))
    assert rb.sup_ratio == pytest.approx(3 / 7)
    assert rb.last_entry_bound and rb.ok


def test_ratio_bounds_random_in_cone():
    sched = sp.gamma_schedule(10, 7)
    rng = _rng(15)
    for _ in range(200):
        lam = np.sort(rng.uniform(sched.gamma_k, 1.0, 10))[::-1]
        lam[0] = 1.0
        assert sf.ratio_bounds_check(7, lam, sched).ok


def test_ratio_bounds_range_errors():
    with pytest.raises(BadRangeError):
        sf.ratio_bounds_check(3, np.ones(10))
    with pytest.raises(BadRangeError):
        sf.ratio_bounds_check(5, np.ones(10))
    lam = np.ones(10)
    lam[-1] = 0.1
    with pytest.raises(BadRangeError):
        sf.ratio_bounds_check(7, lam)
