from fractions import Fraction as F
from math import comb

import mpmath
import pytest
from hypothesis import given, strategies as st

from qcalc import ExactModeUnsupported, MaxTermsExceeded, qbinom, qfact, qpoch, qpoch_inf, qpoch_multi
from qcalc.qcore import INF, binom2, inv_qfact, qpoch_inf_quotient, qpoch_multi_inf, zero_index

from conftest import Q_GRID, ectx, fctx, mp_qp_inf, naive_poch

A_GRID = [F(1, 2), F(-1, 2), F(1, 3), F(2, 3)]
params = st.sampled_from([F(1, 2), F(-1, 2), F(1, 3), F(2, 3), F(-3, 2), F(7, 3), F(4), F(0)])
qs = st.sampled_from(Q_GRID + [F(-1, 2)])


def test_empty_product(exact_half):
    assert qpoch(F(7, 3), exact_half, 0) == 1


def test_qpoch_value():
    assert qpoch(F(1, 2), ectx(F(1, 3)), 3) == F(85, 216)


def test_qpoch_unit_parameter(exact_half):
    assert all(qpoch(F(1), exact_half, n) == 0 for n in range(1, 6))


def test_qpoch_negative_power_of_q_vanishes_past_its_index(exact_half):
    # a = q^-2 = 4: factors 1-4, 1-2, 1-1 = 0
    assert qpoch(F(4), exact_half, 2) == (1 - 4) * (1 - 2)
    assert qpoch(F(4), exact_half, 3) == 0
    assert zero_index(F(4), exact_half) == 2
    assert zero_index(F(3), exact_half) is None


def test_qpoch_multi():
    c = ectx(F(1, 2))
    assert qpoch_multi([], c, 5) == 1
    assert qpoch_multi([F(1, 2), F(1, 3)], c, 2) == F(5, 24)
    assert qpoch_multi([F(2, 3), F(1)], c, 3) == 0


def test_qbinom_values(exact_half):
    assert qbinom(4, 2, exact_half) == F(35, 16)
    assert qbinom(9, 0, exact_half) == 1
    assert qbinom(3, 5, exact_half) == 0
    assert qbinom(3, -1, exact_half) == 0


def test_inv_qfact_negative_is_zero(exact_half):
    assert inv_qfact(-1, exact_half) == 0
    assert inv_qfact(3, exact_half) == 1 / qfact(3, exact_half)


@given(st.integers(0, 40), st.integers(0, 40), qs)
def test_qbinom_symmetry(n, k, q):
    c = ectx(q)
    assert qbinom(n, k, c) == qbinom(n, n - k, c) if k <= n else qbinom(n, k, c) == 0


@given(params, qs, st.integers(0, 10), st.integers(0, 10))
def test_shift_splits_product(a, q, n, k):
    c = ectx(q)
    assert qpoch(a, c, n + k) == qpoch(a, c, n) * qpoch(a * q ** n, c, k)


@given(params, qs, st.integers(0, 10), st.integers(0, 10))
def test_shift_exchange(a, q, n, k):
    c = ectx(q)
    lhs = qpoch(a * q ** n, c, k) * qpoch(a, c, n)
    rhs = qpoch(a, c, k) * qpoch(a * q ** k, c, n)
    assert lhs == rhs


@given(params, qs, st.integers(0, 10), st.integers(0, 10))
def test_tail_quotient(a, q, n, k):
    if k > n:
        n, k = k, n
    c = ectx(q)
    assert qpoch(a * q ** k, c, n - k) * qpoch(a, c, k) == qpoch(a, c, n)


@given(params, qs, st.integers(0, 12))
def test_qpoch_matches_naive(a, q, n):
    assert qpoch(a, ectx(q), n) == naive_poch(a, q, n)


@pytest.mark.parametrize("a", [F(1, 2), F(-1, 2), F(1, 3), F(2, 3)])
@pytest.mark.parametrize("q", Q_GRID)
@pytest.mark.parametrize("n", range(9))
def test_finite_as_quotient_of_infinite(a, q, n):
    c = fctx(q)
    top = qpoch_inf(a, c)
    bot = qpoch_inf(a * q ** n, c)
    finite = qpoch(a, c, n)
    # |x/y - f| with relative bounds on x and y
    approx = top.value / bot.value
    bound = (top.tail_bound / abs(top.value) + bot.tail_bound / abs(bot.value)) * abs(approx) * 2
    assert abs(approx - finite) <= bound + 16 * c.eps * abs(finite)


def test_qpoch_inf_basic():
    c = fctx(F(1, 2))
    assert qpoch_inf(F(0), c).value == 1 and qpoch_inf(F(0), c).tail_bound == 0
    assert qpoch_inf(F(1), c).value == 0
    assert qpoch_inf(F(4), c).value == 0
    with pytest.raises(ExactModeUnsupported):
        qpoch_inf(F(1, 2), ectx())


def test_qpoch_inf_against_brute_force():
    c = fctx(F(1, 2))
    r = qpoch_inf(F(1, 2), c)
    assert r.tail_bound <= c.rel_tol * abs(r.value)
    assert r.value == qpoch(F(1, 2), c, r.factors_used)
    with mpmath.workprec(200):
        brute = mpmath.mpf(1)
        t = mpmath.mpf(1) / 2
        for _ in range(10_000):
            brute *= 1 - t
            t /= 2
        assert abs(r.value - brute) <= r.tail_bound + 4 * c.eps
        assert abs(brute - mp_qp_inf(F(1, 2), F(1, 2))) < mpmath.mpf(10) ** -50


@pytest.mark.parametrize("a", [F(1, 2), F(-2, 3), F(3, 2)])
@pytest.mark.parametrize("q", [F(1, 2), F(2, 5), F(-1, 3)])
def test_qpoch_inf_against_mpmath(a, q):
    c = fctx(q, prec=160)
    r = qpoch_inf(a, c)
    assert abs(r.value - mp_qp_inf(a, q)) <= r.tail_bound + 8 * c.eps * abs(r.value)


def test_qpoch_inf_max_terms():
    c = fctx(F(9, 10), truncation=__import__("qcalc").TruncationPolicy(max_terms=10))
    with pytest.raises(MaxTermsExceeded):
        qpoch_inf(F(1, 2), c)


def test_multi_inf_and_quotient():
    c = fctx(F(1, 3))
    r = qpoch_multi_inf([F(1, 2), F(1, 5)], c)
    with mpmath.workdps(60):
        assert abs(r.value - mp_qp_inf(F(1, 2), F(1, 3)) * mp_qp_inf(F(1, 5), F(1, 3))) <= r.tail_bound + 8 * c.eps
    assert qpoch_multi([F(1, 2), F(1, 5)], c, INF) == r.value
    # (a;q)_inf / (aq^3;q)_inf is the finite (a;q)_3, exactly in exact mode
    e = ectx(F(1, 3))
    quotient = qpoch_inf_quotient([F(1, 2)], [F(1, 2) * F(1, 3) ** 3], e)
    assert quotient.value == qpoch(F(1, 2), e, 3)


def test_binomial_identities():
    for n in range(51):
        for k in range(n + 1):
            assert binom2(n + k) == binom2(n) + binom2(k) + n * k
            assert binom2(n - k) == binom2(n) + binom2(k) + k * (1 - n)
            assert binom2(n) == comb(n, 2)
