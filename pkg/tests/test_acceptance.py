"""Acceptance gate: one test per criterion, each reported as PASS or FAIL in
the terminal summary."""

import time
from fractions import Fraction as F
from itertools import product

import pytest

from qcalc import (IDENTITIES, FunctionHandle, OperatorSpec, PoleAtEvaluationPoint, SeriesSpec,
                   Status, dphi, dq_iter, leibniz_rhs, qbinom, qpoch, qpoch_inf, t_apply, verify)
from qcalc.cli import main
from qcalc.identities import (verify_jackson, verify_q_gauss, verify_s5_chu_T,
                              verify_s5_gauss_deriv, verify_s5_jackson_deriv)
from qcalc.qcore import binom2
from qcalc.qoper import (chen_liu_coefficients, poch_ratio_corollary_sum, saad_coefficients,
                         t_coefficients, t_inv_poch, t_of_1phi1, t_of_rphis, t_partial_sums,
                         t_poch_ratio, t_xn_over_poch)

import cf_grid
from conftest import Q_GRID, ectx, fctx, naive_poch

F2 = F(1, 2)


def criterion(number, text):
    return pytest.mark.criterion(number, text)


@criterion(1, "exact Chu family: max residual 0 on the full grids, >= 300 cases each, < 10 s")
def test_chu_family_exact():
    start = time.perf_counter()
    chu = verify("chu", ectx())
    deriv = verify("chu_deriv", ectx())
    elapsed = time.perf_counter() - start
    for rep in (chu, deriv):
        assert rep.status is Status.VERIFIED
        assert rep.max_residual == 0
        assert len(rep.cases) >= 300
    assert elapsed < 10


@criterion(2, "unit-parameter corollary: 3phi2(q^(1-n),q,q^(k+1);cq^(k+1),q^2;q,q) = 0 for 1<=k<=n<=6")
def test_unit_parameter_corollary():
    rep = verify("chu_deriv_a1", ectx())
    assert len(rep.cases) > 0
    nonzero = [c for c in rep.cases if c.residual != 0]
    worst = str(rep.max_residual)
    assert not nonzero, f"{len(nonzero)} of {len(rep.cases)} cases are nonzero, largest {worst}"


@criterion(3, "closed forms equal the lattice q-derivative exactly, >= 1000 cases, < 60 s")
def test_closed_forms_match_lattice():
    start = time.perf_counter()
    gens = [cf_grid.geometric_cases(), cf_grid.inv_poch_cases(), cf_grid.xn_over_poch_cases(),
            cf_grid.poch_ratio_cases(),
            cf_grid.double_ratio_cases(params=[F2, F(-1, 2), F(1, 3)], xs=[F(1), F(2, 3)],
                                       qs=[F2, F(2, 5)], nmax=4, kmax=4)]
    checked = mismatched = 0
    for gen in gens:
        for name, closed, handle, k, x, ctx in gen:
            try:
                value = closed()
            except PoleAtEvaluationPoint:
                continue
            checked += 1
            if value != dq_iter(handle, ctx, k, x):
                mismatched += 1
    assert mismatched == 0
    assert checked >= 1000
    assert time.perf_counter() - start < 60


@criterion(4, "Leibniz rule exact for polynomial pairs of degree <= 5, n <= 5")
def test_leibniz_polynomials():
    def poly(deg, seed):
        cs = [F((-1) ** (i + seed) * (i + seed + 1), i + 2) for i in range(deg + 1)]
        return FunctionHandle.of(lambda t: sum(c * t ** i for i, c in enumerate(cs)))

    for q in Q_GRID:
        c = ectx(q)
        for df, dg in product(range(6), repeat=2):
            f, g = poly(df, 1), poly(dg, 2)
            for n in range(6):
                for x in (F(1), F(-2, 3), F(5, 2)):
                    assert dq_iter(f * g, c, n, x) == leibniz_rhs(f, g, c, n, x)


FLOAT_IDENTITIES = {"gauss": {}, "jackson": {}, "gauss_deriv": {"k": [0, 1, 2]},
                    "jackson_deriv": {"k": [1, 2]}, "chu_T": {"n": [0, 1, 2]}}


@criterion(5, "float identities Verified at 128 bits, residual <= 100x budget and <= 1e-25, < 5 min")
def test_float_identities():
    start = time.perf_counter()
    for identity_id, extra in FLOAT_IDENTITIES.items():
        grid = dict(IDENTITIES[identity_id].default_grid, **extra)
        rep = verify(identity_id, fctx(), grid)
        assert rep.status is Status.VERIFIED, identity_id
        assert rep.max_residual <= 1e-25
        assert all(c.residual <= 100 * c.tail_budget for c in rep.cases)
    points = [
        verify_q_gauss(F2, F(1, 3), F(1, 10), fctx(F2)),
        verify_jackson(F2, F(1, 3), F(1, 7), F(1, 5), fctx(F2)),
        verify_s5_gauss_deriv(1, F2, F(1, 3), F(1, 10), fctx(F2)),
        verify_s5_gauss_deriv(2, F(2, 3), F(1, 5), F(1, 20), fctx(F(1, 3))),
        verify_s5_jackson_deriv(1, F2, F(1, 3), F(1, 5), F(1, 7), fctx(F2)),
        verify_s5_jackson_deriv(2, F(1, 3), F(2, 5), F(1, 4), F(1, 10), fctx(F(1, 3))),
        verify_s5_chu_T(2, F(1, 3), F(1, 5), F(1, 4), F2, fctx(F2)),
    ]
    for case in points:
        assert case.status is Status.VERIFIED and case.residual <= 1e-25
    assert time.perf_counter() - start < 300


def _close(closed, oracle):
    return abs(closed.value - oracle.value) <= 10 * (closed.error + oracle.error)


@criterion(6, "operator closed forms match the operator series; Chen-Liu and Saad coefficients; a=b sum is 1")
def test_operator_suite():
    a, b, x = F(1, 3), F(-1, 2), F(2, 3)
    for q in (F2, F(1, 3)):
        c, e = fctx(q), ectx(q)
        us = [F(1), F2, q]
        for y, u in product([F(1, 4), F(-1, 4)], us):
            op = OperatorSpec(y, u)
            for n in range(5):
                inv = FunctionHandle.of(lambda t, n=n: 1 / naive_poch(a * t, q, n))
                ratio = FunctionHandle.of(lambda t, n=n: naive_poch(a * t, q, n) / naive_poch(b * t, q, n))
                xn = FunctionHandle.of(lambda t, n=n: t ** n / naive_poch(a * t, q, n))
                assert _close(t_inv_poch(a, op, c, n, x), t_apply(op, inv, c, x))
                assert _close(t_poch_ratio(a, b, op, c, n, x), t_apply(op, ratio, c, x))
                assert _close(t_xn_over_poch(a, op, c, n, x), t_apply(op, xn, c, x))
                one = poch_ratio_corollary_sum(F(2, 3), op, c, n, x)
                assert abs(one.value - 1) <= 10 * one.error + 16 * c.eps
        for u, v in product(us, us):
            for n in (1, 2):
                y, z = F(1, 4), F(-1, 5)
                inner = FunctionHandle(lambda t, ctx, n=n, u=u: t_inv_poch(a, OperatorSpec(y, u), ctx, n, t))
                assert _close(t_of_1phi1(a, OperatorSpec(z, v), c, u, y, n, x),
                              t_apply(OperatorSpec(z, v), inner, c, x))
        for u, v in product(us, us):
            spec = SeriesSpec((F2, F(1, 3)), (F(1, 5),), F(1, 4))
            sc = c.with_u(u)
            box = FunctionHandle(lambda t, ctx: dphi(SeriesSpec(spec.upper, (F(1, 5) * t,), spec.z), ctx))
            op = OperatorSpec(F(1, 4), v)
            assert _close(t_of_rphis(spec, op, sc, F2), t_apply(op, box, sc, F2))
        bb = F(2, 7)
        assert t_coefficients(bb, F(1), e, 20) == chen_liu_coefficients(bb, e, 20)
        assert t_coefficients(-bb, q, e, 20) == saad_coefficients(bb, e, 20)
        f = FunctionHandle.of(lambda t: 1 / naive_poch(a * t, q, 2))
        for op, coefs in ((OperatorSpec(bb, F(1)), chen_liu_coefficients(bb, e, 20)),
                          (OperatorSpec(-bb, q), saad_coefficients(bb, e, 20))):
            sums = t_partial_sums(op, f, e, x, 20)
            terms = [sums[0]] + [sums[i] - sums[i - 1] for i in range(1, 20)]
            assert terms == [coefs[n] * dq_iter(f, e, n, x) for n in range(20)]


@criterion(7, "q-shifted factorial identities and both binomial identities for 0 <= k <= n <= 50")
def test_qcore_identities():
    params = [F2, F(-1, 2), F(1, 3), F(2, 3), F(-3, 2), F(4)]
    for q in Q_GRID:
        c = ectx(q)
        for a in params:
            for n, k in product(range(11), repeat=2):
                assert qpoch(a, c, n + k) == qpoch(a, c, n) * qpoch(a * q ** n, c, k)
                assert qpoch(a * q ** n, c, k) * qpoch(a, c, n) == qpoch(a, c, k) * qpoch(a * q ** k, c, n)
                if k <= n:
                    assert qpoch(a * q ** k, c, n - k) * qpoch(a, c, k) == qpoch(a, c, n)
                    assert qbinom(n, k, c) == qbinom(n, n - k, c)
        fc = fctx(q)
        for a in (F2, F(-1, 2), F(1, 3), F(2, 3)):
            for n in range(9):
                top, bot = qpoch_inf(a, fc), qpoch_inf(a * q ** n, fc)
                finite = qpoch(a, fc, n)
                bound = 2 * abs(finite) * (top.tail_bound / abs(top.value) + bot.tail_bound / abs(bot.value))
                assert abs(top.value / bot.value - finite) <= bound + 16 * fc.eps * abs(finite)
    for n in range(51):
        for k in range(n + 1):
            assert binom2(n + k) == binom2(n) + binom2(k) + n * k
            assert binom2(n - k) == binom2(n) + binom2(k) + k * (1 - n)


EXACT_CAPABLE = {"chu", "chu_deriv", "double_ratio"}


@criterion(8, "multiplying any right-hand side by (1+q^10) flips the report to Violated")
def test_fault_injection():
    for identity_id, ident in sorted(IDENTITIES.items()):
        if identity_id == "chu_deriv_a1":
            continue  # its right-hand side is 0, which the factor leaves unchanged
        ctx = ectx() if identity_id in EXACT_CAPABLE else fctx()
        grid = {k: v[:2] for k, v in ident.default_grid.items()}
        if identity_id == "chu_deriv":
            grid.update(k=[1, 2], n=[1, 2, 3])
        assert verify(identity_id, ctx, grid).status is Status.VERIFIED, identity_id
        assert verify(identity_id, ctx, grid, perturb=True).status is Status.VIOLATED, identity_id


@criterion(9, "repeated CLI runs with the same configuration give byte-identical reports")
def test_determinism(tmp_path):
    configs = [
        ["verify", "--identity", "chu", "--n", "0..8", "--grid", "a=1/3,-3/2;c=1/5,7/3;q=1/2,2/5",
         "--mode", "exact"],
        ["verify", "--identity", "gauss_deriv", "--k", "1,2", "--format", "md"],
        ["probe", "--identity", "chu_T", "--n", "1,2", "--threads", "4"],
        ["eval", "dphi", "--upper", "1/2,1/3", "--lower", "1/5", "--q", "1/3", "--z", "1/4", "--u", "1/2"],
    ]
    for i, argv in enumerate(configs):
        blobs = []
        for run in range(2):
            path = tmp_path / f"{i}-{run}.out"
            main(argv + ["--output", str(path)])
            blobs.append(path.read_bytes())
        assert blobs[0] and blobs[0] == blobs[1]
