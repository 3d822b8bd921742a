"""The u-deformed q-exponential operator T(yD_q|u) and its closed forms.

    T(yD_q|u) f(x) = sum_n u^C(n,2) y^n / (q;q)_n  D_q^n f(x)

``t_apply`` sums this series directly from lattice values of ``f``.  Each
n-th derivative divides by x q^j about n times, so it works at raised
precision and restarts with more guard bits if the propagated error is too
large.  The ``t_*`` closed forms reduce to finite sums of 1_Phi_1 values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List

from .errors import ExactModeUnsupported, MaxTermsExceeded, PoleAtEvaluationPoint, ZeroEvaluationPoint
from .qcore import binom2, qbinom, qfact, qpoch
from .qdiff import FunctionHandle, lattice_point
from .qhyper import SeriesSpec, check_convergence, check_poles, direct_term, dphi, terminating_index
from .scalar import QContext, Scalar, TruncationPolicy, is_exact, log2_abs
from .series import SeriesResult, Termination, accumulate


@dataclass(frozen=True)
class OperatorSpec:
    """Parameters y and u of T(yD_q|u) and the truncation of its sum."""

    y: Scalar
    u: Scalar = Fraction(1)
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)


def _prod(ctx: QContext, *xs):
    if all(is_exact(x) for x in xs):
        out = Fraction(1)
        for x in xs:
            out *= x
        return out
    out = ctx.one
    for x in xs:
        out *= ctx.num(x)
    return out


# -- coefficients -----------------------------------------------------------

def t_coefficients(y, u, ctx: QContext, count: int) -> List[Scalar]:
    """c_n = u^C(n,2) y^n / (q;q)_n for n < count."""
    return [ctx.num(u) ** binom2(n) * ctx.num(y) ** n / qfact(n, ctx) for n in range(count)]


def chen_liu_coefficients(b, ctx: QContext, count: int) -> List[Scalar]:
    """Coefficients b^n / (q;q)_n of T(bD_q)."""
    return [ctx.num(b) ** n / qfact(n, ctx) for n in range(count)]


def saad_coefficients(b, ctx: QContext, count: int) -> List[Scalar]:
    """Coefficients (-1)^n q^C(n,2) b^n / (q;q)_n of R(bD_q)."""
    return [(-1) ** n * ctx.num(ctx.qpow(binom2(n))) * ctx.num(b) ** n / qfact(n, ctx)
            for n in range(count)]


# -- direct operator sum ------------------------------------------------------

class _Derivatives:
    """Incremental D_q^n f(x) for n = 0, 1, 2, ... on the lattice x q^j.

    After the j-th call ``vals[m]`` is D^m f(x q^(j-m)), the newest
    antidiagonal of the difference table; one new lattice value extends it.
    """

    def __init__(self, f: FunctionHandle, ctx: QContext, x):
        self.f, self.ctx, self.x = f, ctx, x
        self.vals: list = []
        self.errs: list = []
        self.n = -1

    def next(self):
        ctx = self.ctx
        self.n += 1
        j = self.n
        p = lattice_point(self.x, j, ctx)
        v, e = self.f.estimate(p, ctx)
        vals, errs = [v], [e]
        eps = ctx.eps
        # D^m f(x q^{j-m}) = (D^{m-1} f(x q^{j-m}) - D^{m-1} f(x q^{j-m+1})) / (x q^{j-m})
        for m in range(1, j + 1):
            inv = 1 / ctx.num(lattice_point(self.x, j - m, ctx))
            d = (self.vals[m - 1] - vals[m - 1]) * inv
            vals.append(d)
            errs.append((self.errs[m - 1] + errs[m - 1]) * abs(inv) + 2 * eps * abs(d))
        self.vals, self.errs = vals, errs
        return vals[j], errs[j]


def _guard_bits(x, ctx: QContext, terms: int) -> int:
    lq = -math.log2(abs(float(ctx.qn)))
    lx = max(0.0, -log2_abs(x))
    return int(binom2(terms) * lq + terms * lx) + 32


def _operator_terms(op: OperatorSpec, f: FunctionHandle, ctx: QContext, x, cap: int):
    derivs = _Derivatives(f, ctx, x)
    y, u = ctx.num(op.y), ctx.num(op.u)
    coef = ctx.one
    for n in range(cap):
        if n:
            coef = coef * u ** (n - 1) * y / (1 - ctx.num(ctx.qpow(n)))
        d, e = derivs.next()
        yield coef * d, abs(coef) * e, None


def t_apply(op: OperatorSpec, f: FunctionHandle, ctx: QContext, x) -> SeriesResult:
    """T(yD_q|u) f evaluated at x by summing the operator series.

    The evaluator sees a context of higher precision whose rel_tol matches
    that precision.  Float mode only, except for the identity case y = 0.
    """
    if x == 0:
        raise ZeroEvaluationPoint("the operator involves D_q, undefined at x = 0")
    if op.y == 0:
        v, e = f.estimate(x, ctx)
        return SeriesResult(v, 1, Termination.EXACT_TERMINATING, ctx.zero, e)
    if ctx.exact:
        raise ExactModeUnsupported("the operator series is infinite; use t_partial_sums")
    policy = op.trunc
    target = max(ctx.num(policy.rel_tol), 16 * ctx.eps)
    plan = min(policy.max_terms, 40)
    while True:
        guard = _guard_bits(x, ctx, plan)
        hi_prec = ctx.prec + guard
        hi = ctx.replace(prec=hi_prec,
                         truncation=TruncationPolicy(max_terms=max(4 * hi_prec, 500),
                                                     rel_tol=Fraction(1, 2 ** (hi_prec - 16)),
                                                     stall_window=policy.stall_window))
        inner = TruncationPolicy(max_terms=plan, rel_tol=policy.rel_tol,
                                 stall_window=policy.stall_window)
        try:
            res = accumulate(_operator_terms(op, f, hi, x, plan + 1), hi, inner)
        except MaxTermsExceeded:
            res = None
        done = res is not None and res.terminated is not Termination.MAX_TERMS
        if not done and plan < policy.max_terms:
            plan = min(policy.max_terms, 2 * plan)
            continue
        if res is None:
            raise MaxTermsExceeded(f"operator series did not settle in {policy.max_terms} terms")
        value = ctx.num(res.value)
        round_err = ctx.num(res.round_error) + ctx.eps * abs(value)
        if round_err > target * max(abs(value), ctx.eps) and plan < policy.max_terms:
            # the plan was met but the lattice lost too many bits: widen the guard
            plan = min(policy.max_terms, plan + 16)
            continue
        return SeriesResult(value, res.terms_used, res.terminated,
                            ctx.num(res.tail_estimate), round_err)


def t_partial_sums(op: OperatorSpec, f: FunctionHandle, ctx: QContext, x, count: int) -> List[Scalar]:
    """The first ``count`` partial sums of the operator series, in any mode."""
    if x == 0:
        raise ZeroEvaluationPoint("the operator involves D_q, undefined at x = 0")
    out, total = [], ctx.zero
    for t, _, _ in _operator_terms(op, f, ctx, x, count):
        total += t
        out.append(total)
    return out


# -- closed forms -----------------------------------------------------------

def _pow(ctx: QContext, v, i: int):
    return Fraction(v) ** i if is_exact(v) else ctx.num(v) ** i


def phi11(top, bottom, arg, u, ctx: QContext) -> SeriesResult:
    """1_Phi_1(top; bottom; q, u/q, arg)."""
    over_q = (Fraction(u) / ctx.q if is_exact(u) and is_exact(ctx.q)
              else ctx.num(u) / ctx.qn)
    return dphi(SeriesSpec((top,), (bottom,), arg), ctx.with_u(over_q))


def _nz(value, label):
    if value == 0:
        raise PoleAtEvaluationPoint(label)
    return value


class WeightedSum:
    """Running sum of SeriesResult-weighted terms with error bookkeeping."""

    def __init__(self, ctx: QContext):
        self.ctx = ctx
        self.value = ctx.zero
        self.tail = ctx.zero
        self.round = ctx.zero
        self.terms = 0
        self.finite = True

    def add(self, weight, res: SeriesResult) -> None:
        ctx = self.ctx
        w = ctx.num(weight)
        term = w * ctx.num(res.value)
        self.value += term
        self.tail += abs(w) * ctx.num(res.tail_estimate or 0)
        self.round += abs(w) * ctx.num(res.round_error) + 4 * ctx.eps * abs(term)
        self.terms += res.terms_used
        if res.terminated is not Termination.EXACT_TERMINATING:
            self.finite = False

    def result(self, scale=1) -> SeriesResult:
        ctx = self.ctx
        s = ctx.num(scale)
        kind = Termination.EXACT_TERMINATING if self.finite else Termination.TAIL_TOLERANCE
        return SeriesResult(self.value * s, self.terms, kind, self.tail * abs(s),
                            self.round * abs(s) + ctx.eps * abs(self.value * s))


def t_inv_poch(a, op: OperatorSpec, ctx: QContext, n: int, x) -> SeriesResult:
    """T(yD_q|u) {1/(ax;q)_n} = 1_Phi_1(q^n; a q^n x; q, u/q, -a y) / (ax;q)_n."""
    ax = _prod(ctx, a, x)
    den = _nz(qpoch(ax, ctx, n), f"(ax;q)_{n}")
    res = phi11(ctx.qpow(n), _prod(ctx, ax, ctx.qpow(n)), _prod(ctx, -1, a, op.y), op.u, ctx)
    total = WeightedSum(ctx)
    total.add(1 / den, res)
    return total.result()


def _poch_ratio_sum(a, b, op: OperatorSpec, ctx: QContext, n: int, x, qpower):
    """The i-sum of the ratio theorem; ``qpower(i)`` is the (uq)^C(i,2) weight."""
    ax, bx = _prod(ctx, a, x), _prod(ctx, b, x)
    bqnx = _prod(ctx, bx, ctx.qpow(n))
    total = WeightedSum(ctx)
    for i in range(n + 1):
        den = qpoch(ax, ctx, i) * qpoch(bqnx, ctx, i)
        _nz(den, f"(ax;q)_{i} (bq^nx;q)_{i}")
        w = (qpower(i) * qbinom(n, i, ctx) * qpoch(bx, ctx, i)
             * ctx.num(_prod(ctx, -1, a, op.y)) ** i / den)
        arg = _prod(ctx, -1, b, op.y, _pow(ctx, op.u, i))
        res = phi11(ctx.qpow(n), _prod(ctx, bx, ctx.qpow(n + i)), arg, op.u, ctx)
        total.add(w, res)
    return total


def _uq_weight(op: OperatorSpec, ctx: QContext):
    return lambda i: ctx.num(_prod(ctx, op.u, ctx.q)) ** binom2(i)


def t_poch_ratio(a, b, op: OperatorSpec, ctx: QContext, n: int, x) -> SeriesResult:
    """T(yD_q|u) {(ax;q)_n/(bx;q)_n} as a finite sum of 1_Phi_1 values."""
    ax, bx = _prod(ctx, a, x), _prod(ctx, b, x)
    scale = qpoch(ax, ctx, n) / _nz(qpoch(bx, ctx, n), f"(bx;q)_{n}")
    return _poch_ratio_sum(a, b, op, ctx, n, x, _uq_weight(op, ctx)).result(scale)


def t_poch_ratio_variant(a, b, op: OperatorSpec, ctx: QContext, n: int, x, weight: str) -> SeriesResult:
    """The ratio theorem with an alternative i-weight.

    ``weight`` is "uq" for (uq)^C(i,2), "q" for q^C(i,2) alone, or "u" for
    u^C(i,2) alone.
    """
    weights = {
        "uq": _uq_weight(op, ctx),
        "q": lambda i: ctx.num(ctx.qpow(binom2(i))),
        "u": lambda i: ctx.num(op.u) ** binom2(i),
    }
    ax, bx = _prod(ctx, a, x), _prod(ctx, b, x)
    scale = qpoch(ax, ctx, n) / _nz(qpoch(bx, ctx, n), f"(bx;q)_{n}")
    return _poch_ratio_sum(a, b, op, ctx, n, x, weights[weight]).result(scale)


def poch_ratio_corollary_sum(a, op: OperatorSpec, ctx: QContext, n: int, x) -> SeriesResult:
    """The a = b case of the ratio theorem; its value is 1."""
    return _poch_ratio_sum(a, a, op, ctx, n, x, _uq_weight(op, ctx)).result()


def t_xn_over_poch(a, op: OperatorSpec, ctx: QContext, n: int, x) -> SeriesResult:
    """T(yD_q|u) {x^n/(ax;q)_n} as a finite sum of 1_Phi_1 values."""
    ax = _prod(ctx, a, x)
    aqnx = _prod(ctx, ax, ctx.qpow(n))
    d0 = _nz(qpoch(ax, ctx, n), f"(ax;q)_{n}")
    u = ctx.num(op.u)
    total = WeightedSum(ctx)
    for i in range(n + 1):
        den = _nz(qpoch(aqnx, ctx, i), f"(aq^nx;q)_{i}")
        w = (qbinom(n, i, ctx) * u ** binom2(i) * qpoch(ax, ctx, i) / den
             * ctx.num(x) ** (n - i) * ctx.num(op.y) ** i)
        arg = _prod(ctx, -1, a, op.y, _pow(ctx, op.u, i))
        res = phi11(ctx.qpow(n), _prod(ctx, ax, ctx.qpow(n + i)), arg, op.u, ctx)
        total.add(w, res)
    return total.result(1 / d0)


def t_of_1phi1(a, opz: OperatorSpec, ctx: QContext, u, y, n: int, x) -> SeriesResult:
    """T(zD_q|v) applied to the closed form of T(yD_q|u) {1/(ax;q)_n}.

    ``opz`` carries z and v.  The result is a k-sum whose terms carry
    u^C(k,2) (q^n;q)_k (ay)^k / ((q;q)_k (a q^n x;q)_k) times a 1_Phi_1 in
    (v, -az); it is summed until the usual stopping rule fires.
    """
    ax = _prod(ctx, a, x)
    d0 = _nz(qpoch(ax, ctx, n), f"(ax;q)_{n}")
    aqnx = _prod(ctx, ax, ctx.qpow(n))
    arg = _prod(ctx, -1, a, opz.y)
    ay = ctx.num(_prod(ctx, a, y))
    uu = ctx.num(u)

    if n == 0 or y == 0:
        # only k = 0 survives
        res = phi11(ctx.qpow(n), aqnx, arg, opz.u, ctx)
        total = WeightedSum(ctx)
        total.add(1, res)
        return total.result(1 / ctx.num(d0))

    if ctx.exact:
        raise ExactModeUnsupported("the outer k-sum is infinite")

    def terms():
        w = ctx.one
        k = 0
        while True:
            res = phi11(ctx.qpow(n + k), _prod(ctx, aqnx, ctx.qpow(k)), arg, opz.u, ctx)
            v, e = ctx.num(res.value), ctx.num(res.error)
            yield w * v, abs(w) * e + 4 * ctx.eps * abs(w * v), None
            den = _nz((1 - ctx.num(ctx.qpow(k + 1))) * (1 - ctx.num(_prod(ctx, aqnx, ctx.qpow(k)))),
                      "outer k-sum denominator")
            w = w * uu ** k * (1 - ctx.num(ctx.qpow(n + k))) * ay / den
            k += 1

    res = accumulate(terms(), ctx, opz.trunc)
    return res.scaled(1 / ctx.num(d0))


def t_of_rphis(spec: SeriesSpec, op: OperatorSpec, ctx: QContext, x) -> SeriesResult:
    """T(yD_q|v) on x -> r_Phi_s with first lower parameter b_1 x.

    ``spec.lower[0]`` is b_1, ``ctx.u`` is the deformation of the series and
    ``op.u`` is v.  Each series term gains a factor
    1_Phi_1(q^n; q^n b_1 x; q, v/q, -b_1 y).
    """
    if spec.s == 0:
        raise PoleAtEvaluationPoint("b1", "the series needs a lower parameter")
    b1 = spec.lower[0]
    b1x = _prod(ctx, b1, x)
    inner = SeriesSpec(spec.upper, (b1x,) + spec.lower[1:], spec.z)
    arg = _prod(ctx, -1, b1, op.y)
    last = terminating_index(inner, ctx)
    check_poles(inner, ctx, last)
    if ctx.exact and last is None and spec.z != 0:
        raise ExactModeUnsupported("a non-terminating series has no exact value")
    if last is None and spec.z != 0:
        check_convergence(inner, ctx, ctx.u)

    def terms():
        n = 0
        while True:
            t = direct_term(inner, ctx, n)
            res = phi11(ctx.qpow(n), _prod(ctx, b1x, ctx.qpow(n)), arg, op.u, ctx)
            v, e = ctx.num(res.value), ctx.num(res.error)
            yield t * v, abs(t) * e + 8 * ctx.eps * abs(t * v) * (n + 1), None
            if spec.z == 0 or (last is not None and n >= last):
                return
            n += 1

    finite = spec.z == 0 or last is not None
    return accumulate(terms(), ctx, op.trunc, finite=finite)
