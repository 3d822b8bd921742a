"""Two-route identity checking.

An identity is a pair of side functions ``side(params, ctx)`` that compute
the same quantity by independent code paths.  :func:`check_identity` runs
both over a parameter grid, skips exact poles, and classifies the residuals:
exact mode demands literal zero, float mode compares against the combined
error budget of both routes.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence

from .errors import DomainError, EmptyGridAfterPoleFilter, PoleAtEvaluationPoint, QCalcError
from .qcore import binom2, inv_qfact, qbinom, qfact, qpoch, qpoch_inf_quotient
from .qdiff import (FunctionHandle, cf_double_ratio, cf_double_ratio_inf_estimate, dq_iter_estimate,
                    poch_ratio_any_order)
from .qhyper import SeriesSpec, dphi, dq_param_lower, dq_param_lower_unshifted, phi
from .qoper import OperatorSpec, WeightedSum, phi11, t_apply, t_poch_ratio, t_poch_ratio_variant
from .scalar import Mode, QContext, Scalar, is_exact
from .series import accumulate, estimate

# float residual <= VERIFY_FACTOR * budget is Verified, > VIOLATE_FACTOR * budget is Violated
VERIFY_FACTOR = 100
VIOLATE_FACTOR = 100 * VERIFY_FACTOR

Side = Callable[[dict, QContext], object]


class Status(str, Enum):
    VERIFIED = "Verified"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class IdentityCase:
    """One grid point.  ``error`` is set (and the sides are None) when a
    route raised something other than a pole."""

    identity_id: str
    params: dict
    lhs: Optional[Scalar]
    rhs: Optional[Scalar]
    residual: Optional[Scalar]
    mode: Mode
    tail_budget: Optional[Scalar] = None
    error: Optional[str] = None

    @property
    def status(self) -> Status:
        if self.error is not None:
            return Status.INCONCLUSIVE
        if self.mode is Mode.EXACT:
            return Status.VERIFIED if self.residual == 0 else Status.VIOLATED
        if self.residual <= VERIFY_FACTOR * self.tail_budget:
            return Status.VERIFIED
        if self.residual > VIOLATE_FACTOR * self.tail_budget:
            return Status.VIOLATED
        return Status.INCONCLUSIVE


@dataclass(frozen=True)
class IdentityReport:
    identity_id: str
    cases: List[IdentityCase]
    max_residual: Scalar
    status: Status
    skipped_poles: int
    mode: Mode
    precision_bits: Optional[int]

    @property
    def failures(self) -> List[IdentityCase]:
        return [c for c in self.cases if c.error is not None]


def aggregate_status(statuses: Sequence[Status]) -> Status:
    if any(s is Status.VIOLATED for s in statuses):
        return Status.VIOLATED
    if all(s is Status.VERIFIED for s in statuses):
        return Status.VERIFIED
    return Status.INCONCLUSIVE


# -- arithmetic helpers that stay exact on rational input ------------------

def _m(ctx: QContext, *xs):
    if all(is_exact(x) for x in xs):
        out = Fraction(1)
        for x in xs:
            out *= x
        return out
    out = ctx.one
    for x in xs:
        out *= ctx.num(x)
    return out


def _d(ctx: QContext, a, b):
    if b == 0:
        raise PoleAtEvaluationPoint(str(b), "zero divisor in a parameter expression")
    if is_exact(a) and is_exact(b):
        return Fraction(a) / Fraction(b)
    return ctx.num(a) / ctx.num(b)


def _nz(value, label):
    if value == 0:
        raise PoleAtEvaluationPoint(label)
    return value


def _product(ctx: QContext, *parts):
    """Multiply ``(value, error)`` pairs, propagating first-order errors."""
    value, err = ctx.one, ctx.zero
    for part in parts:
        v, e = estimate(part, ctx)
        err = abs(value) * e + abs(v) * err + err * e
        value = value * v
    return value, err


# -- classical identities ---------------------------------------------------

def gauss_lhs(p, ctx):
    a, b, c = p["a"], p["b"], p["c"]
    return phi(SeriesSpec((a, b), (c,), _d(ctx, c, _m(ctx, a, b))), ctx)


def gauss_rhs(p, ctx):
    a, b, c = p["a"], p["b"], p["c"]
    return qpoch_inf_quotient([_d(ctx, c, a), _d(ctx, c, b)], [c, _d(ctx, c, _m(ctx, a, b))], ctx)


def chu_lhs(p, ctx):
    n, a, c = p["n"], p["a"], p["c"]
    return phi(SeriesSpec((ctx.qpow(-n), a), (c,), ctx.q), ctx)


def chu_rhs(p, ctx):
    n, a, c = p["n"], p["a"], p["c"]
    den = _nz(qpoch(c, ctx, n), f"(c;q)_{n}")
    return qpoch(_d(ctx, c, a), ctx, n) / den * ctx.num(a) ** n


def jackson_lhs(p, ctx):
    a, b, c, z = p["a"], p["b"], p["c"], p["z"]
    return phi(SeriesSpec((a, b), (c,), z), ctx)


def jackson_rhs(p, ctx):
    a, b, c, z = p["a"], p["b"], p["c"], p["z"]
    az = _m(ctx, a, z)
    ratio = qpoch_inf_quotient([az], [z], ctx)
    series = phi(SeriesSpec((a, _d(ctx, c, b)), (c, az), _m(ctx, b, z)), ctx)
    return _product(ctx, ratio, series)


# -- identities obtained by differentiating in c ----------------------------

def _chu_deriv_series(p, ctx, a):
    n, k, c = p["n"], p["k"], p["c"]
    spec = SeriesSpec((ctx.qpow(1 - n), _m(ctx, a, ctx.q), ctx.qpow(k + 1)),
                      (_m(ctx, c, ctx.qpow(k + 1)), ctx.qpow(2)), ctx.q)
    return phi(spec, ctx)


def chu_deriv_lhs(p, ctx):
    """(1-q^-n)(1-a) 3_phi_2(q^(1-n), aq, q^(k+1); cq^(k+1), q^2; q, q)."""
    a = p["a"]
    factor = (1 - ctx.num(ctx.qpow(-p["n"]))) * (1 - ctx.num(a))
    return _chu_deriv_series(p, ctx, a).scaled(factor)


def chu_deriv_lhs_unweighted(p, ctx):
    return _chu_deriv_series(p, ctx, p["a"])


def chu_deriv_rhs(p, ctx):
    n, k, a, c = p["n"], p["k"], p["a"], p["c"]
    q = ctx.q
    ca = _d(ctx, c, a)
    qn = ctx.qpow(n)
    av = ctx.num(a)
    total = ctx.zero
    for i in range(k + 1):
        den = _nz(qpoch(ca, ctx, i), f"(c/a;q)_{i}")
        total += (qbinom(k, i, ctx) * ctx.num(ctx.qpow(binom2(i))) * (-1 / av) ** i
                  * qpoch(c, ctx, i) * qpoch(qn, ctx, k - i) * inv_qfact(n - i, ctx) / den)
    den = _nz(ctx.num(q) * qfact(k, ctx) * qpoch(c, ctx, n) * qpoch(_m(ctx, qn, c), ctx, k),
              "q (q;q)_k (c;q)_n (q^n c;q)_k")
    lead = (av ** n * (1 - ctx.num(q)) * qfact(n, ctx) * qpoch(c, ctx, k + 1)
            * qpoch(ca, ctx, n))
    return lead / den * total


def chu_deriv_a1_lhs(p, ctx):
    """The a = 1 specialisation of the unweighted 3_phi_2."""
    return _chu_deriv_series(p, ctx, Fraction(1))


def zero_side(p, ctx):
    return ctx.zero


def chu_t_lhs(p, ctx):
    n, a, c, y, u = p["n"], p["a"], p["c"], p["y"], p["u"]
    total = WeightedSum(ctx)
    qmn = ctx.qpow(-n)
    for k in range(n + 1):
        den = _nz(qpoch(c, ctx, k), f"(c;q)_{k}") * qfact(k, ctx)
        w = qpoch(qmn, ctx, k) * qpoch(a, ctx, k) / den * ctx.num(ctx.qpow(k))
        res = phi11(ctx.qpow(k), _m(ctx, ctx.qpow(k), c), _m(ctx, -1, y), u, ctx)
        total.add(w, res)
    return total.result()


def chu_t_rhs_unscaled(p, ctx):
    n, a, c, y, u = p["n"], p["a"], p["c"], p["y"], p["u"]
    return t_poch_ratio(_d(ctx, 1, a), Fraction(1), OperatorSpec(y, u), ctx, n, c)


def chu_t_rhs(p, ctx):
    return chu_t_rhs_unscaled(p, ctx).scaled(ctx.num(p["a"]) ** p["n"])


def _gauss_handle(a, b):
    def evaluate(c, ctx):
        return phi(SeriesSpec((a, b), (c,), _d(ctx, c, _m(ctx, a, b))), ctx)
    return FunctionHandle(evaluate, "c -> 2phi1(a,b;c;q,c/ab)")


def gauss_deriv_lhs(p, ctx):
    k, a, b, c = p["k"], p["a"], p["b"], p["c"]
    return dq_iter_estimate(_gauss_handle(a, b), ctx, k, c)


def gauss_deriv_rhs(p, ctx):
    k, a, b, c = p["k"], p["a"], p["b"], p["c"]
    return cf_double_ratio_inf_estimate(_d(ctx, 1, a), _d(ctx, 1, b), Fraction(1),
                                        _d(ctx, 1, _m(ctx, a, b)), ctx, k, c)


def _gauss_deriv_closed(p, ctx, rederived: bool):
    k, a, b, c = p["k"], p["a"], p["b"], p["c"]
    q = ctx.q
    arg = _d(ctx, c, _m(ctx, a, b))
    inv_ab = 1 / ctx.num(_m(ctx, a, b))
    ckq = _m(ctx, c, ctx.qpow(k))
    total = WeightedSum(ctx)
    for i in range(k + 1):
        base = (qbinom(k, i, ctx) * qpoch(c, ctx, i) * qpoch(a, ctx, i) * qpoch(b, ctx, i)
                / _nz(qpoch(ckq, ctx, i), f"(cq^k;q)_{i}") * inv_ab ** i)
        qi = ctx.qpow(i)
        if not rederived:
            w = (base * (1 - ctx.num(_m(ctx, a, qi))) * (1 - ctx.num(_m(ctx, b, qi)))
                 / _nz((1 - ctx.num(_m(ctx, c, ctx.qpow(k + 1)))) * qfact(i, ctx), "1-cq^(k+1)"))
            spec = SeriesSpec((_m(ctx, a, ctx.qpow(i + 1)), _m(ctx, b, ctx.qpow(i + 1)),
                               ctx.qpow(k + 1), q),
                              (_m(ctx, c, ctx.qpow(k + i + 1)), ctx.qpow(i + 1), ctx.qpow(2)), arg)
        elif i == 0:
            w = (base * (1 - ctx.num(a)) * (1 - ctx.num(b)) * qfact(k, ctx) * ctx.num(arg)
                 / _nz((1 - ctx.num(ckq)) * (1 - ctx.num(q)), "(1-cq^k)(1-q)"))
            spec = SeriesSpec((_m(ctx, a, q), _m(ctx, b, q), ctx.qpow(k + 1)),
                              (_m(ctx, c, ctx.qpow(k + 1)), ctx.qpow(2)), arg)
        else:
            w = base * qpoch(qi, ctx, k - i)
            spec = SeriesSpec((_m(ctx, a, qi), _m(ctx, b, qi), ctx.qpow(k)),
                              (_m(ctx, c, ctx.qpow(k + i)), qi), arg)
        total.add(w, phi(spec, ctx))
    scale = 1 / _nz(qpoch(c, ctx, k), "(c;q)_k")
    if not rederived:
        scale = scale * qfact(k, ctx) / (1 - ctx.num(q))
    return total.result(scale)


def gauss_deriv_index_sum(p, ctx):
    """The closed i-sum with the factor (1/ab)^i."""
    return _gauss_deriv_closed(p, ctx, rederived=False)


def gauss_deriv_rederived(p, ctx):
    """Closed form that keeps the i = 0 term separately (k = 0 is the series itself)."""
    if p["k"] == 0:
        return gauss_lhs(p, ctx)
    return _gauss_deriv_closed(p, ctx, rederived=True)


def _phi22_handle(a, b, z):
    def evaluate(c, ctx):
        az = _m(ctx, a, z)
        return phi(SeriesSpec((a, _d(ctx, c, b)), (c, az), _m(ctx, b, z)), ctx)
    return FunctionHandle(evaluate, "c -> 2phi2(a,c/b;c,az;q,bz)")


def jackson_deriv_lhs(p, ctx):
    k, a, b, c, z = p["k"], p["a"], p["b"], p["c"], p["z"]
    q = ctx.q
    spec = SeriesSpec((_m(ctx, a, q), _m(ctx, b, q), ctx.qpow(k + 1)),
                      (_m(ctx, c, ctx.qpow(k + 1)), ctx.qpow(2)), z)
    return phi(spec, ctx)


def _jackson_deriv_prefactor(p, ctx):
    k, a, b, c, z = p["k"], p["a"], p["b"], p["c"], p["z"]
    den = _nz((1 - ctx.num(a)) * (1 - ctx.num(b)) * qfact(k, ctx) * ctx.num(z),
              "(1-a)(1-b)(q;q)_k z")
    pref = qpoch(c, ctx, k + 1) * (1 - ctx.num(ctx.q)) / den
    ratio = qpoch_inf_quotient([_m(ctx, a, z)], [z], ctx)
    return _product(ctx, (pref, 4 * ctx.eps * abs(pref)), ratio)


def jackson_deriv_rhs(p, ctx):
    """Differentiate the 2_phi_2 side of Jackson's transformation k times in c."""
    k, a, b, c, z = p["k"], p["a"], p["b"], p["c"], p["z"]
    deriv = dq_iter_estimate(_phi22_handle(a, b, z), ctx, k, c)
    return _product(ctx, _jackson_deriv_prefactor(p, ctx), deriv)


def jackson_deriv_4phi4_sum(p, ctx):
    """Prefactor times an i-sum of 4_phi_4 values."""
    k, a, b, c, z = p["k"], p["a"], p["b"], p["c"], p["z"]
    q = ctx.q
    az = _m(ctx, a, z)
    ckq = _m(ctx, c, ctx.qpow(k))
    total = WeightedSum(ctx)
    for i in range(k + 1):
        qi = ctx.qpow(i)
        den = ((1 - ctx.num(_m(ctx, az, qi))) * (1 - ctx.num(_m(ctx, c, ctx.qpow(k + i))))
               * qpoch(az, ctx, i) * qpoch(ckq, ctx, i))
        _nz(den, f"i-sum denominator at i={i}")
        w = (qbinom(k, i, ctx) * ctx.num(ctx.qpow(2 * binom2(i)))
             * (1 - ctx.num(_m(ctx, a, qi))) * (1 - ctx.num(_d(ctx, _m(ctx, c, qi), b)))
             * (1 - ctx.num(ctx.qpow(i + 1))) * qpoch(a, ctx, i) * qpoch(c, ctx, i) / den
             * ctx.num(_m(ctx, q, z)) ** i)
        spec = SeriesSpec((_m(ctx, a, ctx.qpow(i + 1)), _d(ctx, _m(ctx, c, ctx.qpow(i + 1)), b),
                           ctx.qpow(i + 2), ctx.qpow(k + 1)),
                          (_m(ctx, az, ctx.qpow(i + 1)), _m(ctx, c, ctx.qpow(k + i + 1)),
                           ctx.qpow(2), ctx.qpow(i + 1)),
                          _m(ctx, ctx.qpow(i + 1), b, z))
        total.add(w, phi(spec, ctx))
    den = _nz((1 - ctx.num(a)) * (1 - ctx.num(b)), "(1-a)(1-b)")
    pref = -ctx.num(b) * (1 - ctx.num(ckq)) / den
    ratio = qpoch_inf_quotient([az], [z], ctx)
    return _product(ctx, (pref, 4 * ctx.eps * abs(pref)), ratio, total.result())


def jackson_deriv_rederived(p, ctx):
    """Termwise derivative of the 2_phi_2 using the ratio closed form in c."""
    k, a, b, c, z = p["k"], p["a"], p["b"], p["c"], p["z"]
    az = _m(ctx, a, z)
    bz = ctx.num(_m(ctx, b, z))
    inv_b = _d(ctx, 1, b)

    def terms():
        w = ctx.one
        n = 0
        while True:
            d = poch_ratio_any_order(inv_b, Fraction(1), ctx, k, n, c)
            t = w * d
            yield t, 8 * ctx.eps * abs(t) * (k + 2) ** 2, None
            den = _nz((1 - ctx.num(_m(ctx, az, ctx.qpow(n)))) * (1 - ctx.num(ctx.qpow(n + 1))),
                      "(az;q)_n (q;q)_n")
            w = w * -ctx.num(ctx.qpow(n)) * (1 - ctx.num(_m(ctx, a, ctx.qpow(n)))) * bz / den
            n += 1

    return _product(ctx, _jackson_deriv_prefactor(p, ctx), accumulate(terms(), ctx))


# -- operator and lower-parameter probes ------------------------------------

def _poch_ratio_handle(a, b, n):
    def evaluate(x, ctx):
        return qpoch(_m(ctx, a, x), ctx, n) / _nz(qpoch(_m(ctx, b, x), ctx, n), f"(bx;q)_{n}")
    return FunctionHandle(evaluate, "(ax;q)_n/(bx;q)_n")


def t_ratio_oracle(p, ctx):
    op = OperatorSpec(p["y"], p["u"], ctx.truncation)
    return t_apply(op, _poch_ratio_handle(p["a"], p["b"], p["n"]), ctx, p["x"])


def _t_ratio_variant(weight):
    def side(p, ctx):
        op = OperatorSpec(p["y"], p["u"], ctx.truncation)
        return t_poch_ratio_variant(p["a"], p["b"], op, ctx, p["n"], p["x"], weight)
    return side


def _lower_spec(p):
    return SeriesSpec((p["a1"], p["a2"], p["a3"]), (p["c1"], p["c2"]), p["z"])


def lower_derivative_oracle(p, ctx):
    spec = _lower_spec(p)
    handle = FunctionHandle(lambda c, cc: dphi(spec.with_lower(0, c), cc), "c1 -> 3Phi2")
    return dq_iter_estimate(handle, ctx, p["k"], p["c1"])


def _lower_variant(shifted: bool):
    def side(p, ctx):
        fn = dq_param_lower if shifted else dq_param_lower_unshifted
        return fn(_lower_spec(p), ctx, p["k"])
    return side


def _double_ratio_handle(a, b, c, d, n):
    def evaluate(x, ctx):
        top = qpoch(_m(ctx, a, x), ctx, n) * qpoch(_m(ctx, b, x), ctx, n)
        bot = qpoch(_m(ctx, c, x), ctx, n) * qpoch(_m(ctx, d, x), ctx, n)
        return top / _nz(bot, "(cx,dx;q)_n")
    return FunctionHandle(evaluate, "(ax,bx;q)_n/(cx,dx;q)_n")


def double_ratio_oracle(p, ctx):
    h = _double_ratio_handle(p["a"], p["b"], p["c"], p["d"], p["n"])
    return dq_iter_estimate(h, ctx, p["k"], p["x"])


def _double_ratio_variant(divide_by_bx: bool):
    def side(p, ctx):
        return cf_double_ratio(p["a"], p["b"], p["c"], p["d"], ctx, p["k"], p["n"], p["x"],
                               divide_by_bx=divide_by_bx)
    return side


# -- registry ---------------------------------------------------------------

@dataclass(frozen=True)
class Identity:
    """A named identity: ordered parameter names, two sides, an optional
    admissibility filter, a default grid, and alternative right-hand sides
    for probing (each variant is a ``(lhs, rhs)`` pair)."""

    identity_id: str
    params: tuple
    lhs: Side
    rhs: Side
    default_grid: dict
    admissible: Optional[Callable[[dict], bool]] = None
    variants: dict = field(default_factory=dict)
    summary: str = ""


_A = [Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(-3, 2)]
_C = [Fraction(1, 5), Fraction(7, 3), Fraction(-1, 2)]
_Q = [Fraction(1, 2), Fraction(1, 3), Fraction(2, 5)]
F = Fraction

IDENTITIES: Dict[str, Identity] = {}


def _register(ident: Identity) -> None:
    IDENTITIES[ident.identity_id] = ident


_register(Identity(
    "gauss", ("a", "b", "c", "q"), gauss_lhs, gauss_rhs,
    {"a": [F(1, 2), F(2, 3)], "b": [F(1, 3), F(2, 5)], "c": [F(1, 10), F(1, 20)],
     "q": [F(1, 2), F(1, 3)]},
    summary="2phi1(a,b;c;q,c/ab) = (c/a,c/b;q)_inf/(c,c/ab;q)_inf"))
_register(Identity(
    "chu", ("n", "a", "c", "q"), chu_lhs, chu_rhs,
    {"n": list(range(13)), "a": _A, "c": _C, "q": _Q},
    summary="2phi1(q^-n,a;c;q,q) = (c/a;q)_n a^n/(c;q)_n"))
_register(Identity(
    "jackson", ("a", "b", "c", "z", "q"), jackson_lhs, jackson_rhs,
    {"a": [F(1, 2), F(1, 3)], "b": [F(1, 3), F(2, 5)], "c": [F(1, 7), F(1, 5)],
     "z": [F(1, 5), F(1, 4)], "q": [F(1, 2), F(1, 3)]},
    summary="2phi1(a,b;c;q,z) = (az;q)_inf/(z;q)_inf 2phi2(a,c/b;c,az;q,bz)"))
_register(Identity(
    "chu_deriv", ("k", "n", "a", "c", "q"), chu_deriv_lhs, chu_deriv_rhs,
    {"k": list(range(1, 9)), "n": list(range(1, 9)), "a": _A, "c": _C, "q": _Q},
    admissible=lambda p: 1 <= p["k"] <= p["n"],
    variants={"weighted": (chu_deriv_lhs, chu_deriv_rhs),
              "unweighted": (chu_deriv_lhs_unweighted, chu_deriv_rhs)},
    summary="k-th c-derivative of the Chu sum as a 3phi2 identity"))
_register(Identity(
    "chu_deriv_a1", ("k", "n", "c", "q"), chu_deriv_a1_lhs, zero_side,
    {"k": list(range(1, 7)), "n": list(range(1, 7)), "c": _C, "q": _Q},
    admissible=lambda p: 1 <= p["k"] <= p["n"],
    summary="3phi2(q^(1-n),q,q^(k+1);cq^(k+1),q^2;q,q) = 0"))
_register(Identity(
    "chu_T", ("n", "a", "c", "y", "u", "q"), chu_t_lhs, chu_t_rhs,
    {"n": [0, 1, 2], "a": [F(1, 3), F(-1, 2)], "c": [F(1, 5), F(2, 3)],
     "y": [F(1, 4), F(-1, 5)], "u": [F(1), F(1, 2)], "q": [F(1, 2), F(1, 3)]},
    variants={"with_a_power": (chu_t_lhs, chu_t_rhs),
              "without_a_power": (chu_t_lhs, chu_t_rhs_unscaled)},
    summary="T(yD_c|u) applied to both sides of the Chu sum"))
_register(Identity(
    "gauss_deriv", ("k", "a", "b", "c", "q"), gauss_deriv_lhs, gauss_deriv_rhs,
    {"k": [0, 1, 2], "a": [F(1, 2), F(2, 3)], "b": [F(1, 3), F(2, 5)],
     "c": [F(1, 10), F(1, 20)], "q": [F(1, 2), F(1, 3)]},
    variants={"lattice": (gauss_deriv_lhs, gauss_deriv_rhs),
              "index_sum": (gauss_deriv_index_sum, gauss_deriv_rhs),
              "rederived": (gauss_deriv_rederived, gauss_deriv_rhs)},
    summary="k-th c-derivative of both sides of the q-Gauss sum"))
_register(Identity(
    "jackson_deriv", ("k", "a", "b", "c", "z", "q"), jackson_deriv_lhs, jackson_deriv_rhs,
    {"k": [1, 2], "a": [F(1, 2), F(1, 3)], "b": [F(1, 3), F(2, 5)],
     "c": [F(1, 7), F(1, 10)], "z": [F(1, 5), F(1, 4)], "q": [F(1, 2), F(1, 3)]},
    variants={"lattice": (jackson_deriv_lhs, jackson_deriv_rhs),
              "4phi4_sum": (jackson_deriv_lhs, jackson_deriv_4phi4_sum),
              "rederived": (jackson_deriv_lhs, jackson_deriv_rederived)},
    summary="3phi2(aq,bq,q^(k+1);cq^(k+1),q^2;q,z) from c-derivatives of Jackson's transformation"))
_register(Identity(
    "t_poch_ratio", ("n", "a", "b", "x", "y", "u", "q"), t_ratio_oracle, _t_ratio_variant("uq"),
    {"n": [1, 2, 3], "a": [F(1, 2)], "b": [F(1, 5)], "x": [F(1)], "y": [F(1, 4)],
     "u": [F(1, 3), F(1, 2)], "q": [F(1, 2), F(1, 3)]},
    variants={"uq": (t_ratio_oracle, _t_ratio_variant("uq")),
              "q_only": (t_ratio_oracle, _t_ratio_variant("q")),
              "u_only": (t_ratio_oracle, _t_ratio_variant("u"))},
    summary="T(yD_q|u) on (ax;q)_n/(bx;q)_n: operator sum vs closed form"))
_register(Identity(
    "lower_derivative", ("k", "a1", "a2", "a3", "c1", "c2", "z", "q", "u"),
    lower_derivative_oracle, _lower_variant(True),
    {"k": [1, 2], "a1": [F(1, 2)], "a2": [F(1, 3)], "a3": [F(2, 3)], "c1": [F(1, 5)],
     "c2": [F(1, 7), F(2, 5)], "z": [F(1, 4)], "q": [F(1, 2)], "u": [F(1), F(1, 2)]},
    variants={"shifted": (lower_derivative_oracle, _lower_variant(True)),
              "unshifted": (lower_derivative_oracle, _lower_variant(False))},
    summary="D^k in the first lower parameter of 3Phi2"))
_register(Identity(
    "double_ratio", ("k", "n", "a", "b", "c", "d", "x", "q"), double_ratio_oracle,
    _double_ratio_variant(True),
    {"k": [1, 2, 3], "n": [1, 2, 3], "a": [F(1, 2)], "b": [F(1, 3)], "c": [F(1, 5)],
     "d": [F(1, 7)], "x": [F(1), F(1, 2)], "q": [F(1, 2), F(1, 3)]},
    variants={"triple_sum": (double_ratio_oracle, _double_ratio_variant(True)),
              "without_bx": (double_ratio_oracle, _double_ratio_variant(False))},
    summary="D^k of (ax,bx;q)_n/(cx,dx;q)_n: lattice vs triple sum"))


# -- the checker --------------------------------------------------------------

def _case_context(ctx: QContext, params: dict) -> QContext:
    changes = {name: params[name] for name in ("q", "u") if name in params}
    return ctx.replace(**changes) if changes else ctx


def evaluate_case(lhs: Side, rhs: Side, params: dict, ctx: QContext,
                  identity_id: str = "custom", perturb: bool = False) -> IdentityCase:
    """Evaluate both sides at one point.  Poles propagate to the caller."""
    cctx = _case_context(ctx, params)
    mode = cctx.mode
    try:
        lv, le = estimate(lhs(params, cctx), cctx)
        rv, re_ = estimate(rhs(params, cctx), cctx)
    except PoleAtEvaluationPoint:
        raise
    except ZeroDivisionError as exc:
        raise PoleAtEvaluationPoint("division by zero", str(exc)) from exc
    except (QCalcError, ArithmeticError, ValueError) as exc:
        return IdentityCase(identity_id, dict(params), None, None, None, mode,
                            None, f"{type(exc).__name__}: {exc}")
    if perturb:
        factor = 1 + cctx.num(cctx.qpow(10))
        rv, re_ = rv * factor, re_ * abs(factor)
    residual = abs(lv - rv)
    if cctx.exact:
        return IdentityCase(identity_id, dict(params), lv, rv, residual, mode)
    budget = le + re_ + 8 * cctx.eps * max(abs(lv), abs(rv))
    return IdentityCase(identity_id, dict(params), lv, rv, residual, mode, budget)


def grid_points(grid: Mapping[str, Sequence], order: Sequence[str] | None = None) -> List[dict]:
    """Cartesian product of the grid in canonical parameter order."""
    names = list(order) if order is not None else list(grid)
    names = [n for n in names if n in grid] + [n for n in grid if n not in names]
    for n in names:
        if len(grid[n]) == 0:
            raise EmptyGridAfterPoleFilter(f"grid list for {n!r} is empty")
    return [dict(zip(names, values)) for values in itertools.product(*(grid[n] for n in names))]


def check_identity(lhs: Side, rhs: Side, grid: Mapping[str, Sequence], ctx: QContext,
                   identity_id: str = "custom", perturb: bool = False,
                   admissible: Optional[Callable[[dict], bool]] = None,
                   order: Sequence[str] | None = None, threads: int = 1) -> IdentityReport:
    """Run both sides over every grid point and aggregate the residuals."""
    points = [p for p in grid_points(grid, order) if admissible is None or admissible(p)]

    def run(p):
        try:
            return evaluate_case(lhs, rhs, p, ctx, identity_id, perturb)
        except PoleAtEvaluationPoint:
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, points))
    else:
        results = [run(p) for p in points]
    cases = [c for c in results if c is not None]
    skipped = len(results) - len(cases)
    if not cases:
        raise EmptyGridAfterPoleFilter(f"{identity_id}: no grid point survived the pole filter")
    residuals = [c.residual for c in cases if c.residual is not None]
    max_res = max(residuals) if residuals else ctx.zero
    status = aggregate_status([c.status for c in cases])
    return IdentityReport(identity_id, cases, max_res, status, skipped, ctx.mode,
                          None if ctx.exact else ctx.prec)


def verify(identity_id: str, ctx: QContext, grid: Mapping[str, Sequence] | None = None,
           perturb: bool = False, threads: int = 1) -> IdentityReport:
    """Run a registered identity over ``grid`` (or its default grid)."""
    ident = IDENTITIES[identity_id]
    return check_identity(ident.lhs, ident.rhs, grid or ident.default_grid, ctx, identity_id,
                          perturb, ident.admissible, ident.params, threads)


def probe_identity(identity_id: str, ctx: QContext, grid: Mapping[str, Sequence] | None = None,
                   threads: int = 1) -> Dict[str, IdentityReport]:
    """Run every alternative form of an identity and report each separately."""
    ident = IDENTITIES[identity_id]
    variants = ident.variants or {"registered": (ident.lhs, ident.rhs)}
    return {name: check_identity(l, r, grid or ident.default_grid, ctx, f"{identity_id}:{name}",
                                 False, ident.admissible, ident.params, threads)
            for name, (l, r) in variants.items()}


# -- single-point wrappers ----------------------------------------------------

def _single(identity_id: str, params: dict, ctx: QContext) -> IdentityCase:
    ident = IDENTITIES[identity_id]
    return evaluate_case(ident.lhs, ident.rhs, params, ctx, identity_id)


def verify_q_gauss(a, b, c, ctx: QContext) -> IdentityCase:
    return _single("gauss", {"a": a, "b": b, "c": c}, ctx)


def verify_chu(n: int, a, c, ctx: QContext) -> IdentityCase:
    return _single("chu", {"n": n, "a": a, "c": c}, ctx)


def verify_jackson(a, b, c, z, ctx: QContext) -> IdentityCase:
    return _single("jackson", {"a": a, "b": b, "c": c, "z": z}, ctx)


def verify_s5_chu_deriv(k: int, n: int, a, c, ctx: QContext) -> IdentityCase:
    if not 1 <= k <= n:
        raise DomainError("needs 1 <= k <= n")
    return _single("chu_deriv", {"k": k, "n": n, "a": a, "c": c}, ctx)


def verify_s5_chu_T(n: int, a, c, y, u, ctx: QContext) -> IdentityCase:
    return _single("chu_T", {"n": n, "a": a, "c": c, "y": y, "u": u}, ctx)


def verify_s5_gauss_deriv(k: int, a, b, c, ctx: QContext) -> IdentityCase:
    return _single("gauss_deriv", {"k": k, "a": a, "b": b, "c": c}, ctx)


def verify_s5_jackson_deriv(k: int, a, b, z, c, ctx: QContext) -> IdentityCase:
    return _single("jackson_deriv", {"k": k, "a": a, "b": b, "c": c, "z": z}, ctx)
