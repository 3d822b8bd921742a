"""q-shifted factorials and q-binomial coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ExactModeUnsupported, MaxTermsExceeded, PoleAtEvaluationPoint
from .scalar import QContext, Scalar, is_exact

INF = math.inf


@dataclass(frozen=True)
class PochResult:
    value: Scalar
    tail_bound: Scalar | None
    factors_used: int


def zero_index(a, ctx: QContext) -> int | None:
    """Return ``m >= 0`` with ``a == q**-m`` exactly, or None.

    This is the index of the first vanishing factor of ``(a;q)_n``.  Only
    rational ``a`` and ``q`` can be decided; for floating inputs the answer is
    None and exact zeros are left to the arithmetic itself.
    """
    if not (is_exact(a) and is_exact(ctx.q)) or a == 0:
        return None
    a = Fraction(a)
    q = ctx.q
    m = 0
    t = a
    # |a q^m| decreases strictly, so the search ends once it drops below 1.
    while abs(t) >= 1:
        if t == 1:
            return m
        t *= q
        m += 1
    return None


def qpoch(a, ctx: QContext, n: int) -> Scalar:
    """(a;q)_n = prod_{k<n} (1 - a q^k)."""
    if n < 0:
        raise ValueError("qpoch needs n >= 0")
    m = zero_index(a, ctx)
    if m is not None and m < n:
        return ctx.zero
    a = ctx.num(a)
    q = ctx.qn
    result = ctx.one
    t = a
    for _ in range(n):
        result *= 1 - t
        t *= q
    return result


def qpoch_inf(a, ctx: QContext) -> PochResult:
    """Truncated (a;q)_inf with a multiplicative tail bound.

    Stops at the smallest N with ``|a| |q|^N / (1-|q|) < log(1 + rel_tol)``;
    the neglected factors then change the value by a factor within
    ``exp(|a| |q|^N / (1-|q|))`` of one.
    """
    if ctx.exact:
        raise ExactModeUnsupported("(a;q)_inf is not rational in general")
    if zero_index(a, ctx) is not None:
        return PochResult(ctx.zero, ctx.zero, zero_index(a, ctx) + 1)
    av = ctx.num(a)
    if av == 0:
        return PochResult(ctx.one, ctx.zero, 0)
    mp = ctx.mp
    absq = abs(ctx.qn)
    target = mp.log1p(ctx.rel_tol)
    tail = abs(av) / (1 - absq)
    n = 0
    while tail >= target:
        tail *= absq
        n += 1
        if n > ctx.truncation.max_terms:
            raise MaxTermsExceeded(
                f"(a;q)_inf needs more than {ctx.truncation.max_terms} factors")
    value = qpoch(a, ctx, n)
    bound = abs(value) * mp.expm1(tail)
    return PochResult(value, bound, n)


def qpoch_multi(params: Sequence, ctx: QContext, n) -> Scalar:
    """(a_1,...,a_m;q)_n; ``n`` may be ``math.inf``."""
    if n == INF:
        return qpoch_multi_inf(params, ctx).value
    result = ctx.one
    for a in params:
        result *= qpoch(a, ctx, n)
    return result


def qpoch_multi_inf(params: Sequence, ctx: QContext) -> PochResult:
    """Product of truncated infinite symbols with a combined tail bound."""
    if ctx.exact:
        raise ExactModeUnsupported("(a;q)_inf is not rational in general")
    value = ctx.one
    rel = ctx.zero
    used = 0
    for a in params:
        r = qpoch_inf(a, ctx)
        value *= r.value
        used += r.factors_used
        if r.value != 0:
            rel = (1 + rel) * (1 + r.tail_bound / abs(r.value)) - 1
    return PochResult(value, abs(value) * rel, used)


def _q_shift(src, dst, ctx: QContext) -> int | None:
    """m >= 0 with ``dst == src * q**m`` exactly, else None."""
    if not (is_exact(src) and is_exact(dst) and is_exact(ctx.q)) or src == 0:
        return None
    ratio = Fraction(dst) / Fraction(src)
    if ratio == 0:
        return None
    m = zero_index(1 / ratio, ctx)
    return m


def qpoch_inf_quotient(nums: Iterable, dens: Iterable, ctx: QContext) -> PochResult:
    """(n_1,...;q)_inf / (d_1,...;q)_inf, reducing q-shifted pairs exactly.

    A numerator ``a`` and denominator ``a q^m`` cancel to ``(a;q)_m``; the
    reverse pairing gives ``1/(d;q)_m``.  Whatever does not pair up needs
    float mode.
    """
    nums = list(nums)
    dens = list(dens)
    exact_part = ctx.one
    rest_n, rest_d = [], []
    for a in nums:
        for i, d in enumerate(dens):
            m = _q_shift(a, d, ctx)
            if m is not None:
                exact_part *= qpoch(a, ctx, m)
                dens.pop(i)
                break
            m = _q_shift(d, a, ctx)
            if m is not None:
                den = qpoch(d, ctx, m)
                if den == 0:
                    raise PoleAtEvaluationPoint(f"({d};q)_inf")
                exact_part /= den
                dens.pop(i)
                break
        else:
            rest_n.append(a)
    rest_d = dens
    if not rest_n and not rest_d:
        return PochResult(exact_part, ctx.zero, 0)
    if ctx.exact:
        raise ExactModeUnsupported("infinite products do not reduce to rationals here")
    top = qpoch_multi_inf(rest_n, ctx)
    bot = qpoch_multi_inf(rest_d, ctx)
    if bot.value == 0:
        raise PoleAtEvaluationPoint("denominator infinite product")
    value = exact_part * top.value / bot.value
    rel_top = top.tail_bound / abs(top.value) if top.value != 0 else ctx.zero
    rel_bot = bot.tail_bound / abs(bot.value)
    if rel_bot >= 1:
        raise MaxTermsExceeded("denominator product bound too loose")
    rel = (1 + rel_top) / (1 - rel_bot) - 1
    return PochResult(value, abs(value) * rel, top.factors_used + bot.factors_used)


def qfact(n: int, ctx: QContext) -> Scalar:
    """(q;q)_n."""
    return qpoch(ctx.q, ctx, n)


def inv_qfact(n: int, ctx: QContext) -> Scalar:
    """1/(q;q)_n, taken as zero for negative n."""
    if n < 0:
        return ctx.zero
    return 1 / qfact(n, ctx)


def qbinom(n: int, k: int, ctx: QContext) -> Scalar:
    """Gaussian binomial [n, k]_q; zero outside 0 <= k <= n."""
    if k < 0 or k > n:
        return ctx.zero
    k = min(k, n - k)
    num = ctx.one
    den = ctx.one
    for j in range(1, k + 1):
        num *= 1 - ctx.num(ctx.qpow(n - k + j))
        den *= 1 - ctx.num(ctx.qpow(j))
    return num / den


def binom2(n: int) -> int:
    """C(n, 2) = n(n-1)/2 for any integer n."""
    return n * (n - 1) // 2
