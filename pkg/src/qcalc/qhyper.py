"""Basic hypergeometric series r_phi_s and the u-deformed r_Phi_s.

The n-th term of the deformed series is

    u^C(n,2) (a_1,...,a_r;q)_n / ((b_1,...,b_s;q)_n (q;q)_n)
        * ((-1)^n q^C(n,2))^(1+s-r) z^n

and ``u = 1`` gives the ordinary series.  Terms come from the ratio
recurrence, re-derived from the definition every 16 terms in float mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List

from .errors import (Divergent, DomainError, ExactModeUnsupported, LowerParameterPole,
                     PoleAtEvaluationPoint)
from .qcore import binom2, qfact, qpoch, zero_index
from .scalar import QContext, Scalar, is_exact
from .series import SeriesResult, Termination, accumulate

RECOMPUTE_EVERY = 16


@dataclass(frozen=True)
class SeriesSpec:
    """Upper parameters, lower parameters and argument of a series."""

    upper: tuple = ()
    lower: tuple = ()
    z: Scalar = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(self.upper))
        object.__setattr__(self, "lower", tuple(self.lower))

    @property
    def r(self) -> int:
        return len(self.upper)

    @property
    def s(self) -> int:
        return len(self.lower)

    @property
    def excess(self) -> int:
        """The exponent 1+s-r of (-1)^n q^C(n,2)."""
        return 1 + self.s - self.r

    def with_lower(self, index: int, value) -> "SeriesSpec":
        lower = list(self.lower)
        lower[index] = value
        return SeriesSpec(self.upper, tuple(lower), self.z)


def _mul(a, b):
    return Fraction(a) * Fraction(b) if is_exact(a) and is_exact(b) else a * b


def terminating_index(spec: SeriesSpec, ctx: QContext) -> int | None:
    """Smallest m with some upper parameter equal to q^-m, else None."""
    found = [m for m in (zero_index(a, ctx) for a in spec.upper) if m is not None]
    return min(found) if found else None


def check_poles(spec: SeriesSpec, ctx: QContext, last: int | None) -> None:
    # (b;q)_n vanishes for n > m when b = q^-m; terms up to index `last` need n <= last
    for j, b in enumerate(spec.lower):
        m = zero_index(b, ctx)
        if m is not None and (last is None or m < last):
            raise LowerParameterPole(f"lower parameter b{j + 1} = {b} = q^-{m}")


def check_convergence(spec: SeriesSpec, ctx: QContext, u) -> None:
    base = abs(ctx.num(u)) * abs(ctx.qn) ** spec.excess
    az = abs(ctx.num(spec.z))
    if base > 1:
        raise Divergent(f"|u q^(1+s-r)| = {base} > 1 for a non-terminating series")
    if base == 1 and az >= 1:
        raise Divergent(f"|z| = {az} >= 1 with |u q^(1+s-r)| = 1")


def direct_term(spec: SeriesSpec, ctx: QContext, n: int, u=None) -> Scalar:
    """The n-th term straight from the definition."""
    u = ctx.u if u is None else u
    e = spec.excess
    num = ctx.one
    for a in spec.upper:
        num *= qpoch(a, ctx, n)
    if num == 0:
        return ctx.zero
    den = qfact(n, ctx)
    for b in spec.lower:
        den *= qpoch(b, ctx, n)
    if den == 0:
        raise LowerParameterPole(f"lower parameter factor vanishes at index {n}")
    sign = -1 if (n * e) % 2 else 1
    uc = ctx.num(u) ** binom2(n) if binom2(n) else ctx.one
    qc = ctx.num(ctx.qpow(binom2(n) * e))
    return sign * uc * qc * ctx.num(spec.z) ** n * num / den


def _ratio_bound(spec: SeriesSpec, ctx: QContext, n: int, base, az):
    """Bound on |t_{m+1}/t_m| valid for every m >= n, or None."""
    aq = abs(ctx.qn) ** n
    top = ctx.one
    for a in spec.upper:
        top *= 1 + abs(ctx.num(a)) * aq
    bot = 1 - abs(ctx.qn) * aq
    for b in spec.lower:
        f = 1 - abs(ctx.num(b)) * aq
        if f <= 0:
            return None
        bot *= f
    return top / bot * base ** n * az


def _terms(spec: SeriesSpec, ctx: QContext, u, last: int | None) -> Iterator:
    """Yield ``(term, error, ratio_bound)`` for the series."""
    e = spec.excess
    q = ctx.qn
    uz = ctx.num(u)
    z = ctx.num(spec.z)
    ups = [ctx.num(a) for a in spec.upper]
    lows = [ctx.num(b) for b in spec.lower]
    sign = -1 if e % 2 else 1
    eps = ctx.eps
    weight = 2 * (len(ups) + len(lows)) + 8
    base = abs(uz) * abs(q) ** e
    az = abs(z)
    t = ctx.one
    qn = ctx.one  # q^n
    n = 0
    since = 0
    while True:
        bound = None if ctx.exact or last is not None else _ratio_bound(spec, ctx, n, base, az)
        yield t, abs(t) * eps * weight * (since + 1), bound
        if last is not None and n >= last:
            return
        num = ctx.one
        for a in ups:
            num *= 1 - a * qn
        den = 1 - qn * q
        for b in lows:
            den *= 1 - b * qn
        if den == 0:
            raise LowerParameterPole(f"lower parameter factor vanishes at index {n}")
        step = num / den * uz ** n * z
        if e:
            step *= sign * qn ** e
        t = t * step
        n += 1
        qn = ctx.num(ctx.qpow(n)) if ctx.exact else qn * q
        since += 1
        if not ctx.exact and since >= RECOMPUTE_EVERY:
            t = direct_term(spec, ctx, n, u)
            since = 0


def _sum(spec: SeriesSpec, ctx: QContext, u) -> SeriesResult:
    last = terminating_index(spec, ctx)
    check_poles(spec, ctx, last)
    if spec.z == 0:
        return SeriesResult(ctx.one, 1, Termination.EXACT_TERMINATING, ctx.zero, ctx.zero)
    if last is None:
        if ctx.exact:
            raise ExactModeUnsupported(
                "a non-terminating series has no exact value; use float mode or partial_sums")
        check_convergence(spec, ctx, u)
    try:
        return accumulate(_terms(spec, ctx, u, last), ctx, finite=last is not None)
    except ZeroDivisionError as exc:
        raise LowerParameterPole(str(exc)) from exc


def phi(spec: SeriesSpec, ctx: QContext) -> SeriesResult:
    """Ordinary r_phi_s (``ctx.u`` is ignored)."""
    return _sum(spec, ctx, Fraction(1))


def dphi(spec: SeriesSpec, ctx: QContext) -> SeriesResult:
    """Deformed r_Phi_s with deformation ``ctx.u``."""
    return _sum(spec, ctx, ctx.u)


def partial_sums(spec: SeriesSpec, ctx: QContext, count: int, deformed: bool = True) -> List[Scalar]:
    """The first ``count`` partial sums, in any mode, with no stopping rule."""
    last = terminating_index(spec, ctx)
    check_poles(spec, ctx, None if last is None else max(last, count - 1))
    u = ctx.u if deformed else Fraction(1)
    out = []
    total = ctx.zero
    gen = _terms(spec, ctx, u, None)
    for _ in range(count):
        t = next(gen)[0]
        total += t
        out.append(total)
    return out


# -- derivative with respect to the first lower parameter -------------------

def _lower_derivative(spec: SeriesSpec, ctx: QContext, k: int, shift_rest: bool) -> SeriesResult:
    if spec.s == 0:
        raise DomainError("the series has no lower parameter to differentiate in")
    if k < 1:
        raise DomainError("derivative order k must be positive")
    e = spec.excess
    c1, rest = spec.lower[0], spec.lower[1:]
    q = ctx.q
    if spec.z == 0:
        return SeriesResult(ctx.zero, 1, Termination.EXACT_TERMINATING, ctx.zero, ctx.zero)
    den = qpoch(c1, ctx, k + 1) * (1 - ctx.num(q))
    for c in rest:
        den *= 1 - ctx.num(c)
    if den == 0:
        raise PoleAtEvaluationPoint("(c1;q)_{k+1} prod(1-c_j)", "prefactor denominator")
    pref = ctx.num(-1 if e % 2 else 1) * qfact(k, ctx) * ctx.num(spec.z)
    for a in spec.upper:
        pref *= 1 - ctx.num(a)
    pref /= den
    if pref == 0:
        return SeriesResult(ctx.zero, 1, Termination.EXACT_TERMINATING, ctx.zero, ctx.zero)
    upper = tuple(_mul(a, q) for a in spec.upper) + (ctx.qpow(k + 1),)
    lower = ((_mul(c1, ctx.qpow(k + 1)),)
             + tuple(_mul(c, q) if shift_rest else c for c in rest)
             + (ctx.qpow(2),))
    z = _mul(_mul(ctx.qpow(e), ctx.u), spec.z)
    return dphi(SeriesSpec(upper, lower, z), ctx).scaled(pref)


def dq_param_lower(spec: SeriesSpec, ctx: QContext, k: int) -> SeriesResult:
    """D_q^k of r_Phi_s with respect to its first lower parameter.

    The result is a multiple of an (r+1)_Phi_(s+1) whose remaining lower
    parameters c_2..c_s are shifted to c_j q.
    """
    return _lower_derivative(spec, ctx, k, shift_rest=True)


def dq_param_lower_unshifted(spec: SeriesSpec, ctx: QContext, k: int) -> SeriesResult:
    """Variant that keeps c_2..c_s unshifted; agrees with the shifted form only for s = 1."""
    return _lower_derivative(spec, ctx, k, shift_rest=False)
