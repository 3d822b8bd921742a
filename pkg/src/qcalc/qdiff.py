"""Jackson q-derivative on black-box functions and its closed forms.

``dq_iter`` is the reference route: it differences a memoised function on the
geometric lattice ``x, qx, q^2 x, ...`` and never uses a formula.  The
``cf_*`` functions are the closed-form theorems; each one is checked against
``dq_iter`` in the test suite.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Callable

from .errors import DomainError, ExactModeUnsupported, PoleAtEvaluationPoint, ZeroEvaluationPoint
from .qcore import binom2, inv_qfact, qbinom, qfact, qpoch, qpoch_multi_inf
from .scalar import QContext, Scalar, is_exact
from .series import estimate


class FunctionHandle:
    """A deterministic one-variable evaluator with a lattice memo.

    ``evaluator(x, ctx)`` returns a scalar, a ``SeriesResult`` or a
    ``PochResult``; the context tells it which arithmetic and precision to
    use.  Results are cached per ``(x, precision)`` and ``calls`` counts real
    evaluator invocations.
    """

    def __init__(self, evaluator: Callable, name: str | None = None):
        self.evaluator = evaluator
        self.name = name or getattr(evaluator, "__name__", "f")
        self.calls = 0
        self._cache: dict = {}
        self._lock = threading.Lock()

    @classmethod
    def of(cls, fn: Callable, name: str | None = None) -> "FunctionHandle":
        """Wrap a plain ``fn(x)``; its result is converted to the caller's mode."""
        return cls(lambda x, ctx: fn(x), name or getattr(fn, "__name__", "f"))

    def estimate(self, x, ctx: QContext):
        key = (x, None if ctx.exact else ctx.prec)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        raw = self.evaluator(x, ctx)
        est = estimate(raw, ctx)
        with self._lock:
            if key not in self._cache:
                self.calls += 1
                self._cache[key] = est
        return est

    def __call__(self, x, ctx: QContext) -> Scalar:
        return self.estimate(x, ctx)[0]

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()
            self.calls = 0

    def scaled(self, s) -> "FunctionHandle":
        """The handle of ``t -> f(s t)``."""
        return FunctionHandle(lambda t, ctx: self.estimate(_mul(ctx, s, t), ctx),
                              f"{self.name}({s}*x)")

    def __mul__(self, other: "FunctionHandle") -> "FunctionHandle":
        def product(t, ctx):
            (a, ea), (b, eb) = self.estimate(t, ctx), other.estimate(t, ctx)
            return a * b, abs(a) * eb + abs(b) * ea + ea * eb
        return FunctionHandle(product, f"{self.name}*{other.name}")

    def __add__(self, other: "FunctionHandle") -> "FunctionHandle":
        def total(t, ctx):
            (a, ea), (b, eb) = self.estimate(t, ctx), other.estimate(t, ctx)
            return a + b, ea + eb
        return FunctionHandle(total, f"{self.name}+{other.name}")


def _mul(ctx: QContext, *xs):
    """Product that stays exact when every factor is rational."""
    if all(is_exact(x) for x in xs):
        out = Fraction(1)
        for x in xs:
            out *= x
        return out
    out = ctx.one
    for x in xs:
        out *= ctx.num(x)
    return out


def lattice_point(x, j: int, ctx: QContext):
    """``x q^j``, exact when possible."""
    return _mul(ctx, x, ctx.qpow(j)) if is_exact(ctx.q) else _mul(ctx, x, ctx.qn ** j)


def _check_point(x) -> None:
    if x == 0:
        raise ZeroEvaluationPoint("the q-derivative is undefined at x = 0")


def dq_apply(f: FunctionHandle, ctx: QContext, x) -> Scalar:
    """D_q f(x) = (f(x) - f(qx)) / x."""
    _check_point(x)
    return (f(x, ctx) - f(lattice_point(x, 1, ctx), ctx)) / ctx.num(x)


def dq_iter_estimate(f: FunctionHandle, ctx: QContext, k: int, x):
    """D_q^k f(x) with a propagated error bound, as ``(value, error)``.

    Uses k+1 evaluations of ``f`` at ``x q^j`` and the recursion
    ``g_j <- (g_j - g_{j+1}) / (x q^j)``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return f.estimate(x, ctx)
    _check_point(x)
    points = [lattice_point(x, j, ctx) for j in range(k + 1)]
    vals, errs = [], []
    for p in points:
        v, e = f.estimate(p, ctx)
        vals.append(v)
        errs.append(e)
    inv = [1 / ctx.num(p) for p in points]
    eps = ctx.eps
    for m in range(1, k + 1):
        for j in range(k - m + 1):
            vals[j] = (vals[j] - vals[j + 1]) * inv[j]
            errs[j] = (errs[j] + errs[j + 1]) * abs(inv[j]) + 2 * eps * abs(vals[j])
    return vals[0], errs[0]


def dq_iter(f: FunctionHandle, ctx: QContext, k: int, x) -> Scalar:
    """D_q^k f(x) by lattice recursion (exactly k+1 evaluator calls)."""
    return dq_iter_estimate(f, ctx, k, x)[0]


def leibniz_rhs(f: FunctionHandle, g: FunctionHandle, ctx: QContext, n: int, x) -> Scalar:
    """sum_k q^{k(k-n)} [n,k] D^k f(x) D^{n-k} g(q^k x)."""
    if n == 0:
        return f(x, ctx) * g(x, ctx)
    _check_point(x)
    total = ctx.zero
    for k in range(n + 1):
        gk = g.scaled(ctx.qpow(k))
        term = ctx.num(ctx.qpow(k * (k - n))) * qbinom(n, k, ctx)
        total += term * dq_iter(f, ctx, k, x) * dq_iter(gk, ctx, n - k, x)
    return total


# -- closed forms ------------------------------------------------------------

def _nz(value, label: str):
    if value == 0:
        raise PoleAtEvaluationPoint(label)
    return value


def cf_geometric(a, ctx: QContext, n: int, x) -> Scalar:
    """D_q^n [1/(1-ax)] = (q;q)_n a^n / (ax;q)_{n+1}."""
    if n < 1:
        raise DomainError("n must be positive")
    _check_point(x)
    ax = _mul(ctx, a, x)
    den = _nz(qpoch(ax, ctx, n + 1), f"(ax;q)_{n + 1}")
    return qfact(n, ctx) * ctx.num(a) ** n / den


def cf_inv_poch(a, ctx: QContext, m: int, n: int, x) -> Scalar:
    """D_q^m [1/(ax;q)_n] = (q^n;q)_m a^m / (ax;q)_{m+n}."""
    _check_point(x)
    ax = _mul(ctx, a, x)
    den = _nz(qpoch(ax, ctx, m + n), f"(ax;q)_{m + n}")
    return qpoch(ctx.qpow(n), ctx, m) * ctx.num(a) ** m / den


def cf_xn_over_poch(a, ctx: QContext, k: int, n: int, x) -> Scalar:
    """D_q^k [x^n/(ax;q)_n] as a single sum over i <= min(k, n)."""
    _check_point(x)
    ax = _mul(ctx, a, x)
    aqnx = _mul(ctx, ax, ctx.qpow(n))
    d1 = _nz(qpoch(ax, ctx, n), f"(ax;q)_{n}")
    d2 = _nz(qpoch(aqnx, ctx, k), f"(aq^nx;q)_{k}")
    av, xv = ctx.num(a), ctx.num(x)
    qn = ctx.qpow(n)
    total = ctx.zero
    for i in range(min(k, n) + 1):
        total += (qbinom(k, i, ctx) * qpoch(qn, ctx, k - i) * qpoch(ax, ctx, i)
                  * av ** (k - i) * inv_qfact(n - i, ctx) * xv ** (n - i))
    return qfact(n, ctx) / d1 * total / d2


def cf_poch_ratio(a, b, ctx: QContext, k: int, n: int, x) -> Scalar:
    """D_q^k [(ax;q)_n/(bx;q)_n] for k <= n."""
    if k > n:
        raise DomainError("cf_poch_ratio needs k <= n")
    return poch_ratio_any_order(a, b, ctx, k, n, x)


def poch_ratio_any_order(a, b, ctx: QContext, k: int, n: int, x) -> Scalar:
    """The same sum without the k <= n restriction.

    With 1/(q;q)_m = 0 for m < 0 the formula also gives D_q^k for k > n.
    """
    _check_point(x)
    ax = _mul(ctx, a, x)
    bx = _mul(ctx, b, x)
    d1 = _nz(qpoch(bx, ctx, n), f"(bx;q)_{n}")
    d2 = _nz(qpoch(_mul(ctx, bx, ctx.qpow(n)), ctx, k), f"(bq^nx;q)_{k}")
    av, bv = ctx.num(a), ctx.num(b)
    qn = ctx.qpow(n)
    total = ctx.zero
    for i in range(k + 1):
        den = _nz(qpoch(ax, ctx, i), f"(ax;q)_{i}")
        total += (qbinom(k, i, ctx) * ctx.num(ctx.qpow(binom2(i))) * (-av) ** i * bv ** (k - i)
                  * qpoch(bx, ctx, i) * qpoch(qn, ctx, k - i) * inv_qfact(n - i, ctx) / den)
    return qpoch(ax, ctx, n) * qfact(n, ctx) / d1 / d2 * total


def _double_ratio_inner(a, b, c, d, ctx: QContext, k: int, i: int, x, n: int | None):
    """The j- and l-sums of the double-ratio theorem for a fixed i.

    ``n=None`` gives the n -> infinity limit, where every ``(q^n;q)``,
    ``(.. q^n x;q)`` and ``(q;q)_n``-normalised factor tends to 1.
    """
    ax = _mul(ctx, a, x)
    av, bv, cv, dv = (ctx.num(t) for t in (a, b, c, d))
    jsum = ctx.zero
    for j in range(i + 1):
        t = qbinom(i, j, ctx) * ctx.num(ctx.qpow(j * (j - i))) * (-av) ** j * (-bv) ** (i - j)
        t /= _nz(qpoch(ax, ctx, j), f"(ax;q)_{j}")
        if n is not None:
            t *= inv_qfact(n - j, ctx) * inv_qfact(n - i + j, ctx)
            t *= qpoch(_mul(ctx, b, x, ctx.qpow(n)), ctx, j)
        jsum += t
    dqix = _mul(ctx, d, x, ctx.qpow(i))
    lsum = ctx.zero
    for l in range(k - i + 1):
        t = qbinom(k - i, l, ctx) * qpoch(dqix, ctx, l) * cv ** l * dv ** (k - i - l)
        if n is not None:
            qn = ctx.qpow(n)
            t *= qpoch(qn, ctx, l) * qpoch(qn, ctx, k - i - l)
            t /= _nz(qpoch(_mul(ctx, c, x, ctx.qpow(n + i)), ctx, l), f"(cq^(n+i)x;q)_{l}")
        lsum += t
    return jsum, lsum


def cf_double_ratio(a, b, c, d, ctx: QContext, k: int, n: int, x,
                    divide_by_bx: bool = True) -> Scalar:
    """D_q^k [(ax,bx;q)_n / (cx,dx;q)_n] as a triple sum.

    ``divide_by_bx=False`` drops the 1/(bx;q)_i weight, a variant used only
    to show that the checker can tell the two apart.
    """
    _check_point(x)
    bx = _mul(ctx, b, x)
    total = ctx.zero
    for i in range(k + 1):
        jsum, lsum = _double_ratio_inner(a, b, c, d, ctx, k, i, x, n)
        den = (qpoch(_mul(ctx, c, x, ctx.qpow(i)), ctx, n) * qpoch(_mul(ctx, d, x, ctx.qpow(i)), ctx, n)
               * qpoch(_mul(ctx, d, x, ctx.qpow(n + i)), ctx, k - i))
        _nz(den, f"(cq^ix,dq^ix;q)_n (dq^(n+i)x;q)_(k-i) at i={i}")
        bxi = _nz(qpoch(bx, ctx, i), f"(bx;q)_{i}") if divide_by_bx else ctx.one
        total += qbinom(k, i, ctx) * ctx.num(ctx.qpow(binom2(i))) / bxi * jsum * lsum / den
    lead = qfact(n, ctx) ** 2 * qpoch(_mul(ctx, a, x), ctx, n) * qpoch(bx, ctx, n)
    return lead * total


def cf_double_ratio_inf_estimate(a, b, c, d, ctx: QContext, k: int, x):
    """D_q^k [(ax,bx;q)_inf/(cx,dx;q)_inf] with its product tail bound."""
    if ctx.exact:
        raise ExactModeUnsupported("infinite products need float mode")
    _check_point(x)
    ax, bx, cx, dx = (_mul(ctx, t, x) for t in (a, b, c, d))
    top = qpoch_multi_inf([ax, bx], ctx)
    bot = qpoch_multi_inf([cx, dx], ctx)
    _nz(bot.value, "(cx,dx;q)_inf")
    total = ctx.zero
    magnitude = ctx.zero
    for i in range(k + 1):
        jsum, lsum = _double_ratio_inner(a, b, c, d, ctx, k, i, x, None)
        bxi = _nz(qpoch(bx, ctx, i), f"(bx;q)_{i}")
        term = (qbinom(k, i, ctx) * ctx.num(ctx.qpow(binom2(i)))
                * qpoch(cx, ctx, i) * qpoch(dx, ctx, i) / bxi * jsum * lsum)
        total += term
        magnitude += abs(term)
    ratio = top.value / bot.value
    rel_top = top.tail_bound / abs(top.value) if top.value != 0 else ctx.zero
    rel_bot = bot.tail_bound / abs(bot.value)
    rel = (1 + rel_top) / (1 - rel_bot) - 1
    value = ratio * total
    rounding = 16 * ctx.eps * abs(ratio) * magnitude * (k + 2) ** 2
    return value, abs(value) * rel + rounding


def cf_double_ratio_inf(a, b, c, d, ctx: QContext, k: int, x) -> Scalar:
    """D_q^k of the infinite-product ratio (the n -> infinity theorem)."""
    return cf_double_ratio_inf_estimate(a, b, c, d, ctx, k, x)[0]
