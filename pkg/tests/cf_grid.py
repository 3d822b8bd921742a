"""Closed form vs lattice-difference cases for the q-derivative theorems.

Each case is ``(name, closed, handle, k, x, ctx)``; ``closed()`` gives the
theorem's value and ``dq_iter(handle, ctx, k, x)`` the black-box value.  The
black boxes are plain-Fraction functions that do not touch the package.
"""

from fractions import Fraction as F
from itertools import product

from qcalc import FunctionHandle, QContext
from qcalc.qdiff import cf_double_ratio, cf_geometric, cf_inv_poch, cf_poch_ratio, cf_xn_over_poch

from conftest import naive_poch

PARAMS = [F(1, 2), F(-1, 2), F(1, 3), F(2, 3), F(1, 5)]
XS = [F(1), F(1, 2), F(2, 3)]
QS = [F(1, 2), F(1, 3), F(2, 5)]


def _handle(fn, q):
    return FunctionHandle(lambda x, ctx: fn(x), "black box")


def geometric_cases(params=PARAMS, xs=XS, qs=QS, nmax=6):
    for a, x, q in product(params, xs, qs):
        ctx = QContext(q=q)
        for n in range(1, nmax + 1):
            yield ("geometric", lambda a=a, n=n, x=x, ctx=ctx: cf_geometric(a, ctx, n, x),
                   _handle(lambda t, a=a: 1 / (1 - a * t), q), n, x, ctx)


def inv_poch_cases(params=PARAMS, xs=XS, qs=QS, nmax=6):
    for a, x, q in product(params, xs, qs):
        ctx = QContext(q=q)
        for m, n in product(range(nmax + 1), repeat=2):
            yield ("inv_poch", lambda a=a, m=m, n=n, x=x, ctx=ctx: cf_inv_poch(a, ctx, m, n, x),
                   _handle(lambda t, a=a, n=n, q=q: 1 / naive_poch(a * t, q, n), q), m, x, ctx)


def xn_over_poch_cases(params=PARAMS, xs=XS, qs=QS, nmax=6):
    for a, x, q in product(params, xs, qs):
        ctx = QContext(q=q)
        for k, n in product(range(nmax + 1), repeat=2):
            yield ("xn_over_poch",
                   lambda a=a, k=k, n=n, x=x, ctx=ctx: cf_xn_over_poch(a, ctx, k, n, x),
                   _handle(lambda t, a=a, n=n, q=q: t ** n / naive_poch(a * t, q, n), q), k, x, ctx)


def poch_ratio_cases(params=PARAMS, xs=XS, qs=QS, nmax=6):
    for a, b, x, q in product(params, params, xs, qs):
        ctx = QContext(q=q)
        for n in range(nmax + 1):
            for k in range(n + 1):
                yield ("poch_ratio",
                       lambda a=a, b=b, k=k, n=n, x=x, ctx=ctx: cf_poch_ratio(a, b, ctx, k, n, x),
                       _handle(lambda t, a=a, b=b, n=n, q=q:
                               naive_poch(a * t, q, n) / naive_poch(b * t, q, n), q), k, x, ctx)


def double_ratio_cases(params=PARAMS, xs=XS, qs=QS, nmax=6, kmax=6):
    for a, b, c, d in product(params, repeat=4):
        for x, q in product(xs, qs):
            ctx = QContext(q=q)
            for n in range(nmax + 1):
                for k in range(kmax + 1):
                    yield ("double_ratio",
                           lambda a=a, b=b, c=c, d=d, k=k, n=n, x=x, ctx=ctx:
                           cf_double_ratio(a, b, c, d, ctx, k, n, x),
                           _handle(lambda t, a=a, b=b, c=c, d=d, n=n, q=q:
                                   naive_poch(a * t, q, n) * naive_poch(b * t, q, n)
                                   / (naive_poch(c * t, q, n) * naive_poch(d * t, q, n)), q),
                           k, x, ctx)
