"""Shared fixtures and small independent oracles.

The oracles here use plain Fractions or mpmath's own q-functions and share
no code with the package, so agreement with them is meaningful.
"""

from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import settings

from qcalc import Mode, QContext

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

Q_GRID = [F(1, 2), F(1, 3), F(2, 5)]


def naive_poch(a, q, n):
    out = F(1)
    for k in range(n):
        out *= 1 - F(a) * F(q) ** k
    return out


def naive_term(upper, lower, q, z, n, u=1):
    """n-th term of the (deformed) series straight from its definition."""
    e = 1 + len(lower) - len(upper)
    num = F(1)
    for a in upper:
        num *= naive_poch(a, q, n)
    den = naive_poch(q, q, n)
    for b in lower:
        den *= naive_poch(b, q, n)
    c2 = n * (n - 1) // 2
    return F(u) ** c2 * num / den * ((-1) ** n * F(q) ** c2) ** e * F(z) ** n


def naive_dq(fn, q, k, x):
    """D_q^k by the textbook recursion on a plain callable."""
    if k == 0:
        return fn(x)
    return (naive_dq(fn, q, k - 1, x) - naive_dq(fn, q, k - 1, q * x)) / x


def mp_qp_inf(a, q, dps=60):
    with mpmath.workdps(dps):
        return mpmath.qp(mpmath.mpf(a.numerator) / a.denominator,
                         mpmath.mpf(q.numerator) / q.denominator)


@pytest.fixture
def exact_half():
    return QContext(q=F(1, 2))


@pytest.fixture
def float128():
    return QContext(q=F(1, 2), mode=Mode.FLOAT, prec=128)


def fctx(q=F(1, 2), prec=128, **kw):
    return QContext(q=q, mode=Mode.FLOAT, prec=prec, **kw)


def ectx(q=F(1, 2), **kw):
    return QContext(q=q, **kw)


# -- acceptance summary ---------------------------------------------------------

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if not marker:
        return
    number, text = marker
    ok, _ = _CRITERIA.get(number, (True, text))
    _CRITERIA[number] = (ok and report.passed, text)


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark:
        item.user_properties.append(("criterion", tuple(mark.args)))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, text = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}")
