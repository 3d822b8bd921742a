"""Arithmetic kernel: exact rationals or fixed-precision binary floats.

Exact values are :class:`fractions.Fraction` (``int`` is accepted as an exact
literal); floating values are ``mpf`` numbers belonging to the per-precision
mpmath context owned by a :class:`QContext`.  Every other module converts its
inputs through :meth:`QContext.num` and then uses ordinary operators, so the
code above this layer is mode-agnostic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Union

from mpmath.ctx_mp import MPContext
from mpmath.ctx_mp_python import _mpf
from mpmath.libmp import from_rational

from .errors import ConfigParseError, DivisionByZero, DomainError, ModeMismatch

Scalar = Union[Fraction, _mpf]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_FLOAT_RE = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")


class Mode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


@lru_cache(maxsize=None)
def mp_context(prec: int) -> MPContext:
    """Return the shared mpmath context for ``prec`` bits.

    Contexts are created once and never mutated afterwards, so precision is a
    property of the context rather than of global state.
    """
    ctx = MPContext()
    ctx.prec = prec
    return ctx


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def is_float(x) -> bool:
    return isinstance(x, (_mpf, float))


def parse_scalar(text: str, ctx: "QContext | None" = None) -> Scalar:
    """Parse ``p/q``, an integer, or a decimal/scientific literal.

    Rational literals always give a Fraction.  Decimal literals are float
    literals: they need a float-mode context and come back as ``mpf``.
    """
    if not isinstance(text, str):
        raise ConfigParseError(f"expected a string literal, got {text!r}")
    m = _RATIONAL_RE.match(text)
    if m:
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ConfigParseError(f"zero denominator in {text!r}")
        return Fraction(num, den)
    if _FLOAT_RE.match(text):
        if ctx is None or ctx.exact:
            raise ModeMismatch(f"float literal {text!r} needs a float-mode context")
        return ctx.mp.mpf(text.strip())
    raise ConfigParseError(f"cannot parse scalar literal {text!r}")


def format_scalar(x, digits: int | None = None) -> str:
    """Lossless text for exact values (``p/q``), decimal text for floats."""
    if is_exact(x):
        return str(Fraction(x))
    if isinstance(x, _mpf):
        if digits is None:
            digits = max(15, int(x.context.prec * 0.30103) + 2)
        return x.context.nstr(x, digits, min_fixed=-5, max_fixed=5)
    raise TypeError(f"not a scalar: {x!r}")


def scalar_arith(a: Scalar, b, op: str) -> Scalar:
    """Binary arithmetic with mode checking.

    ``op`` is one of add, sub, mul, div, pow_int.  For ``pow_int`` the second
    argument is a Python int.
    """
    if op == "pow_int":
        if not isinstance(b, int):
            raise TypeError("pow_int needs an integer exponent")
        if b < 0 and a == 0:
            raise DivisionByZero("zero to a negative power")
        return Fraction(a) ** b if is_exact(a) else a ** b
    if is_exact(a) != is_exact(b):
        raise ModeMismatch(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    if not (is_exact(a) or isinstance(a, _mpf)) or not (is_exact(b) or isinstance(b, _mpf)):
        raise ModeMismatch("operands must be Fraction or mpf")
    if is_exact(a):
        a, b = Fraction(a), Fraction(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise DivisionByZero("division by zero")
        return a / b
    raise ValueError(f"unknown op {op!r}")


def log2_abs(x) -> float:
    """Cheap estimate of log2|x| (``-inf`` for zero), usable for any scalar."""
    if x == 0:
        return -math.inf
    if is_exact(x):
        x = Fraction(x)
        return math.log2(abs(x.numerator)) - math.log2(x.denominator)
    if isinstance(x, _mpf):
        m, e = x.context.frexp(x)
        return math.log2(abs(float(m))) + int(e)
    return math.log2(abs(x))


@dataclass(frozen=True)
class TruncationPolicy:
    """How infinite series and products are cut off.

    ``rel_tol`` is kept as an exact Fraction so that policies hash and
    serialise deterministically.
    """

    max_terms: int = 500
    rel_tol: Fraction = Fraction(1, 10**30)
    stall_window: int = 3

    def __post_init__(self):
        tol = self.rel_tol
        if isinstance(tol, str):
            tol = Fraction(tol.strip())
        elif isinstance(tol, float):
            tol = Fraction(repr(tol))
        elif isinstance(tol, _mpf):
            tol = Fraction(str(tol))
        object.__setattr__(self, "rel_tol", Fraction(tol))
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")
        if self.rel_tol <= 0:
            raise DomainError("rel_tol must be positive")
        if self.stall_window < 1:
            raise DomainError("stall_window must be >= 1")


@dataclass(frozen=True)
class QContext:
    """Base ``q``, deformation ``u``, arithmetic mode and truncation policy.

    ``q`` and ``u`` keep the literal they were given (a Fraction whenever
    possible, even in float mode) so that exact zero-factor and termination
    tests stay available; :attr:`qn` is ``q`` in working precision.
    """

    q: Scalar
    u: Scalar = Fraction(1)
    mode: Mode = Mode.EXACT
    prec: int = 128
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        mode = Mode(self.mode)
        object.__setattr__(self, "mode", mode)
        if self.prec < 2:
            raise DomainError("precision must be at least 2 bits")
        for name in ("q", "u"):
            v = getattr(self, name)
            if isinstance(v, str):
                v = parse_scalar(v, None if mode is Mode.EXACT else self)
            if is_exact(v):
                v = Fraction(v)
            elif mode is Mode.EXACT:
                raise ModeMismatch(f"{name} must be rational in exact mode, got {v!r}")
            elif isinstance(v, float):
                v = self.mp.mpf(v)
            object.__setattr__(self, name, v)
        if not (0 < abs(self.q) < 1):
            raise DomainError(f"need 0 < |q| < 1, got q = {self.q}")
        object.__setattr__(self, "qn", self.num(self.q))

    # -- mode helpers -------------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.mode is Mode.EXACT

    @property
    def mp(self) -> MPContext:
        return mp_context(self.prec)

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.exact else self.mp.one

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else self.mp.zero

    @property
    def eps(self) -> Scalar:
        """Unit roundoff (zero in exact mode)."""
        return Fraction(0) if self.exact else self.mp.ldexp(self.mp.one, 1 - self.prec)

    @property
    def rel_tol(self) -> Scalar:
        return self.num(self.truncation.rel_tol) if not self.exact else self.truncation.rel_tol

    def num(self, x) -> Scalar:
        """Convert ``x`` to the working type of this context."""
        if isinstance(x, bool):
            raise TypeError("booleans are not scalars")
        if self.exact:
            if is_exact(x):
                return Fraction(x)
            if isinstance(x, str):
                return parse_scalar(x)
            raise ModeMismatch(f"floating value {x!r} in exact context")
        if is_exact(x):
            x = Fraction(x)
            return self.mp.make_mpf(from_rational(x.numerator, x.denominator, self.prec, "n"))
        if isinstance(x, _mpf):
            if x.context is self.mp:
                return x
            return self.mp.mpf(x)
        if isinstance(x, float):
            return self.mp.mpf(x)
        if isinstance(x, str):
            return self.num(parse_scalar(x, self))
        raise TypeError(f"not a scalar: {x!r}")

    def literal(self, x) -> Scalar:
        """Keep ``x`` exact when it is rational, else convert to working type."""
        if is_exact(x):
            return Fraction(x)
        if isinstance(x, str):
            return self.literal(parse_scalar(x, self))
        return self.num(x)

    def qpow(self, k: int) -> Scalar:
        """``q**k``, exact whenever ``q`` is rational (also for k < 0)."""
        return _rational_pow(self.q, k) if is_exact(self.q) else self.qn ** k

    def abs(self, x) -> Scalar:
        return abs(x)

    # -- derived contexts ---------------------------------------------------
    def replace(self, **changes) -> "QContext":
        return replace(self, **changes)

    def with_u(self, u) -> "QContext":
        return replace(self, u=u)

    def with_q(self, q) -> "QContext":
        return replace(self, q=q)

    def with_prec(self, prec: int) -> "QContext":
        return replace(self, prec=prec)

    def with_truncation(self, **changes) -> "QContext":
        return replace(self, truncation=replace(self.truncation, **changes))

    def describe(self) -> str:
        if self.exact:
            return f"exact, q={format_scalar(self.q)}, u={format_scalar(self.u)}"
        return f"float[{self.prec}], q={format_scalar(self.q)}, u={format_scalar(self.u)}"


@lru_cache(maxsize=4096)
def _rational_pow(q: Fraction, k: int) -> Fraction:
    return q ** k
