"""Truncated summation shared by the series and operator modules."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Tuple

from .errors import Divergent, MaxTermsExceeded
from .scalar import QContext, Scalar, TruncationPolicy

# ratio bounds closer to 1 than this are not trusted for a geometric tail
RIGOROUS_RATIO_CAP = 0.99
OBSERVED_RATIO_CAP = 0.9


class Termination(str, Enum):
    EXACT_TERMINATING = "ExactTerminating"
    TAIL_TOLERANCE = "TailTolerance"
    MAX_TERMS = "MaxTerms"


@dataclass(frozen=True)
class SeriesResult:
    """A (possibly truncated) sum.

    ``tail_estimate`` bounds the neglected terms and is zero for terminating
    sums; ``round_error`` bounds accumulated floating roundoff (and any error
    inherited from the summands) and is zero in exact mode.
    """

    value: Scalar
    terms_used: int
    terminated: Termination
    tail_estimate: Scalar | None
    round_error: Scalar = 0

    @property
    def error(self) -> Scalar:
        return (self.tail_estimate or 0) + self.round_error

    def scaled(self, factor) -> "SeriesResult":
        f = abs(factor)
        tail = None if self.tail_estimate is None else self.tail_estimate * f
        return SeriesResult(self.value * factor, self.terms_used, self.terminated,
                            tail, self.round_error * f)


def estimate(result, ctx: QContext) -> Tuple[Scalar, Scalar]:
    """Split an evaluator result into ``(value, error bound)``."""
    if isinstance(result, SeriesResult):
        return ctx.num(result.value), ctx.num(result.error)
    if hasattr(result, "tail_bound"):
        tail = result.tail_bound if result.tail_bound is not None else 0
        v = ctx.num(result.value)
        return v, ctx.num(tail) + ctx.eps * abs(v)
    if isinstance(result, tuple):
        v, e = result
        return ctx.num(v), ctx.num(e)
    v = ctx.num(result)
    return v, ctx.eps * abs(v) * 4


def accumulate(terms: Iterable, ctx: QContext,
               policy: TruncationPolicy | None = None,
               finite: bool = False) -> SeriesResult:
    """Sum ``(term, error, ratio_bound)`` triples under a truncation policy.

    ``ratio_bound`` (or None) must bound ``|t_{m+1}/t_m|`` for every later
    ``m``; when it is None the largest ratio seen over the last
    ``stall_window`` terms is used instead.  Summation stops after
    ``stall_window`` consecutive terms below ``rel_tol`` times the larger of
    the partial sum and the largest term so far, provided a ratio below 1 is
    available for the geometric tail.  An exhausted iterator is an exactly
    terminating sum; with ``finite`` the iterator is known to end and is
    summed in full.  Summation roundoff is added to ``round_error``.
    """
    policy = policy or ctx.truncation
    window = policy.stall_window
    tol = ctx.num(policy.rel_tol) if not ctx.exact else policy.rel_tol
    total = ctx.zero
    err_total = ctx.zero
    biggest = ctx.zero
    ratios: deque = deque(maxlen=window)
    small = 0
    prev = None
    n = 0
    it: Iterator = iter(terms)
    peak = ctx.zero
    for t, err, bound in it:
        if not ctx.exact and not ctx.mp.isfinite(t):
            raise Divergent(f"non-finite term at index {n}")
        total += t
        err_total += err
        at = abs(t)
        if at > biggest:
            biggest = at
        if prev is not None:
            if at == 0:
                ratios.append(0)
            elif prev == 0:
                ratios.append(None)
            else:
                ratios.append(at / prev)
        prev = at
        n += 1
        if not ctx.exact and abs(total) > peak:
            peak = abs(total)
        if finite:
            continue
        if ctx.exact:
            if n >= policy.max_terms:
                break
            continue
        scale = max(abs(total), biggest)
        small = small + 1 if at <= tol * scale else 0
        if small >= window or n >= policy.max_terms:
            rho = _tail_ratio(bound, ratios, window)
            if rho is not None:
                tail = at * rho / (1 - rho)
                kind = Termination.TAIL_TOLERANCE if small >= window else Termination.MAX_TERMS
                return SeriesResult(total, n, kind, tail, err_total + _summation_error(ctx, n, peak))
            if n >= policy.max_terms:
                raise MaxTermsExceeded(
                    f"no convergent tail bound after {policy.max_terms} terms")
    else:
        return SeriesResult(total, n, Termination.EXACT_TERMINATING, ctx.zero,
                            err_total + _summation_error(ctx, n, peak))
    # exact mode ran out of terms without the iterator ending
    return SeriesResult(total, n, Termination.MAX_TERMS, None, err_total)


def _summation_error(ctx: QContext, n: int, peak):
    return ctx.eps * n * peak


def _tail_ratio(bound, ratios, window):
    if bound is not None:
        return bound if bound < RIGOROUS_RATIO_CAP else None
    if len(ratios) < window or any(r is None for r in ratios):
        return None
    rho = max(ratios)
    return rho if rho < OBSERVED_RATIO_CAP else None
