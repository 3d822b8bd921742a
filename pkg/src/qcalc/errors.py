"""Exception hierarchy shared by every module."""


class QCalcError(Exception):
    """Base class for all errors raised by qcalc."""


class ModeMismatch(QCalcError, TypeError):
    """Exact and floating scalars met in one expression."""


class DivisionByZero(QCalcError, ZeroDivisionError):
    pass


class ExactModeUnsupported(QCalcError):
    """The requested quantity is irrational in general (infinite product or series)."""


class MaxTermsExceeded(QCalcError):
    pass


class Divergent(QCalcError):
    pass


class DomainError(QCalcError, ValueError):
    pass


class ZeroEvaluationPoint(QCalcError, ValueError):
    """The q-derivative is undefined at x = 0."""


class PoleAtEvaluationPoint(QCalcError):
    """A denominator factor vanishes exactly at the requested point."""

    def __init__(self, factor: str, detail: str = ""):
        self.factor = factor
        msg = f"pole: factor {factor} vanishes"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class LowerParameterPole(PoleAtEvaluationPoint):
    """A lower parameter of a basic hypergeometric series equals q^-m."""


class EmptyGridAfterPoleFilter(QCalcError):
    pass


class ConfigParseError(QCalcError, ValueError):
    pass
