"""Exact and high-precision q-calculus: q-shifted factorials, the Jackson
q-derivative, basic hypergeometric series, the deformed q-exponential
operator, and a two-route identity checker."""

from .errors import *  # noqa: F401,F403
from .scalar import Mode, QContext, Scalar, TruncationPolicy, format_scalar, parse_scalar
from .qcore import PochResult, qbinom, qfact, qpoch, qpoch_inf, qpoch_multi
from .series import SeriesResult, Termination
from .qdiff import FunctionHandle, dq_apply, dq_iter, leibniz_rhs
from .qhyper import SeriesSpec, dphi, dq_param_lower, phi
from .qoper import OperatorSpec, t_apply
from .identities import (IDENTITIES, IdentityCase, IdentityReport, Status, check_identity,
                         probe_identity, verify)

__version__ = "0.1.0"
