"""
Basic hypergeometric series
===========================

Terminating series are exact.  Everything else is summed in float mode
until the terms stall, and the result says how it stopped.
"""

from fractions import Fraction as F

from qcalc import Mode, QContext, SeriesSpec, dphi, dq_param_lower, phi
from qcalc.qcore import qpoch_multi_inf

q = F(1, 2)
exact = QContext(q=q)

# an upper parameter q^-2 = 4 leaves three terms
r = phi(SeriesSpec([F(4), F(1, 3)], [F(1, 5)], F(1, 2)), exact)
print(r.value, r.terms_used, r.terminated.value)

# %%
# q-Gauss: the series at z = c/ab against its product form.

fl = QContext(q=q, mode=Mode.FLOAT, prec=128)
a, b, c = F(1, 2), F(1, 3), F(1, 10)
series = phi(SeriesSpec([a, b], [c], c / (a * b)), fl)
product = qpoch_multi_inf([c / a, c / b], fl).value / qpoch_multi_inf([c, c / (a * b)], fl).value
print("series  ", series.value, f"({series.terms_used} terms, tail {float(series.tail_estimate):.1e})")
print("product ", product)

# %%
# The deformation u multiplies the n-th term by u^C(n,2).

spec = SeriesSpec([a], [F(1, 5)], F(1, 4))
for u in (F(1), F(1, 3), q):
    print("u =", u, "->", dphi(spec, fl.with_u(u)).value)

# %%
# Derivative in the first lower parameter as a single bigger series.

print("D_c 2phi1 :", dq_param_lower(SeriesSpec([a, b], [c], F(1, 4)), fl, 1).value)
