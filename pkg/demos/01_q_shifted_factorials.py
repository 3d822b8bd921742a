"""
q-shifted factorials
====================

Exact products with Fractions, truncated infinite products with a tail
bound, and q-binomial coefficients.
"""

from fractions import Fraction as F

from qcalc import Mode, QContext, qbinom, qpoch, qpoch_inf, qpoch_multi

exact = QContext(q=F(1, 3))

# (1/2; 1/3)_3 = (1 - 1/2)(1 - 1/6)(1 - 1/18)
print("(1/2;q)_3 =", qpoch(F(1, 2), exact, 3))

# a = q^-2 = 9 kills every product of length 3 or more
print("(9;q)_2 =", qpoch(F(9), exact, 2), " (9;q)_3 =", qpoch(F(9), exact, 3))

half = QContext(q=F(1, 2))
print("(1/2,1/3;q)_2 =", qpoch_multi([F(1, 2), F(1, 3)], half, 2))
print("[4 choose 2]_q =", qbinom(4, 2, half))

# %%
# Infinite products need float mode.  The result carries the number of
# factors used and a bound on what the rest could change.

fl = QContext(q=F(1, 2), mode=Mode.FLOAT, prec=128)
r = qpoch_inf(F(1, 2), fl)
print("(1/2;1/2)_inf ~", r.value)
print("  factors:", r.factors_used, " tail bound:", r.tail_bound)

# the finite product is a quotient of two infinite ones
n = 5
ratio = qpoch_inf(F(1, 2), fl).value / qpoch_inf(F(1, 2) * F(1, 2) ** n, fl).value
print("quotient - finite =", ratio - qpoch(F(1, 2), fl, n))
