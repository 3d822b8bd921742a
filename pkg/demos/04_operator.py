"""
The deformed q-exponential operator
===================================

T(yD_q|u) = sum_n u^C(n,2) y^n D_q^n / (q;q)_n.  ``t_apply`` sums it on any
function handle; the ``t_*`` closed forms turn it into finite sums of 1Phi1
values.
"""

from fractions import Fraction as F

from qcalc import FunctionHandle, Mode, OperatorSpec, QContext, qpoch, t_apply
from qcalc.qoper import chen_liu_coefficients, saad_coefficients, t_coefficients, t_inv_poch, t_poch_ratio

q = F(1, 2)
ctx = QContext(q=q, mode=Mode.FLOAT, prec=128)
op = OperatorSpec(y=F(1, 4), u=F(1, 2))

a, n, x = F(1, 3), 2, F(1, 2)
f = FunctionHandle(lambda t, c: 1 / qpoch(a * t, c, n))
direct = t_apply(op, f, ctx, x)
closed = t_inv_poch(a, op, ctx, n, x)
print("operator series:", direct.value, f"({direct.terms_used} terms)")
print("closed form    :", closed.value)
print("difference     :", abs(direct.value - closed.value))

# %%
# A ratio of two q-shifted factorials.

b = F(1, 5)
g = FunctionHandle(lambda t, c: qpoch(F(1, 2) * t, c, 3) / qpoch(b * t, c, 3))
print("ratio:", t_apply(op, g, ctx, F(1)).value, t_poch_ratio(F(1, 2), b, op, ctx, 3, F(1)).value)

# %%
# u = 1 and (y, u) = (-b, q) give two older operators coefficient for
# coefficient.

exact = QContext(q=q)
print(t_coefficients(F(2, 7), 1, exact, 6) == chen_liu_coefficients(F(2, 7), exact, 6))
print(t_coefficients(F(-2, 7), q, exact, 6) == saad_coefficients(F(2, 7), exact, 6))
