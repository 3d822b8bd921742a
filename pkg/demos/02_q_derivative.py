"""
The Jackson q-derivative
========================

``dq_iter`` differences a function on the lattice x, qx, q^2 x, ... and
never uses a formula.  The closed forms are checked against it.
"""

from fractions import Fraction as F

from qcalc import FunctionHandle, QContext, dq_iter, leibniz_rhs, qpoch
from qcalc.qdiff import cf_double_ratio, cf_inv_poch, cf_poch_ratio

ctx = QContext(q=F(1, 2))

square = FunctionHandle.of(lambda x: x * x)
print("D_q x^2 at 1:", dq_iter(square, ctx, 1, F(1)))

# %%
# A handle counts how often its evaluator really runs: a k-th derivative
# costs k+1 calls, and repeating it costs nothing.

a, n = F(1, 3), 3
f = FunctionHandle.of(lambda x: 1 / qpoch(a * x, ctx, n))
print("lattice :", dq_iter(f, ctx, 2, F(1, 2)), " calls:", f.calls)
print("formula :", cf_inv_poch(a, ctx, 2, n, F(1, 2)))

# %%
# Ratios of q-shifted factorials.

b = F(1, 5)
g = FunctionHandle.of(lambda x: qpoch(F(1, 2) * x, ctx, 3) / qpoch(b * x, ctx, 3))
print("ratio, k=2 :", dq_iter(g, ctx, 2, F(1)), cf_poch_ratio(F(1, 2), b, ctx, 2, 3, F(1)))

c, d = F(1, 5), F(1, 7)
h = FunctionHandle.of(lambda x: qpoch(F(1, 2) * x, ctx, 2) * qpoch(F(1, 3) * x, ctx, 2)
                      / (qpoch(c * x, ctx, 2) * qpoch(d * x, ctx, 2)))
print("double ratio, k=2 :", dq_iter(h, ctx, 2, F(1)) == cf_double_ratio(F(1, 2), F(1, 3), c, d, ctx, 2, 2, F(1)))

# %%
# The product rule.

p = FunctionHandle.of(lambda x: x ** 2 - 3)
s = FunctionHandle.of(lambda x: x ** 3 + x / 2)
print("Leibniz n=3 :", dq_iter(p * s, ctx, 3, F(2, 3)) == leibniz_rhs(p, s, ctx, 3, F(2, 3)))
