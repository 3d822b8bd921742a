"""
Probing alternative forms
=========================

When a formula can be written several ways, ``probe_identity`` checks each
candidate right-hand side against the same left-hand side.
"""

from fractions import Fraction as F

from qcalc import Mode, QContext, SeriesSpec, phi, probe_identity

fl = QContext(q=F(1, 2), mode=Mode.FLOAT, prec=128)
exact = QContext(q=F(1, 2))

for name, ctx in (("t_poch_ratio", fl), ("lower_derivative", fl), ("chu_T", fl),
                  ("chu_deriv", exact), ("gauss_deriv", fl), ("jackson_deriv", fl)):
    print(name)
    for variant, rep in probe_identity(name, ctx).items():
        print(f"   {variant:16s} {rep.status.value:9s} max residual {float(rep.max_residual):.3g}")

# %%
# With a = 1 the derivative identity of the Chu sum carries the factor
# (1 - a), so it says nothing about the 3phi2 itself.  The series is not
# zero:

q, c = F(1, 2), F(1, 5)
for n in range(1, 4):
    vals = [phi(SeriesSpec((q ** (1 - n), q, q ** (k + 1)), (c * q ** (k + 1), q * q), q), exact).value
            for k in range(1, n + 1)]
    print(n, [str(v) for v in vals])
