"""
Checking identities on grids
============================

``verify`` runs both sides of a registered identity over a parameter grid.
Exact mode demands a zero residual; float mode compares the residual with
the error budget of both routes.
"""

from fractions import Fraction as F

from qcalc import IDENTITIES, Mode, QContext, verify

exact = QContext(q=F(1, 2))
chu = verify("chu", exact)
print(f"chu: {len(chu.cases)} cases, {chu.skipped_poles} poles skipped, "
      f"max residual {chu.max_residual}, {chu.status.value}")

fl = QContext(q=F(1, 2), mode=Mode.FLOAT, prec=128)
for name in ("gauss", "jackson", "gauss_deriv", "jackson_deriv", "chu_T"):
    rep = verify(name, fl)
    worst = max(rep.cases, key=lambda c: c.residual / c.tail_budget)
    print(f"{name:14s} {rep.status.value:9s} max residual {float(rep.max_residual):.2e}"
          f"  worst residual/budget {float(worst.residual / worst.tail_budget):.2f}")

# %%
# A deliberately wrong right-hand side, off by a factor 1 + q^10, is caught.

print("perturbed gauss:", verify("gauss", fl, perturb=True).status.value)

# %%
# Everything that is registered:

for ident in IDENTITIES.values():
    print(f"  {ident.identity_id:17s} {ident.summary}")
