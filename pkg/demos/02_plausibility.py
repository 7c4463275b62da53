"""Do the diagonal distances behave the way intuition says they should?

A Student-t vine approaches its nearest Gaussian vine as the degrees of
freedom grow, so the distance must shrink.  Against a Gumbel vine (upper tail
dependence), a Clayton vine (lower tails) must be far away and a
survival Clayton vine (upper tails) close.
"""

from __future__ import annotations

from vinedist import GridSpec, dkl, nearest_gaussian, sdkl, single_family_vine, t_vine

spec = GridSpec(n=10)
print(" nu      dKL     sdKL")
for nu in (3, 5, 7, 10, 15, 20, 25, 30):
    rf = t_vine(5, 0.5, nu)
    rg = nearest_gaussian(rf)
    print(f"{nu:3d}  {dkl(rf, rg, spec).value:7.4f}  {sdkl(rf, rg, spec).value:7.4f}")

gumbel = single_family_vine(5, "G", False, 0.5)
print("\nfrom the Gumbel vine     dKL     sdKL")
for label, fam, surv in (("Clayton", "C", False), ("Joe", "J", False),
                         ("Gaussian", "N", False), ("survival Clayton", "C", True)):
    other = single_family_vine(5, fam, surv, 0.5)
    print(f"{label:18} {dkl(gumbel, other, spec).value:8.4f} {sdkl(gumbel, other, spec).value:8.4f}")
