"""
Does the impurity trap itself?
==============================

A Gaussian trial state of width sigma balances kinetic energy against the
condensate deformation it creates.  In 1D a minimum exists for any
coupling; in 2D and 3D the coupling must exceed a threshold.
"""

# %%
import numpy as np

from polaron import fig3_params
from polaron.selftrap import (asymptotic_width_1d, critical_alpha, minimize_energy,
                              trapping_report)

# %%
for ap in (0.25, 0.5, 1.0):
    res = minimize_energy(ap, 1)
    print(f"1D alpha' = {ap}: sigma*/xi = {res.sigma_star:.3f} "
          f"(weak-coupling estimate {asymptotic_width_1d(ap):.3f})")

# %%
for dim in (2, 3):
    crit = critical_alpha(dim)
    print(f"{dim}D: alpha'_c = {crit.alpha_c:.4f}, width at threshold sigma/xi = {crit.sigma_at_threshold:.4g}")

# %%
# For the reference lattice the free self-trapped state is far wider than
# a Wannier orbital, so the lattice confines the impurity, not the cloud.
rep = trapping_report(fig3_params())
print(f"alpha' = {rep['alpha_prime']:.4f}, sigma_self/xi = {rep['sigma_self_over_xi']:.3f}, "
      f"sigma_lattice/xi = {rep['sigma_lattice_over_xi']:.4f}, ratio = {rep['ratio']:.1f}")
