"""
Energy scales of a lattice impurity in a condensate
===================================================

Build the reference 1D system, look at the derived length and energy
scales, and tabulate the phonon-mediated interaction between sites.
"""

# %%
# The reference system: Rb-87 bosons, a K-41 impurity in a 395 nm lattice.
import numpy as np

from polaron import derive_scales, fig3_params, system_constants
from polaron.coupling import build_coupling_table

params = fig3_params()
scales = derive_scales(params)
sc = system_constants(params)
print(f"xi = {scales.healing_length * 1e9:.0f} nm, gn0 = {scales.gn0_nK:.2f} nK, d/xi = {scales.d_over_xi:.4f}, a/xi = {sc.a_over_xi:.4f}")
print(f"Wannier width sigma/xi = {sc.sigma_over_xi:.4f}, alpha = {sc.alpha:.4f}")

# %%
# The polaronic level shift sets the temperature unit.  Hopping is quoted
# in units of gn0, the condensate interaction energy.
print(f"E_p = {sc.level_shift:.4f} gn0 = {sc.level_shift_nK:.2f} nK, J = {sc.hopping:.4f} gn0")

# %%
# Phonon-mediated interaction scale V(r), with V(0) = 2 E_p, and
# the band narrowing J~/J as the condensate heats up.
from polaron.coupling import effective_hopping
from polaron.gme import phonon_grid_for

table = build_coupling_table(params)
for r, v in zip(table.separations, table.potential):
    print(f"r/xi = {r:.3f}: V = {v:+.5f} gn0")

for T in (0.0, 5.0, 15.0):
    grid = phonon_grid_for(sc, T, 20.0)
    print(f"T = {T:4.1f} E_p: J~/J = {effective_hopping(grid, sc.a_over_xi):.5f}")
