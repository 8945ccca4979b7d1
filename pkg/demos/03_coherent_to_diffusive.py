"""
From coherent to diffusive hopping
==================================

Start the impurity on site 0 and follow the occupations P_j(t).  At T = 0
the spread is ballistic (MSD ~ t^2); a hot condensate destroys the phase
memory and the spread slows toward diffusion.
"""

# %%
import numpy as np

from polaron import fig3_params, system_constants
from polaron.analysis import fit_power_law_windows, msd
from polaron.gme import solve_gme_converged

sc = system_constants(fig3_params())

# %%
# Each run halves the time step until P_j(10 hbar/J) stops changing.
runs = {}
for T in (0.0, 5.0, 15.0):
    kernel, traj, info = solve_gme_converged(sc, T, 0.0, 10.0)
    runs[T] = traj
    full, late = fit_power_law_windows(traj.t, msd(traj))
    print(f"T = {T:4.1f} E_p: dt = {info['dt']:.4f}, MSD(10) = {msd(traj)[-1]:7.3f}, "
          f"alpha (whole run) = {full['alpha']:.3f}, alpha (second half) = {late['alpha']:.3f}")

# %%
# Occupations near the origin at t = 10 hbar/J.  The memory equation does
# not preserve positivity: at low temperature some P_j dip below zero.
for T, traj in runs.items():
    p = traj.at(10.0)
    centre = traj.n_sites // 2
    row = " ".join(f"{x:+.4f}" for x in p[centre - 3:centre + 4])
    print(f"T = {T:4.1f}: P_-3..3 = {row}  (min {traj.min_value:+.3f})")
