"""
Drift in a tilted lattice
=========================

A tilt of hbar omega_B per site produces a drift whose velocity first rises
linearly (ohmic regime) and then falls (negative differential conductance).
The Esaki-Tsu form v = 2 gamma (J~/J) w tau / (1 + (w tau)^2) summarises
each curve by a scattering time tau.
"""

# %%
import numpy as np

from polaron import fig3_params, system_constants
from polaron.analysis import drift_velocity, esaki_tsu, esaki_tsu_peak, fit_esaki_tsu
from polaron.gme import solve_gme_converged

sc = system_constants(fig3_params())
tilts = np.geomspace(0.2, 12.0, 8)

# %%
# Drift velocity v_d / v0 (v0 = J a / hbar) read off at t = 10 hbar/J.
T = 15.0
vd = []
for w in tilts:
    kernel, traj, _ = solve_gme_converged(sc, T, w, 10.0)
    vd.append(drift_velocity(traj))
    print(f"tilt {w:6.3f} J: v_d/v0 = {vd[-1]:.5f}")
vd = np.array(vd)

# %%
fit = fit_esaki_tsu(tilts, vd, kernel.hopping_ratio, sc.hopping)
peak_tilt, peak_v = esaki_tsu_peak(fit["tau"], fit["gamma"], kernel.hopping_ratio, sc.hopping)
print(f"tau = {fit['tau']:.3f} hbar/gn0, gamma = {fit['gamma']:.3f}, "
      f"residual/peak = {fit.residual_norm / vd.max():.3f}")
print(f"fitted peak at tilt {peak_tilt:.3f} J with v_d/v0 = {peak_v:.4f}")
model = esaki_tsu(tilts, fit["tau"], fit["gamma"], kernel.hopping_ratio, sc.hopping)
for w, v, m in zip(tilts, vd, model):
    print(f"   {w:6.3f}: data {v:.5f}, fit {m:.5f}")
