"""
The memory kernel of the hopping equation
=========================================

The phonon cloud enters transport through the exponent Phi(s).  Its real
part grows from zero to a plateau 2 S_T; the kernel W(s) = 2 Re e^{-Phi}
therefore relaxes from the bare value 2 J^2 to the coherent floor 2 J~^2.
"""

# %%
import numpy as np

from polaron import fig3_params, system_constants
from polaron.gme import build_kernel

sc = system_constants(fig3_params())

# %%
# Kernels at three temperatures, in units of (J/hbar)^2 with s in hbar/J.
for T in (0.0, 5.0, 15.0):
    k = build_kernel(sc, T, 0.0, 10.0)
    print(f"T = {T:4.1f} E_p: J~/J = {k.hopping_ratio:.4f}, W_inf = {k.w_inf:.4f}, "
          f"decay time = {k.decay_time:.2f} hbar/J")
    for s in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0):
        i = int(round(s / k.dt))
        print(f"   s = {s:4.1f}: W = {k.w_plus[i]:+.5f}, Re Phi = {k.phi[i].real:.5f}")

# %%
# A tilt of hbar omega_B per site splits the kernel into uphill and downhill
# parts; the downhill one (W_minus) carries the larger weight at short times.
k = build_kernel(sc, 5.0, 1.0, 10.0)
for s in (0.5, 1.0, 2.0):
    i = int(round(s / k.dt))
    print(f"tilt 1: s = {s}: W_plus = {k.w_plus[i]:+.4f}, W_minus = {k.w_minus[i]:+.4f}")
