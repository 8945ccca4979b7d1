import functools

import numpy as np
import pytest
from scipy.linalg import expm

from polaron.coupling import system_constants
from polaron.gme import build_kernel, solve_gme, solve_gme_converged
from polaron.model import fig3_params


@functools.lru_cache(maxsize=None)
def fig3_constants(**overrides):
    return system_constants(fig3_params(**overrides))


@functools.lru_cache(maxsize=None)
def fig3_run(temperature, tilt=0.0, t_final=10.0, dt=None):
    """Kernel and GME trajectory for the reference 1D system, cached across tests.

    Without an explicit ``dt`` the step is halved until P_j(t_final) is stable.
    """
    sc = fig3_constants()
    if dt is None:
        kernel, traj, _ = solve_gme_converged(sc, temperature, tilt, t_final)
        return kernel, traj
    kernel = build_kernel(sc, temperature, tilt, t_final, dt=dt)
    return kernel, solve_gme(kernel)


def unitary_occupations(n_sites, times, hopping=1.0, tilt=0.0):
    """|<j|exp(-iHt)|0>|^2 for H = -J sum (|j><j+1| + h.c.) + tilt * sum j |j><j|."""
    j = np.arange(n_sites) - (n_sites - 1) // 2
    h = -hopping * (np.eye(n_sites, k=1) + np.eye(n_sites, k=-1)) + np.diag(tilt * j)
    psi0 = np.zeros(n_sites)
    psi0[(n_sites - 1) // 2] = 1.0
    return np.array([np.abs(expm(-1j * h * t) @ psi0) ** 2 for t in times])


def constant_kernel_occupations(j, t, nodes=400):
    """Exact solution of dP/dt = int_0^t 2 [P_{j+1} + P_{j-1} - 2 P_j](t - s) ds.

    In Fourier space P_k'' = -8 sin^2(k/2) P_k, so
    P_j(t) = (1/pi) int_0^pi cos(2 sqrt(2) t sin(k/2)) cos(k j) dk.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    k = 0.5 * np.pi * (x + 1)
    w = 0.5 * np.pi * w
    return np.sum(w * np.cos(2 * np.sqrt(2) * t * np.sin(k / 2)) * np.cos(k * j)) / np.pi


@pytest.fixture(scope="session")
def fig3():
    return fig3_constants()
