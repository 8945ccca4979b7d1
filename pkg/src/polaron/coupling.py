"""Impurity-condensate coupling: form factors, Green's functions, potentials, hopping.

Lengths are in units of the healing length xi and energies in g n0 unless a
name says otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bogoliubov import CUTOFF_SIGMAS, angular_average, dispersion
from .model import KB, SystemParams, derive_scales, hopping_gn0, validity_alpha
from .quadrature import composite_gauss_legendre, merge_edges
from .special import erfcx, exp_e1, j0, k0, sinc

_SPHERE = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}


def coupling_strength(kappa_over_g, d_over_xi, dimension):
    """(kappa/g)^2 (d/xi)^D: the prefactor 2 kappa^2/(g xi^D) / 2 in gn0 units."""
    return float(kappa_over_g) ** 2 * float(d_over_xi) ** dimension


def form_factor(q, sigma_over_xi, r=None):
    """Density form factor of a Gaussian Wannier state centred at ``r``.

    ``q`` has shape (..., D) or is scalar (1D).  |f|^2 = exp(-q^2 sigma^2 / 2).
    """
    if sigma_over_xi <= 0:
        raise ValueError("sigma must be positive")
    q = np.asarray(q, dtype=float)
    q2 = q * q if q.ndim == 0 else np.sum(q * q, axis=-1)
    amp = np.exp(-0.25 * q2 * sigma_over_xi**2)
    if r is None:
        return amp.astype(complex)
    r = np.asarray(r, dtype=float)
    phase = q * r if q.ndim == 0 else np.sum(q * r, axis=-1)
    return amp * np.exp(1j * phase)


def coupling_density(q, sigma_over_xi, strength, dimension=1):
    """Radial density m(q) of sum_q |M_{0,q}|^2 in the thermodynamic limit.

    m(q) dq = strength * S_D q^(D-1) / (2 pi)^D * eps/omega^3 * exp(-q^2 sigma^2/2) dq,
    normalized so that integral of 2 omega m equals V(0) = 2 E_p.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise ValueError("coupling density is singular at q = 0")
    # eps/omega^3 = 4 / (q (q^2+4)^(3/2))
    shape = 4.0 / (q * (q * q + 4.0) ** 1.5)
    geom = _SPHERE[dimension] * q ** (dimension - 1) / (2 * np.pi) ** dimension
    return strength * geom * shape * np.exp(-0.5 * q * q * sigma_over_xi**2)


def green_function(r, dimension=1):
    """Green's function of [nabla^2 - 4] in units of xi (source -2 delta)."""
    r = np.abs(np.asarray(r, dtype=float))
    if dimension == 1:
        return 0.5 * np.exp(-2 * r)
    if np.any(r == 0):
        raise ValueError(f"{dimension}D Green's function diverges at r = 0")
    if dimension == 2:
        return k0(2 * r) / np.pi
    if dimension == 3:
        return np.exp(-2 * r) / (2 * np.pi * r)
    raise ValueError(f"unsupported dimension {dimension}")


def g_function_closed(sigma_over_xi, dimension=1):
    """G(0, sigma) in closed form, z = sqrt(2) sigma/xi."""
    z = np.sqrt(2.0) * np.asarray(sigma_over_xi, dtype=float)
    if dimension == 1:
        return 0.5 * erfcx(z)
    if np.any(z <= 0):
        raise ValueError("G(0, 0) diverges for D > 1")
    if dimension == 2:
        return exp_e1(z * z) / (2 * np.pi)
    if dimension == 3:
        return (1.0 / (np.sqrt(np.pi) * z) - erfcx(z)) / np.pi
    raise ValueError(f"unsupported dimension {dimension}")


def _radial_kernel(y, r, dimension):
    if dimension == 1:
        return 2.0 / np.pi * np.cos(y * r) / (y * y + 4)
    if dimension == 2:
        return y * j0(y * r) / (np.pi * (y * y + 4))
    return y * y * sinc(y * r) / (np.pi**2 * (y * y + 4))


def g_function_quadrature(r, sigma_over_xi, dimension=1, order=16):
    """G(r, sigma) from its Fourier integral, half-period panels in the oscillating factor."""
    r = abs(float(r))
    s = float(sigma_over_xi)
    if s <= 0:
        raise ValueError("quadrature route needs sigma > 0")
    y_max = CUTOFF_SIGMAS / s
    # quadratic panels resolve 1/(y^2+4) near the origin and the Gaussian roll-off
    u = np.linspace(0, 1, 129)
    edges = y_max * u * u
    if r > 0:
        edges = merge_edges(edges, np.linspace(0, y_max, int(np.ceil(y_max * r / np.pi)) + 1))
    y, w = composite_gauss_legendre(edges, order)
    f = _radial_kernel(y, r, dimension) * np.exp(-0.5 * (y * s) ** 2)
    return float(np.sum(w * f))


def g_function(r, sigma_over_xi, dimension=1):
    """Green's function smeared over two Gaussian Wannier densities of width sigma.

    Closed forms at r = 0, quadrature otherwise; sigma = 0 reduces to
    :func:`green_function`.
    """
    r_arr = np.abs(np.asarray(r, dtype=float))
    s = float(sigma_over_xi)
    if s < 0:
        raise ValueError("sigma must be non-negative")
    if s == 0:
        if dimension > 1 and np.any(r_arr == 0):
            raise ValueError(f"G(0, 0) diverges in {dimension}D")
        return green_function(r_arr, dimension)
    out = np.empty(r_arr.shape)
    flat = out.reshape(-1)
    for i, ri in enumerate(r_arr.reshape(-1)):
        if ri == 0:
            flat[i] = g_function_closed(s, dimension)
        else:
            flat[i] = g_function_quadrature(ri, s, dimension)
    return out if out.ndim else float(out)


def interaction_potential(r, sigma_over_xi, strength, dimension=1):
    """Phonon-mediated potential V(r) = 2 (kappa/g)^2 (d/xi)^D G(r, sigma) in gn0."""
    if strength == 0:
        return np.zeros(np.shape(r)) if np.ndim(r) else 0.0
    return 2.0 * strength * g_function(r, sigma_over_xi, dimension)


def interaction_potential_grid(r, grid):
    """Same potential as a mode sum: sum_q hbar omega_q (M_i M_j^* + c.c.) on a phonon grid."""
    r = np.atleast_1d(np.abs(np.asarray(r, dtype=float)))
    base = 2.0 * grid.weights * grid.omega * grid.coupling
    vals = np.array([np.sum(base * angular_average(grid.dimension, grid.nodes * ri)) for ri in r])
    return vals


def hopping_exponent(grid, a_over_xi):
    """sum_q |M_0q|^2 [1 - cos(q.a)] (2 N_q + 1) on the grid."""
    shape = 1.0 - angular_average(grid.dimension, grid.nodes * a_over_xi)
    return float(np.sum(grid.weights * grid.coupling * shape * (2 * grid.occupation + 1)))


def effective_hopping(grid, a_over_xi):
    """Thermal band narrowing J~/J = exp(-hopping exponent)."""
    return float(np.exp(-hopping_exponent(grid, a_over_xi)))


def deformation_profile(sites, occupations, positions, sigma_over_xi, alpha, dimension=1):
    """Relative condensate deformation theta(r)/sqrt(n0) around occupied Wannier states.

    ``alpha`` is (kappa/g)(d/xi)^D.  Folding the Green's function with one
    Gaussian density of width sigma is G(r, sigma/sqrt(2)).
    """
    sites = np.asarray(sites, dtype=float)
    positions = np.asarray(positions, dtype=float)
    occ = np.broadcast_to(np.asarray(occupations, dtype=float), sites.shape[:1] if dimension > 1 else sites.shape)
    if alpha == 0:
        return np.zeros(positions.shape if dimension == 1 else positions.shape[:-1])
    s = sigma_over_xi / np.sqrt(2.0)
    total = 0.0
    for site, n in zip(sites.reshape(len(occ), -1) if dimension > 1 else sites, occ):
        if dimension == 1:
            dist = np.abs(positions - site)
        else:
            dist = np.linalg.norm(positions - site, axis=-1)
        total = total + n * g_function(dist, s, dimension)
    return -alpha * total


def polaron_band(ka, jt):
    """Band energy E(k) relative to the band centre: -2 J~ cos(k a)."""
    return -2.0 * jt * np.cos(ka)


class LevelShift(NamedTuple):
    gn0: float
    nK: float


@dataclass(frozen=True)
class SystemConstants:
    """Dimensionless numbers every transport calculation needs."""

    params: SystemParams
    scales: object
    sigma_over_xi: float
    a_over_xi: float
    strength: float
    level_shift: float     # E_p in gn0
    hopping: float         # J in gn0
    alpha: float

    @property
    def dimension(self):
        return self.params.dimension

    @property
    def level_shift_nK(self):
        return self.level_shift * self.scales.interaction_energy / KB * 1e9

    def temperature_gn0(self, t_over_ep):
        return float(t_over_ep) * self.level_shift


def system_constants(params: SystemParams) -> SystemConstants:
    scales = derive_scales(params)
    alpha = validity_alpha(params, scales)
    sigma = scales.sigma_over_xi
    strength = coupling_strength(params.kappa_over_g, scales.d_over_xi, params.dimension)
    ep = strength * float(g_function_closed(sigma, params.dimension))
    return SystemConstants(
        params=params, scales=scales, sigma_over_xi=sigma,
        a_over_xi=params.lattice_spacing / scales.healing_length,
        strength=strength, level_shift=ep,
        hopping=hopping_gn0(params, scales), alpha=alpha,
    )


def polaronic_shift(params: SystemParams) -> LevelShift:
    """E_p = (kappa^2 / g xi^D) G(0, sigma), in gn0 and in nK."""
    sc = system_constants(params)
    return LevelShift(sc.level_shift, sc.level_shift_nK)


@dataclass(frozen=True)
class CouplingTable:
    level_shift: float            # E_p, gn0
    level_shift_nK: float
    hopping_ratio: float          # J~/J at the stored temperature
    temperature_over_ep: float
    separations: np.ndarray       # xi units
    potential: np.ndarray         # V(r), gn0
    alpha: float
    regime_ok: bool


def build_coupling_table(params: SystemParams, separations=None, tol=1e-8):
    """E_p, J~/J and V(r) for one parameter set.

    ``separations`` are in lattice sites; defaults to 0..5.
    """
    sc = system_constants(params)
    from .bogoliubov import build_phonon_grid

    grid = build_phonon_grid(sc.scales, sc.sigma_over_xi, params.kappa_over_g,
                             sc.temperature_gn0(params.temperature), tol=tol,
                             dimension=params.dimension)
    if separations is None:
        separations = np.arange(6)
    r = np.asarray(separations, dtype=float) * sc.a_over_xi
    return CouplingTable(
        level_shift=sc.level_shift, level_shift_nK=sc.level_shift_nK,
        hopping_ratio=effective_hopping(grid, sc.a_over_xi),
        temperature_over_ep=params.temperature,
        separations=r,
        potential=np.atleast_1d(interaction_potential(r, sc.sigma_over_xi, sc.strength, params.dimension)),
        alpha=sc.alpha, regime_ok=sc.alpha < 1,
    )
