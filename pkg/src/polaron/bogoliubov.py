"""Homogeneous-condensate phonon modes and the momentum quadrature grid.

All quantities are dimensionless: momenta in 1/xi, energies in g n0.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError
from .quadrature import composite_gauss_legendre, merge_edges
from .special import j0, sinc

# Gaussian form factor exp(-q^2 s^2 / 2) equals exp(-36) at the cutoff
CUTOFF_SIGMAS = 6 * np.sqrt(2)


def dispersion(q):
    """Free-particle energy and Bogoliubov frequency (eps, omega) at momentum q >= 0."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("momentum must be non-negative")
    eps = 0.5 * q * q
    omega = 0.5 * q * np.sqrt(q * q + 4.0)
    return eps, omega


def group_velocity(q):
    q = np.asarray(q, dtype=float)
    return (q * q + 2.0) / np.sqrt(q * q + 4.0)


def inverse_dispersion(omega):
    """Momentum with Bogoliubov frequency ``omega``; q^2 = 2(sqrt(1 + omega^2) - 1)."""
    omega = np.asarray(omega, dtype=float)
    return np.sqrt(2.0 * (np.sqrt(1.0 + omega * omega) - 1.0))


def bog_coefficients(q):
    """Bogoliubov amplitudes (u, v) without the 1/sqrt(volume) factor; u^2 - v^2 = 1."""
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise ValueError("Bogoliubov coefficients diverge at q = 0")
    eps, omega = dispersion(q)
    ratio = (eps + 1.0) / omega
    u = np.sqrt(0.5 * (ratio + 1.0))
    v = -np.sqrt(0.5 * (ratio - 1.0))
    return u, v


def thermal_occupation(omega, temperature):
    """Bose occupation 1/(exp(omega/T) - 1); identically zero at T = 0."""
    omega = np.asarray(omega, dtype=float)
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        return np.zeros_like(omega)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(omega / temperature)


def angular_average(dimension, x):
    """Average of cos(q.r) over directions of q at fixed |q||r| = x."""
    if dimension == 1:
        return np.cos(x)
    if dimension == 2:
        return j0(x)
    if dimension == 3:
        return sinc(x)
    raise ValueError(f"unsupported dimension {dimension}")


@dataclass(frozen=True)
class PhononGrid:
    nodes: np.ndarray
    weights: np.ndarray
    omega: np.ndarray
    epsilon: np.ndarray
    occupation: np.ndarray
    coupling: np.ndarray      # |M|^2 density per unit q, radial, angle-integrated
    q_max: float
    dimension: int
    temperature: float
    sigma_over_xi: float
    strength: float           # (kappa/g)^2 (d/xi)^D
    s_max: float = 0.0        # longest time (hbar/gn0) the panels resolve
    info: dict = field(default_factory=dict, compare=False)

    @property
    def size(self):
        return self.nodes.size

    def level_shift(self):
        """E_p (gn0 units) as the grid integral of omega * m."""
        return float(np.sum(self.weights * self.omega * self.coupling))

    def with_temperature(self, temperature):
        occ = thermal_occupation(self.omega, temperature)
        return replace(self, temperature=float(temperature), occupation=occ)


def _base_edges(q_max, panels):
    # quadratic map clusters panels near q = 0 where 1/(q^2 + 4) varies
    u = np.linspace(0.0, 1.0, panels + 1)
    return q_max * u * u


def _phase_edges(q_max, s_max, phase_span):
    """Edges at equal increments of omega(q) * s_max."""
    _, w_max = dispersion(q_max)
    n = int(np.ceil(w_max * s_max / phase_span))
    if n < 1:
        return np.array([0.0, q_max])
    omegas = np.linspace(0.0, w_max, n + 1)
    return inverse_dispersion(omegas)


def build_phonon_grid(scales, sigma_over_xi, kappa_over_g, temperature=0.0, tol=1e-8,
                      dimension=1, max_nodes=16384, s_max=0.0, order=8,
                      phase_span=2 * np.pi, refine=1):
    """Composite Gauss-Legendre grid over (0, q_max] carrying the mode data.

    The panel count is doubled until E_p changes by less than ``tol``
    (relative).  When ``s_max`` > 0 extra panel edges keep omega(q)*s within
    ``phase_span`` per panel so that time-dependent phases up to ``s_max``
    (hbar/gn0) are resolved.  ``refine`` multiplies the final panel density
    (used for grid-doubling checks).
    """
    from .coupling import coupling_density, coupling_strength

    if sigma_over_xi <= 0:
        raise ValueError("sigma must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    q_max = CUTOFF_SIGMAS / sigma_over_xi
    strength = coupling_strength(kappa_over_g, scales.d_over_xi, dimension)

    def level_shift(edges):
        q, w = composite_gauss_legendre(edges, order)
        m = coupling_density(q, sigma_over_xi, strength, dimension)
        _, om = dispersion(q)
        return float(np.sum(w * om * m))

    panels = 16
    prev = level_shift(_base_edges(q_max, panels))
    history = [(panels * order, prev)]
    while True:
        panels *= 2
        if panels * order > max_nodes:
            raise ConvergenceError(
                f"E_p not converged to {tol:g} within {max_nodes} nodes (history {history})"
            )
        cur = level_shift(_base_edges(q_max, panels))
        history.append((panels * order, cur))
        scale = max(abs(cur), np.finfo(float).tiny)
        if abs(cur - prev) <= tol * scale or cur == prev:
            break
        prev = cur
    if refine < 1:
        raise ValueError("refine must be >= 1")
    edges = _base_edges(q_max, panels * refine)
    if s_max > 0:
        edges = merge_edges(edges, _phase_edges(q_max, s_max, phase_span / refine))
    q, w = composite_gauss_legendre(edges, order)
    eps, om = dispersion(q)
    m = coupling_density(q, sigma_over_xi, strength, dimension)
    return PhononGrid(
        nodes=q, weights=w, omega=om, epsilon=eps,
        occupation=thermal_occupation(om, temperature),
        coupling=m, q_max=q_max, dimension=dimension,
        temperature=float(temperature), sigma_over_xi=float(sigma_over_xi),
        strength=strength, s_max=float(s_max),
        info={"base_panels": panels, "order": order, "refine": refine,
              "convergence": history},
    )


def write_grid_csv(grid: PhononGrid, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["q", "epsilon", "omega", "weight", "N", "m"])
        for row in zip(grid.nodes, grid.epsilon, grid.omega, grid.weights,
                       grid.occupation, grid.coupling):
            out.writerow([repr(float(v)) for v in row])
