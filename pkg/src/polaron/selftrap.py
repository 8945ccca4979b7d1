"""Gaussian variational estimate of impurity self-trapping in a homogeneous condensate.

For a free impurity of width sigma the energy in units of gn0 is

    E(sigma) = (m_b/m_a) [ (D/4) (xi/sigma)^2 - alpha' G(0, sigma) ]

with alpha' = (kappa/g)^2 (d/xi)^D m_a/m_b.  Functions named ``reduced_*``
work with the bracket only.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .coupling import g_function_closed
from .model import SystemParams, derive_scales

SCAN_POINTS = 400
SIGMA_MIN = 0.05
SIGMA_MAX = {1: 1e3, 2: 1e5, 3: 1e3}
BRACKETS = {2: (1.0, 20.0), 3: (10.0, 100.0)}
TIGHT_TRAPPING_RATIO = 5.0


def reduced_energy(sigma_over_xi, alpha_prime, dimension):
    s = np.asarray(sigma_over_xi, dtype=float)
    if np.any(s <= 0):
        raise ValueError("sigma must be positive")
    return 0.25 * dimension / (s * s) - alpha_prime * g_function_closed(s, dimension)


def alpha_prime(params: SystemParams) -> float:
    scales = derive_scales(params)
    alpha = abs(params.kappa_over_g) * scales.d_over_xi ** params.dimension
    return abs(params.kappa_over_g) * params.impurity_mass / params.boson_mass * alpha


def variational_energy(sigma_over_xi, params: SystemParams):
    """E(sigma) in gn0 units."""
    ratio = params.boson_mass / params.impurity_mass
    return ratio * reduced_energy(sigma_over_xi, alpha_prime(params), params.dimension)


@dataclass
class SelfTrapResult:
    bound: bool
    sigma_star: float | None
    energy: float | None          # reduced units (times m_b/m_a for gn0)
    alpha_prime: float
    dimension: int
    metastable: bool = False
    flags: list = field(default_factory=list)
    scan: tuple = ()              # (sigma grid, energies)


def minimize_energy(alpha_p, dimension, n_points=SCAN_POINTS, sigma_max=None):
    """Locate a finite-width minimum of the reduced variational energy.

    The impurity counts as bound when the log-spaced scan has an interior
    local minimum; the lowest one is refined by golden-section search in
    log sigma.  ``metastable`` marks minima lying above the scanned tail.
    """
    if alpha_p < 0:
        raise ValueError("alpha' must be non-negative")
    if sigma_max is None:
        sigma_max = SIGMA_MAX[dimension]
    sig = np.geomspace(SIGMA_MIN, sigma_max, n_points)
    e = reduced_energy(sig, alpha_p, dimension)
    interior = np.nonzero((e[1:-1] <= e[:-2]) & (e[1:-1] < e[2:]))[0] + 1
    res = SelfTrapResult(False, None, None, float(alpha_p), dimension, scan=(sig, e))
    if np.argmin(e) in (0, n_points - 1):
        res.flags.append("scan minimum at an endpoint")
    if interior.size == 0:
        return res
    i = interior[np.argmin(e[interior])]

    def f(x):
        return float(reduced_energy(np.exp(x), alpha_p, dimension))

    x = np.log(sig)
    opt = minimize_scalar(f, bracket=(x[i - 1], x[i], x[i + 1]), method="golden", tol=1e-10)
    res.bound = True
    res.sigma_star = float(np.exp(opt.x))
    res.energy = float(opt.fun)
    tail = e[i + 1:].min() if i + 1 < n_points else np.inf
    res.metastable = bool(res.energy > tail)
    return res


def self_trap(params: SystemParams) -> SelfTrapResult:
    """Minimization with the energy converted to gn0."""
    res = minimize_energy(alpha_prime(params), params.dimension)
    ratio = params.boson_mass / params.impurity_mass
    if res.bound:
        res.energy *= ratio
    res.scan = (res.scan[0], res.scan[1] * ratio)
    return res


@dataclass
class CriticalCoupling:
    alpha_c: float
    sigma_at_threshold: float | None
    bracket: tuple
    iterations: int
    note: str = ""


def critical_alpha(dimension, rel_tol=1e-3, bracket=None):
    """Smallest alpha' giving a bound state, by bisection on the bound predicate.

    ``sigma_at_threshold`` is the optimal width at the upper end of the final
    bracket, i.e. at the weakest coupling known to bind.
    """
    if dimension == 1:
        return CriticalCoupling(0.0, None, (0.0, 0.0), 0, "1D binds for any alpha' > 0")
    lo, hi = bracket if bracket is not None else BRACKETS[dimension]
    if minimize_energy(lo, dimension).bound or not minimize_energy(hi, dimension).bound:
        raise ValueError(f"bracket ({lo}, {hi}) does not straddle the threshold")
    it = 0
    while hi - lo >= rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if minimize_energy(mid, dimension).bound:
            hi = mid
        else:
            lo = mid
        it += 1
    top = minimize_energy(hi, dimension)
    return CriticalCoupling(0.5 * (lo + hi), top.sigma_star, (lo, hi), it)


def asymptotic_width_1d(alpha_p):
    """Weak-coupling width sqrt(2 pi)/alpha' of the 1D self-trapped state."""
    return np.sqrt(2 * np.pi) / alpha_p


def trapping_report(params: SystemParams):
    """Compare the free self-trapped width with the lattice Wannier width."""
    scales = derive_scales(params)
    res = self_trap(params)
    lattice = scales.sigma_over_xi
    ratio = res.sigma_star / lattice if res.bound else np.inf
    return {
        "alpha_prime": res.alpha_prime,
        "bound": res.bound,
        "sigma_self_over_xi": res.sigma_star,
        "sigma_lattice_over_xi": lattice,
        "ratio": ratio,
        "tight_trapping_dominates": bool(ratio > TIGHT_TRAPPING_RATIO),
    }
