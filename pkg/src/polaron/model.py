"""Physical parameters, derived scales and natural units.

Internally everything is measured in condensate units: lengths in the
healing length xi, energies in g*n0 and times in hbar/(g*n0).  In these
units the free-particle energy is q^2/2 and the Bogoliubov frequency is
q*sqrt(q^2 + 4)/2 for the dimensionless momentum q*xi.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants as const

from .errors import ParameterError, RegimeWarning

HBAR = const.hbar
KB = const.k
AMU = const.physical_constants["atomic mass constant"][0]

# lattice depth assumed when only the hopping is specified
DEFAULT_LATTICE_DEPTH_ER = 12.0


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs of one impurity-in-lattice + BEC system (SI where dimensional).

    ``lattice_depth`` and ``hopping`` are in units of the impurity recoil
    energy, ``temperature`` in units of the polaronic level shift E_p and
    ``tilt`` is hbar*omega_B/J.  Either ``healing_length`` or
    ``boson_coupling`` (g, in J m^D) must be given; when both are, they have
    to agree.
    """

    impurity_mass: float
    boson_mass: float
    kappa_over_g: float
    density: float
    dimension: int
    lattice_spacing: float
    lattice_depth: float = DEFAULT_LATTICE_DEPTH_ER
    hopping: float = 0.0
    temperature: float = 0.0
    tilt: float = 0.0
    healing_length: float | None = None
    boson_coupling: float | None = None

    def __post_init__(self):
        for name in ("impurity_mass", "boson_mass", "density", "lattice_spacing", "lattice_depth"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be positive, got {value!r}")
        if self.dimension not in (1, 2, 3):
            raise ParameterError(f"dimension must be 1, 2 or 3, got {self.dimension!r}")
        if self.hopping < 0:
            raise ParameterError("hopping must be non-negative")
        if self.temperature < 0:
            raise ParameterError("temperature must be non-negative")
        if self.healing_length is None and self.boson_coupling is None:
            raise ParameterError("need healing_length or boson_coupling")
        if self.healing_length is not None and self.healing_length <= 0:
            raise ParameterError("healing_length must be positive")
        if self.boson_coupling is not None:
            if self.boson_coupling <= 0:
                raise ParameterError("boson_coupling must be positive")
            xi = HBAR / np.sqrt(self.boson_mass * self.boson_coupling * self.density)
            if self.healing_length is not None and abs(xi / self.healing_length - 1) > 1e-10:
                raise ParameterError(
                    f"healing_length {self.healing_length:.6e} m inconsistent with "
                    f"hbar/sqrt(m_b g n0) = {xi:.6e} m"
                )

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedScales:
    healing_length: float      # m
    interaction_energy: float  # g n0, J
    recoil_energy: float       # impurity E_R, J
    wannier_width: float       # m
    mean_spacing: float        # n0^(-1/D), m
    sound_speed: float         # sqrt(g n0 / m_b), m/s
    time_unit: float           # hbar / (g n0), s

    @property
    def sigma_over_xi(self):
        return self.wannier_width / self.healing_length

    @property
    def d_over_xi(self):
        return self.mean_spacing / self.healing_length

    @property
    def gn0_nK(self):
        return self.interaction_energy / KB * 1e9


def wannier_width_ratio(lattice_depth_er):
    """sigma/a of the harmonic-oscillator approximation to the lowest Wannier state."""
    return lattice_depth_er ** -0.25 / np.pi


def derive_scales(params: SystemParams) -> DerivedScales:
    if params.lattice_depth < 1.0:
        raise ParameterError(
            f"lattice depth {params.lattice_depth} E_R < 1 E_R: harmonic Wannier approximation not trusted"
        )
    D = params.dimension
    if params.healing_length is not None:
        xi = params.healing_length
    else:
        xi = HBAR / np.sqrt(params.boson_mass * params.boson_coupling * params.density)
    gn0 = HBAR**2 / (params.boson_mass * xi**2)
    k_lat = np.pi / params.lattice_spacing
    e_rec = (HBAR * k_lat) ** 2 / (2 * params.impurity_mass)
    sigma = params.lattice_spacing * wannier_width_ratio(params.lattice_depth)
    return DerivedScales(
        healing_length=xi,
        interaction_energy=gn0,
        recoil_energy=e_rec,
        wannier_width=sigma,
        mean_spacing=params.density ** (-1.0 / D),
        sound_speed=np.sqrt(gn0 / params.boson_mass),
        time_unit=HBAR / gn0,
    )


def validity_alpha(params: SystemParams, scales: DerivedScales | None = None) -> float:
    """Linearization parameter (|kappa|/g) (d/xi)^D; warns when it reaches 1."""
    if scales is None:
        scales = derive_scales(params)
    alpha = abs(params.kappa_over_g) * scales.d_over_xi ** params.dimension
    if alpha >= 1:
        warnings.warn(
            f"alpha = {alpha:.3g} >= 1: linearized condensate deformation is questionable",
            RegimeWarning,
            stacklevel=2,
        )
    return alpha


def hopping_gn0(params: SystemParams, scales: DerivedScales) -> float:
    """Bare hopping J in units of g n0."""
    return params.hopping * scales.recoil_energy / scales.interaction_energy


def temperature_to_gn0(t_over_ep, ep_gn0):
    return np.asarray(t_over_ep) * ep_gn0


def temperature_to_ep(t_gn0, ep_gn0):
    return np.asarray(t_gn0) / ep_gn0


def fig3_params(**overrides) -> SystemParams:
    """41K impurity in a 1D lattice immersed in a 87Rb condensate.

    a = 395 nm, J = 2.45e-2 E_R, d = 200 nm, xi = 652 nm, kappa/g = 2.58.
    The lattice depth is not quoted alongside these numbers; 12 E_R is assumed.
    """
    base = dict(
        impurity_mass=41 * AMU,
        boson_mass=87 * AMU,
        kappa_over_g=2.58,
        density=1 / 200e-9,
        dimension=1,
        lattice_spacing=395e-9,
        lattice_depth=DEFAULT_LATTICE_DEPTH_ER,
        hopping=2.45e-2,
        healing_length=652e-9,
    )
    base.update(overrides)
    return SystemParams(**base)
