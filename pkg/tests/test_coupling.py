import mpmath
import numpy as np
import pytest
from scipy.special import erfc

from polaron.bogoliubov import build_phonon_grid
from polaron.coupling import (build_coupling_table, coupling_density, deformation_profile,
                              effective_hopping, form_factor, g_function, g_function_closed,
                              g_function_quadrature, green_function, hopping_exponent,
                              interaction_potential, interaction_potential_grid, polaron_band,
                              polaronic_shift, system_constants)
from polaron.model import fig3_params


def g_1d_exact(r, s):
    """1D smeared Green's function: Gaussian of variance 2 s^2 folded with exp(-2|r|)/2."""
    r = abs(r)
    a = np.sqrt(2) * s
    return 0.25 * np.exp(2 * s * s) * (np.exp(-2 * r) * erfc((2 * s * s - r) / a)
                                       + np.exp(2 * r) * erfc((2 * s * s + r) / a))


def test_form_factor():
    assert form_factor(0.0, 0.3) == 1
    assert abs(form_factor(2.0, 1.0)) ** 2 == pytest.approx(np.exp(-2), rel=1e-14)
    q = np.array([0.7, -0.2])
    f0 = form_factor(q, 0.4, r=np.array([1.0, 2.0]))
    f1 = form_factor(q, 0.4, r=np.array([1.5, 2.0]))
    assert abs(f0) == pytest.approx(abs(f1))
    assert f1 / f0 == pytest.approx(np.exp(1j * 0.7 * 0.5))


def test_coupling_density_zero_without_coupling():
    assert np.all(coupling_density(np.array([0.1, 1.0]), 0.1, 0.0) == 0)
    with pytest.raises(ValueError):
        coupling_density(0.0, 0.1, 1.0)


def test_coupling_density_slopes():
    lo = np.geomspace(1e-3, 1e-2, 10)
    slope_lo = np.polyfit(np.log(lo), np.log(lo * coupling_density(lo, 0.01, 1.0)), 1)[0]
    assert abs(slope_lo) < 1e-4
    hi = np.geomspace(10, 20, 10)
    slope_hi = np.polyfit(np.log(hi), np.log(coupling_density(hi, 0.001, 1.0)), 1)[0]
    assert slope_hi == pytest.approx(-4, abs=0.1)
    # exact local slope of q^-1 (q^2+4)^-3/2 at the geometric centre of the window
    qc = np.sqrt(200.0)
    assert slope_hi == pytest.approx(-1 - 3 * qc**2 / (qc**2 + 4), abs=5e-3)


def test_green_function_values():
    assert green_function(0.0, 1) == 0.5
    assert green_function(1.0, 3) == pytest.approx(np.exp(-2) / (2 * np.pi), rel=1e-14)
    assert green_function(1.0, 3) == pytest.approx(0.021540, abs=1e-6)
    for D in (2, 3):
        with pytest.raises(ValueError):
            green_function(0.0, D)


@pytest.mark.parametrize("D", [1, 2, 3])
def test_green_function_falls_off_exponentially(D):
    assert green_function(2.0, D) / green_function(1.0, D) < np.exp(-2) * 1.01


def test_g_closed_form_examples():
    assert g_function(0.0, 0.1, 1) == pytest.approx(0.4293, abs=1e-4)
    assert g_function(0.0, 0.1, 1) == pytest.approx(g_1d_exact(0.0, 0.1), rel=1e-14)
    assert g_function(0.0, 1e-9, 1) == pytest.approx(0.5, abs=1e-8)
    assert g_function(1.0, 0.0, 3) == pytest.approx(green_function(1.0, 3))
    for D in (2, 3):
        with pytest.raises(ValueError):
            g_function(0.0, 0.0, D)


@pytest.mark.parametrize("D", [1, 2, 3])
@pytest.mark.parametrize("s", [0.05, 0.1, 0.5, 1.0])
def test_g_closed_vs_quadrature(D, s):
    assert abs(g_function_closed(s, D) - g_function_quadrature(0.0, s, D)) < 1e-6


@pytest.mark.parametrize("r", [0.3, 0.6058, 1.5, 4.0])
@pytest.mark.parametrize("s", [0.05, 0.1036, 0.7])
def test_g_1d_against_erfc_convolution(r, s):
    assert g_function(r, s, 1) == pytest.approx(g_1d_exact(r, s), rel=1e-9)


@pytest.mark.parametrize("D", [2, 3])
def test_g_closed_form_against_arbitrary_precision(D):
    s = 0.3
    z = np.sqrt(2) * s
    if D == 2:
        ref = -mpmath.exp(z * z) * mpmath.ei(-z * z) / (2 * mpmath.pi)
    else:
        ref = (1 / (mpmath.sqrt(mpmath.pi) * z) - mpmath.exp(z * z) * mpmath.erfc(z)) / mpmath.pi
    assert g_function_closed(s, D) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize("D", [1, 2, 3])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_g_point_limit(D, r):
    assert g_function(r, 0.01, D) == pytest.approx(float(green_function(r, D)), rel=1e-3)


def test_g_3d_small_sigma_example():
    assert abs(g_function(1.0, 0.01, 3) - 0.021540) < 1e-4


def test_interaction_potential_properties(fig3):
    r = np.linspace(0, 3, 13)
    v = interaction_potential(r, fig3.sigma_over_xi, fig3.strength)
    assert v[0] == pytest.approx(2 * fig3.level_shift, rel=1e-14)
    assert np.all(np.diff(v) < 0)
    assert np.allclose(interaction_potential(-r, fig3.sigma_over_xi, fig3.strength), v)
    assert np.all(interaction_potential(r, fig3.sigma_over_xi, 0.0) == 0)


def test_interaction_ratio_by_quadrature(fig3):
    a = fig3.a_over_xi
    v = interaction_potential(np.array([0.0, a]), fig3.sigma_over_xi, fig3.strength)
    ratio = g_function_quadrature(a, fig3.sigma_over_xi) / g_function_quadrature(0.0, fig3.sigma_over_xi)
    assert v[1] / v[0] == pytest.approx(ratio, rel=1e-8)


def test_potential_two_routes_agree(fig3):
    grid = build_phonon_grid(fig3.scales, fig3.sigma_over_xi, 2.58, s_max=40.0)
    r = np.array([0, 1, 2]) * fig3.a_over_xi
    direct = interaction_potential_grid(r, grid)
    closed = interaction_potential(r, fig3.sigma_over_xi, fig3.strength)
    assert np.allclose(direct, closed, rtol=1e-2)


def test_level_shift_reference_value():
    e = polaronic_shift(fig3_params())
    assert 7.5 <= e.nK <= 12.5
    assert polaronic_shift(fig3_params(kappa_over_g=0.0)).gn0 == 0


def test_level_shift_increases_as_sigma_shrinks():
    s = np.linspace(0.05, 0.5, 20)
    assert np.all(np.diff(g_function_closed(s, 1)) < 0)


def test_effective_hopping_temperature_dependence(fig3):
    values = []
    for t in (0, 5, 15):
        grid = build_phonon_grid(fig3.scales, fig3.sigma_over_xi, 2.58, fig3.temperature_gn0(t))
        values.append(effective_hopping(grid, fig3.a_over_xi))
    assert 0 < values[2] < values[1] < values[0] < 1


def test_effective_hopping_uncoupled(fig3):
    grid = build_phonon_grid(fig3.scales, fig3.sigma_over_xi, 0.0)
    assert effective_hopping(grid, fig3.a_over_xi) == 1.0


def test_hopping_exponent_refinement(fig3):
    coarse = build_phonon_grid(fig3.scales, fig3.sigma_over_xi, 2.58)
    fine = build_phonon_grid(fig3.scales, fig3.sigma_over_xi, 2.58, refine=2)
    a = hopping_exponent(coarse, fig3.a_over_xi)
    b = hopping_exponent(fine, fig3.a_over_xi)
    assert a == pytest.approx(b, rel=1e-6)
    assert np.sum(coarse.weights * coarse.coupling * (1 - np.cos(coarse.nodes * fig3.a_over_xi))) == a


def test_hopping_exponent_thermal_decomposition(fig3):
    cold = build_phonon_grid(fig3.scales, fig3.sigma_over_xi, 2.58)
    hot = cold.with_temperature(fig3.temperature_gn0(5))
    shape = cold.weights * cold.coupling * (1 - np.cos(cold.nodes * fig3.a_over_xi))
    thermal = np.sum(shape * 2 * hot.occupation)
    assert hopping_exponent(cold, fig3.a_over_xi) == pytest.approx(
        hopping_exponent(hot, fig3.a_over_xi) - thermal, rel=1e-12)


def test_grid_and_closed_level_shift_agree(fig3):
    grid = build_phonon_grid(fig3.scales, fig3.sigma_over_xi, 2.58)
    assert grid.level_shift() == pytest.approx(fig3.level_shift, rel=1e-2)


def test_deformation_point_impurity():
    x = np.linspace(-3, 3, 61)
    prof = deformation_profile([0.0], [1.0], x, 0.01, alpha=0.8)
    ref = -0.8 * 0.5 * np.exp(-2 * np.abs(x))
    assert np.allclose(prof, ref, rtol=1e-2, atol=1e-2 * 0.4)
    far = np.abs(x) > 0.2
    assert np.allclose(prof[far], ref[far], rtol=1e-2)


def test_deformation_superposition():
    x = np.linspace(-4, 4, 41)
    both = deformation_profile([-0.6, 0.6], [1.0, 1.0], x, 0.1, alpha=0.8)
    one = deformation_profile([-0.6], [1.0], x, 0.1, alpha=0.8)
    two = deformation_profile([0.6], [1.0], x, 0.1, alpha=0.8)
    assert np.allclose(both, one + two, rtol=0, atol=1e-12)
    assert np.all(deformation_profile([0.0], [1.0], x, 0.1, alpha=0.0) == 0)


def test_deformation_3d_at_impurity_centre():
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    prof = deformation_profile(np.zeros((1, 3)), [1.0], pts, 0.1, alpha=0.5, dimension=3)
    assert np.all(np.isfinite(prof))
    assert prof[0] < prof[1] < 0


def test_polaron_band():
    assert polaron_band(0.0, 0.3) == pytest.approx(-0.6)
    assert polaron_band(np.pi, 0.3) == pytest.approx(0.6)


def test_band_narrowing_ratio(fig3):
    cold = build_coupling_table(fig3_params())
    hot = build_coupling_table(fig3_params(temperature=5.0))
    ka = np.array([0.0, np.pi])
    ratio = np.ptp(polaron_band(ka, hot.hopping_ratio)) / np.ptp(polaron_band(ka, cold.hopping_ratio))
    assert ratio == pytest.approx(hot.hopping_ratio / cold.hopping_ratio, rel=1e-14)


def test_coupling_table_invariants():
    t = build_coupling_table(fig3_params())
    assert t.level_shift > 0
    assert 0 < t.hopping_ratio < 1
    assert t.potential[0] == pytest.approx(2 * t.level_shift, rel=1e-14)
    free = build_coupling_table(fig3_params(kappa_over_g=0.0))
    assert free.level_shift == 0 and free.hopping_ratio == 1
    assert np.all(free.potential == 0)


def test_system_constants_fields(fig3):
    assert fig3.a_over_xi == pytest.approx(395 / 652)
    assert fig3.strength == pytest.approx(2.58**2 * 200 / 652)
    assert fig3.level_shift_nK == pytest.approx(polaronic_shift(fig3_params()).nK)
    assert system_constants(fig3_params(temperature=3.0)).level_shift == fig3.level_shift
