import mpmath
import numpy as np
import pytest

from polaron.quadrature import composite_gauss_legendre, gauss_legendre_integral, merge_edges
from polaron.special import erfcx, exp_e1, k0, sinc


@pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 5.0, 39.9, 40.0, 80.0, 1e3, 1e5])
def test_exp_e1_matches_arbitrary_precision(x):
    ref = float(mpmath.exp(x) * mpmath.e1(x))
    assert exp_e1(x) == pytest.approx(ref, rel=1e-12)


def test_exp_e1_rejects_nonpositive():
    with pytest.raises(ValueError):
        exp_e1(0.0)


def test_exp_e1_integral_representation():
    # e^x E1(x) = int_0^inf e^{-t} / (x + t) dt
    x = 2.5
    val = gauss_legendre_integral(lambda t: np.exp(-t) / (x + t), 0.0, 60.0, panels=200)
    assert exp_e1(x) == pytest.approx(val, rel=1e-10)


def test_k0_integral_representation():
    # K0(x) = int_0^inf exp(-x cosh t) dt
    x = 0.7
    val = gauss_legendre_integral(lambda t: np.exp(-x * np.cosh(t)), 0.0, 10.0, panels=200)
    assert k0(x) == pytest.approx(val, rel=1e-10)


def test_erfcx_large_argument():
    assert erfcx(1e4) == pytest.approx(1 / (np.sqrt(np.pi) * 1e4), rel=1e-8)


def test_sinc_at_zero_and_pi():
    assert sinc(0.0) == 1.0
    assert abs(sinc(np.pi)) < 1e-15


def test_composite_rule_integrates_polynomial_exactly():
    x, w = composite_gauss_legendre([0.0, 0.3, 1.0, 2.0], order=4)
    assert np.sum(w * x**7) == pytest.approx(2.0**8 / 8, rel=1e-13)


def test_composite_rule_rejects_unsorted_edges():
    with pytest.raises(ValueError):
        composite_gauss_legendre([0.0, 1.0, 0.5])


def test_merge_edges_drops_duplicates():
    e = merge_edges([0.0, 1.0, 2.0], [1.0, 1.5, 2.0 + 1e-15])
    assert list(e) == [0.0, 1.0, 1.5, 2.0]
