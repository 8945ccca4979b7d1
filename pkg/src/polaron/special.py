"""Special functions used by the coupling integrals.

Thin wrappers around :mod:`scipy.special` plus the exponentially scaled
exponential integral, which scipy does not provide and which is needed for
the 2D level shift at very wide Wannier states.
"""
import numpy as np
from scipy import special as _sp

erfc = _sp.erfc
erfcx = _sp.erfcx          # exp(x^2) erfc(x)
k0 = _sp.k0
j0 = _sp.j0
iv = _sp.iv
exp1 = _sp.exp1

_E1_SWITCH = 40.0
_E1_TERMS = 40


def sinc(x):
    """Spherical Bessel j0(x) = sin(x)/x with j0(0) = 1."""
    return np.sinc(np.asarray(x) / np.pi)


def exp_e1(x):
    """exp(x) * E1(x) for x > 0, i.e. -exp(x) Ei(-x), without overflow.

    Below the switch point the direct product is exact enough; above it the
    continued fraction 1/(x+1- 1/(x+3- 4/(x+5- ...))) is evaluated backwards.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("exp_e1 requires x > 0")
    out = np.empty_like(x)
    small = x < _E1_SWITCH
    out[small] = np.exp(x[small]) * _sp.exp1(x[small])
    xl = x[~small]
    tail = np.zeros_like(xl)
    for k in range(_E1_TERMS, 0, -1):
        tail = k * k / (xl + 2 * k + 1 - tail)
    out[~small] = 1.0 / (xl + 1 - tail)
    return out if out.ndim else float(out)
