"""Independent reference routes used by the tests.

Everything here deliberately avoids the production code paths: special
functions come from mpmath/scipy.special, angular-momentum algebra from
sympy, and averages from generic adaptive integration, so agreement is a
genuine cross-check rather than the same bug evaluated twice.
"""

import math

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import spherical_jn, spherical_yn
from sympy import Rational, S
from sympy.physics.quantum.cg import CG

mpmath.mp.dps = 40


def mp_spherical_pair(n: int, x: float) -> tuple[float, float]:
    """(j_n, y_n) at 40 significant digits via half-integer cylinder Bessels."""
    xm = mpmath.mpf(x)
    factor = mpmath.sqrt(mpmath.pi / (2 * xm))
    j = factor * mpmath.besselj(n + mpmath.mpf("0.5"), xm)
    y = factor * mpmath.bessely(n + mpmath.mpf("0.5"), xm)
    return float(j), float(y)


def sympy_cg(f: float, m_f: float, q: int, f_prime: float) -> float:
    """<f m_f; 1 q | f' m_f+q> by symbolic evaluation."""
    val = CG(
        Rational(f).limit_denominator(2),
        Rational(m_f).limit_denominator(2),
        S(1),
        S(q),
        Rational(f_prime).limit_denominator(2),
        Rational(m_f + q).limit_denominator(2),
    ).doit()
    return float(val)


def kernel_f(x: float, mu: float) -> float:
    """Interaction functions straight from scipy.special."""
    p2 = 0.5 * (3.0 * mu * mu - 1.0)
    return -spherical_yn(0, x) - p2 * spherical_yn(2, x)


def kernel_g(x: float, mu: float) -> float:
    p2 = 0.5 * (3.0 * mu * mu - 1.0)
    return spherical_jn(0, x) + p2 * spherical_jn(2, x)


def iso_mean_fg_1d(eta: float) -> tuple[float, float]:
    """Isotropic-trap averages by plain 1D radial quadrature.

    With equal widths the angular moment of P2 vanishes, leaving radial
    integrals of the monopole terms against the relative Gaussian.
    """
    sigma = math.sqrt(2.0) * eta
    norm = (2.0 * math.pi) ** -1.5 / sigma**3

    def radial(which):
        def integrand(x):
            weight = 4.0 * math.pi * norm * x * x * math.exp(-(x * x) / (2.0 * sigma**2))
            return weight * which(x)

        value, _ = integrate.quad(integrand, 1e-8, 20.0 * sigma, limit=300,
                                  epsabs=1e-13, epsrel=1e-12)
        return value

    mean_f = radial(lambda x: -spherical_yn(0, x))
    mean_g = radial(lambda x: spherical_jn(0, x))
    return mean_f, mean_g


def static_tensor_mean_2d(eta_perp: float, eta_par: float) -> float:
    """<P2(cos theta) / x^3> by direct nested quadrature, no closed forms."""
    a = math.sqrt(2.0) * eta_perp
    c = math.sqrt(2.0) * eta_par
    norm = (2.0 * math.pi) ** -1.5 / (a * a * c)

    def angular_moment(x):
        def f(mu):
            p2 = 0.5 * (3.0 * mu * mu - 1.0)
            s = (1.0 - mu * mu) / (2.0 * a * a) + mu * mu / (2.0 * c * c)
            return p2 * math.exp(-(x * x) * s)

        value, _ = integrate.quad(f, -1.0, 1.0, limit=200, epsabs=1e-14, epsrel=1e-13)
        return value

    def radial(x):
        # P2/x^3 against x^2 * density: the angular moment supplies x^2
        # suppression at the origin, leaving an integrable 1/x head
        return 2.0 * math.pi * norm * angular_moment(x) / x

    upper = 12.0 * max(a, c)
    value, _ = integrate.quad(radial, 1e-10, upper, limit=400, epsabs=1e-13, epsrel=1e-11)
    return value


def rabi_flip_probability(rabi: float, detuning: float, duration: float) -> float:
    """Two-level flip probability for a square decay-free pulse."""
    w = math.hypot(rabi, detuning)
    return (rabi / w) ** 2 * math.sin(0.5 * w * duration) ** 2


def mixture_row(gate_row5: np.ndarray, unpaired_row5: np.ndarray, alpha: float) -> np.ndarray:
    """Expected measured fractions of the mixed stage."""
    return alpha * np.asarray(gate_row5) + (1.0 - alpha) * np.asarray(unpaired_row5)
