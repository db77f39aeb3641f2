"""Atomic species data, dipole Clebsch-Gordan coefficients, and the spherical
Bessel pairs the interaction kernel is built from.

Everything here is a pure function; the species record is a frozen dataclass
loaded from a key-value text file so other alkalis can be added without code
changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "AtomSpecies",
    "AngularMomentumKet",
    "clebsch_gordan",
    "spherical_bessel_pair",
    "legendre_p2",
    "load_species",
    "cesium_d2",
]


def _check_half_integer(value: float, name: str) -> int:
    """Return 2*value as an int, rejecting anything off the half-integer grid."""
    twice = 2.0 * value
    rounded = round(twice)
    if abs(twice - rounded) > 1e-9:
        raise ValueError(f"{name} must be an integer or half-integer, got {value!r}")
    return int(rounded)


@dataclass(frozen=True)
class AtomSpecies:
    """Constants of one alkali D2 transition.

    mass kg, lambda_res m, gamma_natural rad/s, i_sat W/m^2; hyperfine labels
    f_down/f_up = nuclear_spin -/+ 1/2 and f_max_excited = nuclear_spin + 3/2.
    """

    mass: float
    lambda_res: float
    gamma_natural: float
    i_sat: float
    nuclear_spin: float
    f_up: float
    f_down: float
    f_max_excited: float

    def __post_init__(self) -> None:
        for name in ("mass", "lambda_res", "gamma_natural", "i_sat"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        ti = _check_half_integer(self.nuclear_spin, "nuclear_spin")
        if ti <= 0:
            raise ValueError("nuclear_spin must be positive")
        if self.f_up - self.f_down != 1:
            raise ValueError("f_up - f_down must equal 1")
        if self.f_max_excited != self.f_up + 1:
            raise ValueError("f_max_excited must equal f_up + 1")
        if self.f_up != self.nuclear_spin + 0.5:
            raise ValueError("f_up must equal nuclear_spin + 1/2")

    @property
    def wave_number(self) -> float:
        """Resonant wave number k = 2 pi / lambda_res, rad/m."""
        return 2.0 * math.pi / self.lambda_res

    @property
    def pi_coupling(self) -> float:
        """Clebsch-Gordan amplitude of the pi transition from the upper
        hyperfine level at |M| = 1 to the strongest excited manifold.

        Its fourth power scales every laser-induced pair quantity (shift,
        cooperative decay, single-atom scattering in a logical-1 state).
        """
        return clebsch_gordan(self.f_up, 1, 0, self.f_max_excited)


@dataclass(frozen=True)
class AngularMomentumKet:
    """|f, m_f> label; both on the same half-integer grid."""

    f: float
    m_f: float

    def __post_init__(self) -> None:
        tf = _check_half_integer(self.f, "f")
        tm = _check_half_integer(self.m_f, "m_f")
        if tf < 0:
            raise ValueError("f must be nonnegative")
        if abs(tm) > tf:
            raise ValueError(f"|m_f| <= f required, got f={self.f}, m_f={self.m_f}")
        if (tf - tm) % 2:
            raise ValueError("m_f must differ from f by an integer")


def _half_factorial(twice: int) -> int:
    # factorial of twice/2; caller guarantees twice is even and >= 0
    return math.factorial(twice // 2)


def _cg_signed_square(tj1: int, tm1: int, tj2: int, tm2: int, tj: int, tm: int) -> Fraction:
    """Signed square of <j1 m1; j2 m2 | j m> as an exact rational.

    All angular momenta are passed doubled so half-integers stay integral.
    Racah's closed sum; every factorial argument is a plain integer whenever
    the selection rules hold, and the Condon-Shortley phase is carried by the
    sign of the alternating sum.
    """
    if tm1 + tm2 != tm:
        return Fraction(0)
    if tj < abs(tj1 - tj2) or tj > tj1 + tj2:
        return Fraction(0)
    if (tj1 + tj2 - tj) % 2:
        return Fraction(0)
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm) > tj:
        return Fraction(0)

    kmin = max(0, -(tj - tj2 + tm1) // 2, -(tj - tj1 - tm2) // 2)
    kmax = min((tj1 + tj2 - tj) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    if kmin > kmax:
        return Fraction(0)

    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        denom = (
            math.factorial(k)
            * _half_factorial(tj1 + tj2 - tj - 2 * k)
            * _half_factorial(tj1 - tm1 - 2 * k)
            * _half_factorial(tj2 + tm2 - 2 * k)
            * _half_factorial(tj - tj2 + tm1 + 2 * k)
            * _half_factorial(tj - tj1 - tm2 + 2 * k)
        )
        total += Fraction(-1 if k % 2 else 1, denom)
    if total == 0:
        return Fraction(0)

    prefactor = (
        Fraction(tj + 1)
        * Fraction(
            _half_factorial(tj1 + tj2 - tj)
            * _half_factorial(tj1 - tj2 + tj)
            * _half_factorial(-tj1 + tj2 + tj),
            _half_factorial(tj1 + tj2 + tj + 2),
        )
        * _half_factorial(tj1 - tm1)
        * _half_factorial(tj1 + tm1)
        * _half_factorial(tj2 - tm2)
        * _half_factorial(tj2 + tm2)
        * _half_factorial(tj - tm)
        * _half_factorial(tj + tm)
    )
    square = prefactor * total * total
    return square if total > 0 else -square


def clebsch_gordan(f: float, m_f: float, q: int, f_prime: float) -> float:
    """Dipole coupling coefficient <f, m_f; 1, q | f', m_f + q>.

    q in {-1, 0, +1} is the spherical polarization index. Exact rational
    arithmetic internally; float only at the boundary. Selection-rule
    failures (m' out of range, triangle violations such as f = f' = 0)
    return 0; malformed inputs raise.
    """
    tf = _check_half_integer(f, "f")
    tfp = _check_half_integer(f_prime, "f_prime")
    tm = _check_half_integer(m_f, "m_f")
    if tf < 0 or tfp < 0:
        raise ValueError("f and f_prime must be nonnegative")
    if q not in (-1, 0, 1):
        raise ValueError(f"q must be -1, 0, or +1, got {q!r}")
    if (tf - tm) % 2:
        raise ValueError("m_f must differ from f by an integer")
    if abs(tm) > tf:
        raise ValueError(f"|m_f| <= f required, got f={f}, m_f={m_f}")
    if (tf - tfp) % 2:
        raise ValueError("f and f_prime must differ by an integer")
    if abs(tf - tfp) > 2:
        raise ValueError("dipole coupling links f_prime to f-1, f, f+1 only")

    signed_square = _cg_signed_square(tf, tm, 2, 2 * q, tfp, tm + 2 * q)
    if signed_square == 0:
        return 0.0
    magnitude = math.sqrt(abs(signed_square.numerator) / signed_square.denominator)
    return magnitude if signed_square > 0 else -magnitude


# ---------------------------------------------------------------------------
# spherical Bessel pairs

# Below this the trigonometric closed forms for j1, j2 lose digits to
# cancellation (the j2 form is ~x^2/15 built from O(1/x^3) pieces); the
# alternating series is exact to well under 1e-15 relative here.
_SERIES_CROSSOVER = 0.25
_SERIES_TERMS = 12


def _j_series(n: int, x):
    # j_n(x) = x^n/(2n+1)!! * sum_k (-x^2/2)^k / (k! (2n+3)(2n+5)...(2n+2k+1));
    # scalar or ndarray; no in-place ops so array arguments never alias
    double_fact = 1.0
    for m in range(1, 2 * n + 2, 2):
        double_fact *= m
    term = x**n / double_fact
    total = term
    half_x2 = -0.5 * x * x
    for k in range(1, _SERIES_TERMS):
        term = term * (half_x2 / (k * (2 * n + 2 * k + 1)))
        total = total + term
    return total


def spherical_bessel_pair(n: int, x: float) -> tuple[float, float]:
    """(j_n(x), y_n(x)) for n in {0, 1, 2}, x > 0.

    Closed trigonometric forms, with a series branch for j1, j2 below
    x = 0.25 where the closed forms cancel catastrophically. Relative
    accuracy better than 1e-10 over x in [1e-6, 1e3]. The y_n forms have
    no small-x cancellation (their terms share a sign), so they keep the
    closed form everywhere.
    """
    if x <= 0:
        raise ValueError(f"x must be positive, got {x!r}")
    if n not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1, or 2, got {n!r}")
    s, c = math.sin(x), math.cos(x)
    inv = 1.0 / x
    if n == 0:
        return s * inv, -c * inv
    inv2 = inv * inv
    if n == 1:
        y1 = -c * inv2 - s * inv
        j1 = _j_series(1, x) if x < _SERIES_CROSSOVER else s * inv2 - c * inv
        return j1, y1
    inv3 = inv2 * inv
    y2 = (-3.0 * inv3 + inv) * c - 3.0 * inv2 * s
    j2 = _j_series(2, x) if x < _SERIES_CROSSOVER else (3.0 * inv3 - inv) * s - 3.0 * inv2 * c
    return j2, y2


def legendre_p2(mu):
    """P2(mu) = (3 mu^2 - 1)/2 on [-1, 1]; scalar or array."""
    arr = np.asarray(mu, dtype=float)
    if np.any(np.abs(arr) > 1.0 + 1e-12):
        raise ValueError("legendre_p2 argument must lie in [-1, 1]")
    out = 0.5 * (3.0 * arr * arr - 1.0)
    return float(out) if np.ndim(mu) == 0 else out


# ---------------------------------------------------------------------------
# species records

_FIELD_TYPES = {
    "mass": float,
    "lambda_res": float,
    "gamma_natural": float,
    "i_sat": float,
    "nuclear_spin": float,
    "f_up": float,
    "f_down": float,
    "f_max_excited": float,
}


def load_species(path: str | Path) -> AtomSpecies:
    """Parse a one-constant-per-line key-value species file (SI units).

    Lines look like ``mass = 2.2069e-25``; ``#`` starts a comment. All eight
    fields of AtomSpecies are required; unknown keys are rejected so typos
    fail loudly.
    """
    values: dict[str, float] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown species field {key!r}")
        if key in values:
            raise ValueError(f"{path}:{lineno}: duplicate field {key!r}")
        try:
            values[key] = _FIELD_TYPES[key](value.strip())
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {value.strip()!r}") from exc
    missing = sorted(set(_FIELD_TYPES) - set(values))
    if missing:
        raise ValueError(f"{path}: missing species fields: {', '.join(missing)}")
    return AtomSpecies(**values)


def cesium_d2() -> AtomSpecies:
    """The packaged Cs D2 record (852 nm, I = 7/2, F = 3/4, F'_max = 5)."""
    ref = resources.files(__package__).joinpath("data/cesium_d2.txt")
    with resources.as_file(ref) as path:
        return load_species(path)
