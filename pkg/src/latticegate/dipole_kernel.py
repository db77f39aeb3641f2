"""Pointwise dipole-dipole coupling functions for pi-polarized induced dipoles.

A pair of driven dipoles aligned with z and separated by r at polar angle
theta_r exchanges photons through the retarded field. With the outgoing
spherical-wave convention the dispersive/reactive part f and the cooperative
radiative part g of that coupling are

    f + i g = i h0(kr) + P2(cos theta_r) * i h2(kr),      h_n = j_n + i y_n,

i.e.  f = -y0(kr) - P2 * y2(kr)  and  g = j0(kr) + P2 * j2(kr).

Near field: f -> +3 P2(cos theta_r)/(kr)^3 and g -> 1 (fully cooperative).
The level-shift matrix element multiplies this pair by an overall minus sign
(see gate.dd_matrix_element), so the head-to-tail (theta_r = 0) near-field
shift comes out attractive.

The pair is always computed together: one sin/cos evaluation feeds all four
radial pieces, and the averaging integrator calls this in its hot loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atomics import _SERIES_CROSSOVER, _j_series, legendre_p2

__all__ = ["RelativePosition", "fg", "fg_smallkr_asymptote", "radial_parts", "NEAR_FIELD_WINDOW"]

# fg_smallkr_asymptote is only meaningful where the 1/(kr)^3 term dominates
NEAR_FIELD_WINDOW = 0.05


@dataclass(frozen=True)
class RelativePosition:
    """Dimensionless separation kr > 0 and cos of the angle to the dipole axis."""

    kr: float
    cos_theta: float

    def __post_init__(self) -> None:
        if not self.kr > 0:
            raise ValueError(f"kr must be positive, got {self.kr!r}")
        if abs(self.cos_theta) > 1.0:
            raise ValueError(f"|cos_theta| <= 1 required, got {self.cos_theta!r}")


def radial_parts(kr):
    """Radial factors (f_mono, f_tensor, g_mono, g_tensor) at kr.

    f(kr, mu) = f_mono + P2(mu) * f_tensor and likewise for g; the angular
    dependence is carried entirely by P2, so averaging integrators can take
    angular moments once and reuse these four numbers per radius.

    Accepts a scalar or an ndarray; rejects kr <= 0. Uses the closed
    trigonometric forms with the small-argument series branch for j2 (the
    y-pieces are hierarchical at small kr and never cancel).
    """
    x = np.asarray(kr, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x <= 0):
        raise ValueError("kr must be positive")

    s, c = np.sin(x), np.cos(x)
    inv = 1.0 / x
    inv2 = inv * inv
    inv3 = inv2 * inv

    j0 = s * inv
    y0 = -c * inv
    y2 = (-3.0 * inv3 + inv) * c - 3.0 * inv2 * s
    j2 = (3.0 * inv3 - inv) * s - 3.0 * inv2 * c
    small = x < _SERIES_CROSSOVER
    if small.any():
        j2 = j2.copy()
        j2[small] = _j_series(2, x[small])

    f_mono, f_tensor = -y0, -y2
    g_mono, g_tensor = j0, j2
    if scalar:
        return float(f_mono[0]), float(f_tensor[0]), float(g_mono[0]), float(g_tensor[0])
    return f_mono, f_tensor, g_mono, g_tensor


def fg(pos: RelativePosition) -> tuple[float, float]:
    """(f, g) at one relative position."""
    f_mono, f_tensor, g_mono, g_tensor = radial_parts(pos.kr)
    p2 = legendre_p2(pos.cos_theta)
    return f_mono + p2 * f_tensor, g_mono + p2 * g_tensor


def fg_smallkr_asymptote(pos: RelativePosition) -> tuple[float, float]:
    """Leading near-field pair (+3 P2/(kr)^3, 1); test oracle only.

    Valid (and accepted) only for kr < 0.05 where the tensor term dominates
    f to within a few percent and g is unity to 1e-3.
    """
    if not pos.kr < NEAR_FIELD_WINDOW:
        raise ValueError(
            f"fg_smallkr_asymptote needs kr < {NEAR_FIELD_WINDOW}, got {pos.kr!r}"
        )
    p2 = legendre_p2(pos.cos_theta)
    return 3.0 * p2 / pos.kr**3, 1.0
