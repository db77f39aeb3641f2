"""Gaussian-averaged dipole coupling for two atoms in adjacent wells.

Two atoms in the vibrational ground states of their wells have a relative
coordinate distributed as an anisotropic Gaussian; the coherent (f) and
cooperative (g) coupling functions are averaged over that distribution. The
figure of merit

    kappa = -<f> / (1 + <g>)

compares the coherent level shift against the superradiantly broadened
linewidth of the doubly-excitable state. kappa is negative (attractive
shift) for elongated head-to-tail geometries such as the reference point
eta_perp = 0.1, eta_par = 0.2.

Deterministic path: spherical coordinates with the azimuth analytic, the
angular integral innermost (the 1/(kr)^3 tensor piece is finite only after
angular averaging at each radius), Gauss-Legendre in cos(theta), adaptive
Gauss-Kronrod panels in kr. An importance-sampled Monte Carlo estimator with
a near-field control variate provides an independent cross-check, and the
retardation-free closed form provides a second one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad, quad_vec

from .dipole_kernel import radial_parts

__all__ = [
    "TrapGeometry",
    "RelativeGaussian",
    "QuadratureSpec",
    "DipoleExpectation",
    "ConvergenceError",
    "DEFAULT_QUAD",
    "relative_distribution",
    "mean_fg",
    "mc_oracle",
    "kappa",
    "kappa_approx",
    "optimize_ratio",
    "kappa_map",
    "kappa_map_csv",
]


@dataclass(frozen=True)
class TrapGeometry:
    """Lamb-Dicke parameters of one well: eta = k * rms ground-state width.

    eta_perp applies to both transverse axes, eta_par to the axis along the
    dipole polarization. Both must lie in (0, 1]; this code assumes the deep
    Lamb-Dicke regime and rejects wider packets.
    """

    eta_perp: float
    eta_par: float

    def __post_init__(self) -> None:
        for name in ("eta_perp", "eta_par"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value!r}")

    def rms_widths(self, k: float) -> tuple[float, float]:
        """(x0, z0) in meters for wave number k."""
        return self.eta_perp / k, self.eta_par / k


@dataclass(frozen=True)
class RelativeGaussian:
    """Relative-coordinate distribution of two identical ground-state packets.

    Widths are in kr units (dimensionless): sigma = sqrt(2) * eta per axis,
    since the difference of two independent Gaussians doubles the variance.
    norm is the density prefactor (2 pi)^(-3/2) / (sigma_perp^2 * sigma_par).
    """

    sigma_perp: float
    sigma_par: float
    norm: float


def relative_distribution(geom: TrapGeometry) -> RelativeGaussian:
    sigma_perp = math.sqrt(2.0) * geom.eta_perp
    sigma_par = math.sqrt(2.0) * geom.eta_par
    norm = (2.0 * math.pi) ** -1.5 / (sigma_perp**2 * sigma_par)
    return RelativeGaussian(sigma_perp, sigma_par, norm)


@dataclass(frozen=True)
class QuadratureSpec:
    """Knobs of the deterministic averaging integrator.

    rel_tol is the target relative tolerance per radial panel; radial_rule
    selects the Gauss-Kronrod pair (15 or 21 points); angular_order the
    base Gauss-Legendre order in cos(theta), raised automatically for
    strongly anisotropic traps; eval_budget caps kernel calls before an
    explicit non-convergence report; small_kr_mode chooses between the
    linear Taylor head ("taylor") and dropping ("skip") the sub-cutoff piece
    below kr = 1e-4 * min(eta), where direct evaluation would pit y2 against
    the vanishing angular moment.
    """

    rel_tol: float = 1e-6
    angular_order: int = 64
    radial_rule: int = 21
    subdivision_limit: int = 200
    eval_budget: int = 10_000_000
    small_kr_mode: str = "taylor"

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tol <= 1e-2:
            raise ValueError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol!r}")
        if self.angular_order < 8:
            raise ValueError("angular_order must be >= 8")
        if self.radial_rule not in (15, 21):
            raise ValueError("radial_rule must be 15 or 21")
        if self.subdivision_limit < 8:
            raise ValueError("subdivision_limit must be >= 8")
        if self.eval_budget < 1:
            raise ValueError("eval_budget must be >= 1")
        if self.small_kr_mode not in ("taylor", "skip"):
            raise ValueError("small_kr_mode must be 'taylor' or 'skip'")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class DipoleExpectation:
    """<f>, <g> with absolute error estimates and the kernel call count.

    For the deterministic path the errors are quadrature estimates; for the
    Monte Carlo path they are one-sigma statistical standard errors.
    """

    mean_f: float
    mean_g: float
    err_f: float
    err_g: float
    evaluations: int

    def __post_init__(self) -> None:
        if self.err_f < 0 or self.err_g < 0:
            raise ValueError("error estimates must be nonnegative")
        if abs(self.mean_g) > 1.0 + self.err_g + 1e-9:
            raise ValueError(
                f"|mean_g| = {abs(self.mean_g)!r} exceeds 1 beyond its error estimate"
            )


class ConvergenceError(RuntimeError):
    """Raised instead of returning a silently unconverged expectation."""

    def __init__(self, message: str, partial: DipoleExpectation | None = None):
        super().__init__(message)
        self.partial = partial


class _BudgetExceeded(Exception):
    pass


def mean_fg(geom: TrapGeometry, quad_spec: QuadratureSpec = DEFAULT_QUAD) -> DipoleExpectation:
    """Deterministic quadrature of f and g against the relative Gaussian.

    Angular moments m0(x) = <exp(-x^2 s(mu))> and m2(x) = <P2(mu) ...> are
    taken by Gauss-Legendre at each radius, then the radial integrals of
    x^2 (f_mono m0 + f_tensor m2) etc. run on adaptive Gauss-Kronrod panels
    split at 0.1*min(eta), the Gaussian scale radius, and kr = 10. The upper
    cutoff is 14 relative-coordinate sigmas of the *widest* axis (the wide
    axis dominates the tail for pancake geometries).
    """
    gauss = relative_distribution(geom)
    a, c_ax = gauss.sigma_perp, gauss.sigma_par

    # A strongly anisotropic Gaussian turns exp(-x^2 s(mu)) into a narrow
    # ridge in mu at the radii that carry the integral, which a fixed-order
    # rule misses: at 20:1 aspect the base order of 64 is off by 3e-3 in
    # <g>. The required order grows linearly with aspect; one base step per
    # factor of 5 restores ~1e-9 agreement with an adaptive-angle reference
    # while leaving mild geometries (aspect <= 5) on the base rule.
    aspect = max(a, c_ax) / min(a, c_ax)
    nodes, weights = leggauss(quad_spec.angular_order * max(1, math.ceil(aspect / 5.0)))
    p2_nodes = 0.5 * (3.0 * nodes * nodes - 1.0)
    wp2 = weights * p2_nodes
    s_mu = (1.0 - nodes * nodes) / (2.0 * a * a) + nodes * nodes / (2.0 * c_ax * c_ax)

    count = 0

    def integrand(x: float) -> np.ndarray:
        nonlocal count
        count += 1
        if count > quad_spec.eval_budget:
            raise _BudgetExceeded
        f_mono, f_tensor, g_mono, g_tensor = radial_parts(x)
        envelope = np.exp(-(x * x) * s_mu)
        m0 = weights @ envelope
        m2 = wp2 @ envelope
        xx = x * x
        return np.array([xx * (f_mono * m0 + f_tensor * m2), xx * (g_mono * m0 + g_tensor * m2)])

    eta_min = min(geom.eta_perp, geom.eta_par)
    x_lo = 1e-4 * eta_min
    scale = math.sqrt(2.0 * a * a + c_ax * c_ax)
    x_hi = max(14.0 * max(a, c_ax), 2.0 * scale)
    interior = sorted({p for p in (0.1 * eta_min, scale, 10.0) if x_lo < p < x_hi})
    cuts = [x_lo, *interior, x_hi]

    rule = "gk21" if quad_spec.radial_rule == 21 else "gk15"
    total = np.zeros(2)
    err_sum = 0.0
    sum_abs = np.zeros(2)
    try:
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            value, err = quad_vec(
                integrand,
                lo,
                hi,
                epsabs=1e-12,
                epsrel=quad_spec.rel_tol,
                norm="max",
                limit=quad_spec.subdivision_limit,
                quadrature=rule,
            )
            total += value
            err_sum += err
            sum_abs += np.abs(value)
        if quad_spec.small_kr_mode == "taylor":
            # F(x) is linear in x at the origin (the angular average kills the
            # 1/x^3 and 1/x pieces), so the [0, x_lo] head is F(x_lo)*x_lo/2.
            head = integrand(x_lo) * (0.5 * x_lo)
            total += head
            sum_abs += np.abs(head)
    except _BudgetExceeded:
        raise ConvergenceError(
            f"evaluation budget {quad_spec.eval_budget} exhausted for {geom}"
        ) from None

    prefactor = 2.0 * math.pi * gauss.norm
    mean = prefactor * total
    err_abs = prefactor * err_sum
    result = DipoleExpectation(
        mean_f=float(mean[0]),
        mean_g=float(mean[1]),
        err_f=float(err_abs),
        err_g=float(err_abs),
        evaluations=count,
    )
    # achieved-error check; err_abs bounds the max-norm error of the (f, g)
    # vector, so it is compared against the larger component's
    # cancellation-aware scale. A silent bad value is worse than a loud
    # failure.
    tolerance = 10.0 * quad_spec.rel_tol * max(float(np.max(prefactor * sum_abs)), 1e-9)
    if err_abs > tolerance:
        raise ConvergenceError(
            f"quadrature error {err_abs:.3e} above tolerance for {geom} "
            f"after {count} evaluations",
            partial=result,
        )
    return result


def _tensor_static_mean(gauss: RelativeGaussian) -> float:
    """<P2(cos theta)/(kr)^3> over the relative Gaussian, closed 1D route.

    Writes P2/r^3 as half the zz second derivative of 1/r (minus its delta
    part) and uses the auxiliary-integral representation of 1/r against a
    Gaussian; what remains is one well-behaved 1D integral. Used as the
    Monte Carlo control-variate constant; kept independent of both the
    production quadrature and the closed-form branches.
    """
    a2 = 2.0 * gauss.sigma_perp**2
    c2 = 2.0 * gauss.sigma_par**2

    def aux(t: float) -> float:
        t2 = t * t
        return t2 / ((1.0 + a2 * t2) * (1.0 + c2 * t2) ** 1.5)

    integral, _ = quad(aux, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return 0.5 * (
        (4.0 * math.pi / 3.0) * gauss.norm - (4.0 / math.sqrt(math.pi)) * integral
    )


def mc_oracle(geom: TrapGeometry, samples: int, seed: int) -> DipoleExpectation:
    """Monte Carlo estimate of <f>, <g> with honest standard errors.

    Draws the relative coordinate from its Gaussian directly. The raw sample
    mean of f has infinite variance (f ~ 3 P2/(kr)^3 near the origin against
    a finite density), so the exact tensor term is subtracted sample-wise
    and its analytic average added back; the residual is ~1/(kr) near the
    origin and has finite variance. Bit-identical for a fixed seed.
    """
    samples = int(samples)
    if samples < 10_000:
        raise ValueError("mc_oracle needs at least 10^4 samples")
    gauss = relative_distribution(geom)
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((samples, 3))
    points[:, :2] *= gauss.sigma_perp
    points[:, 2] *= gauss.sigma_par
    radius = np.sqrt(np.sum(points * points, axis=1))
    radius = np.maximum(radius, 1e-300)
    mu = points[:, 2] / radius
    p2 = 0.5 * (3.0 * mu * mu - 1.0)

    f_mono, f_tensor, g_mono, g_tensor = radial_parts(radius)
    f_values = f_mono + p2 * f_tensor
    g_values = g_mono + p2 * g_tensor

    control = 3.0 * p2 / radius**3
    residual = f_values - control
    root_n = math.sqrt(samples)
    mean_f = float(residual.mean()) + 3.0 * _tensor_static_mean(gauss)
    err_f = float(residual.std(ddof=1)) / root_n
    mean_g = float(g_values.mean())
    err_g = float(g_values.std(ddof=1)) / root_n
    return DipoleExpectation(mean_f, mean_g, err_f, err_g, samples)


def kappa(geom: TrapGeometry, quad_spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Figure of merit -<f>/(1 + <g>); propagates non-convergence."""
    expectation = mean_fg(geom, quad_spec)
    return -expectation.mean_f / (1.0 + expectation.mean_g)


def _kappa_approx_values(eta_perp: float, eta_par: float) -> float:
    # closed form valid for any positive pair; domain checks live in the
    # public wrapper so the ratio optimizer can probe outside (0, 1]
    ratio = eta_par / eta_perp
    w = 1.0 - 1.0 / (ratio * ratio)
    if abs(w) < 0.02:
        # unified series around the isotropic point; both closed branches
        # cancel badly as ratio -> 1
        bracket = 0.0
        term = 1.0
        for m in range(1, 31):
            term *= w
            bracket += 6.0 * term / ((2 * m + 1) * (2 * m + 3))
    elif ratio < 1.0:
        u = ratio / math.sqrt(1.0 - ratio * ratio)
        bracket = -2.0 - 3.0 * u * u + 3.0 * (u**3 + u) * math.atan(1.0 / u)
    else:
        v = ratio / math.sqrt(ratio * ratio - 1.0)
        bracket = -2.0 + 3.0 * v * v - 3.0 * (v**3 - v) * math.atanh(1.0 / v)
    prefactor = 1.0 / (8.0 * math.sqrt(math.pi) * eta_perp**2 * eta_par)
    return prefactor * bracket


def kappa_approx(geom: TrapGeometry) -> float:
    """Retardation-free closed form for the figure of merit.

    Equals (3/2) <P2(cos theta)/(kr)^3> exactly: the pure near-field tensor
    average with the cooperative linewidth taken at full strength. Note the
    overall sign is opposite to kappa() at attractive-geometry points (e.g.
    +16.9 vs -19.3 at eta = (0.1, 0.2)); the closed form is kept exactly as
    conventionally printed and cross-checks compare magnitudes. Analytic
    continuation across the isotropic point: arctan branch for pancake
    (eta_par < eta_perp), artanh for cigar, a series where they meet; the
    isotropic value is exactly 0.
    """
    return _kappa_approx_values(geom.eta_perp, geom.eta_par)


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_ratio(
    eta_perp: float,
    use_approx: bool = True,
    quad_spec: QuadratureSpec | None = None,
) -> tuple[float, float]:
    """Maximize |kappa| over the aspect ratio eta_par/eta_perp in [1.01, 10].

    Golden-section search to relative tolerance 1e-4 on the ratio. In approx
    mode the closed form is used (the optimum ratio is then independent of
    eta_perp); otherwise the full quadrature kappa, in which case eta_perp
    should be small enough that ratio*eta_perp stays inside the geometry
    domain. Returns (ratio_star, kappa at the optimum, signed).
    """
    if not 0.0 < eta_perp <= 0.5:
        raise ValueError(f"eta_perp must lie in (0, 0.5], got {eta_perp!r}")

    if use_approx:
        def magnitude(ratio: float) -> float:
            return abs(_kappa_approx_values(eta_perp, ratio * eta_perp))
    else:
        spec = quad_spec or DEFAULT_QUAD

        def magnitude(ratio: float) -> float:
            return abs(kappa(TrapGeometry(eta_perp, ratio * eta_perp), spec))

    lo, hi = 1.01, 10.0
    x1 = hi - _INV_GOLDEN * (hi - lo)
    x2 = lo + _INV_GOLDEN * (hi - lo)
    f1, f2 = magnitude(x1), magnitude(x2)
    while hi - lo > 1e-4 * 0.5 * (hi + lo):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_GOLDEN * (hi - lo)
            f2 = magnitude(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_GOLDEN * (hi - lo)
            f1 = magnitude(x1)
    ratio_star = 0.5 * (lo + hi)
    if use_approx:
        kappa_star = _kappa_approx_values(eta_perp, ratio_star * eta_perp)
    else:
        kappa_star = kappa(TrapGeometry(eta_perp, ratio_star * eta_perp), quad_spec or DEFAULT_QUAD)
    return ratio_star, kappa_star


def _map_cell(args: tuple[float, float, QuadratureSpec]) -> float:
    eta_perp, eta_par, quad_spec = args
    try:
        return kappa(TrapGeometry(eta_perp, eta_par), quad_spec)
    except ConvergenceError:
        return math.nan


def kappa_map(
    eta_perp_grid,
    eta_par_grid,
    quad_spec: QuadratureSpec = DEFAULT_QUAD,
    jobs: int = 1,
) -> np.ndarray:
    """kappa on the outer product of two ascending eta grids.

    Returns shape (len(eta_perp_grid), len(eta_par_grid)); rows scan
    eta_perp. Cells that fail to converge are nan, not fatal. With jobs > 1
    the cells fan out to a process pool; the output is independent of the
    worker count and scheduling because cells are independent and assembly
    order is fixed.
    """
    perp = np.asarray(eta_perp_grid, dtype=float)
    par = np.asarray(eta_par_grid, dtype=float)
    for name, grid in (("eta_perp_grid", perp), ("eta_par_grid", par)):
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError(f"{name} must be a nonempty 1D grid")
        if np.any(np.diff(grid) <= 0):
            raise ValueError(f"{name} must be strictly increasing")
        if grid[0] <= 0 or grid[-1] > 1.0:
            raise ValueError(f"{name} must lie in (0, 1]")

    tasks = [(ep, el, quad_spec) for ep in perp for el in par]
    if jobs == 1:
        values = [_map_cell(task) for task in tasks]
    else:
        with Pool(processes=jobs) as pool:
            values = pool.map(_map_cell, tasks, chunksize=max(1, len(tasks) // (4 * jobs)))
    return np.array(values, dtype=float).reshape(perp.size, par.size)


def kappa_map_csv(eta_perp_grid, eta_par_grid, values: np.ndarray, fh) -> None:
    """Write a kappa map as CSV: header row of eta_par, first column eta_perp.

    Numbers carry 9 significant digits; non-converged cells spell "nan".
    """
    perp = np.asarray(eta_perp_grid, dtype=float)
    par = np.asarray(eta_par_grid, dtype=float)
    if values.shape != (perp.size, par.size):
        raise ValueError("values shape does not match the grids")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["eta_perp/eta_par"] + [f"{v:.9g}" for v in par])
    for eta_p, row in zip(perp, values):
        writer.writerow([f"{eta_p:.9g}"] + [f"{v:.9g}" for v in row])
