"""Lattice geometry, trap-parameter budget, and the catalysis-field solver.

Covers the classical engineering side of the scheme: where the two
polarization-split standing waves put their wells as the polarization angle
turns, what trap frequencies / Lamb-Dicke parameters / photon-scattering
rates a given set of beam intensities and detunings buys, how fast the
wells may be merged without shaking the atoms up, and how strong the
near-resonant catalysis field must be to reach a requested dipole-dipole
shift. `budget_report` strings the pieces together into one JSON-ready
dictionary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.constants import h as _planck
from scipy.constants import hbar as _hbar

from .atomics import AtomSpecies, cesium_d2, load_species
from .overlap import DEFAULT_QUAD, QuadratureSpec, TrapGeometry, mean_fg

__all__ = [
    "LatticeBeamConfig",
    "TrapParams",
    "CatalysisField",
    "CatalysisSolution",
    "MergeSchedule",
    "LatticeConfig",
    "well_separation",
    "trap_params",
    "total_lattice_scatter",
    "merge_schedule",
    "catalysis_intensity",
    "load_lattice_config",
    "budget_report",
]

MERGE_ADIABATIC_THRESHOLD = 0.1
SATURATION_LIMIT = 0.1


@dataclass(frozen=True)
class LatticeBeamConfig:
    """Beam parameters of the two standing-wave pairs.

    Intensities in W/m^2 per beam, detunings in rad/s and blue of the
    resonance, wave_number in rad/m, polarization_angle in rad between the
    linear polarizations of the counter-propagating transverse beams.
    Intensity zero is allowed as the explicit no-trap degenerate case.
    """

    intensity_perp: float
    intensity_par: float
    detuning_perp: float
    detuning_par: float
    wave_number: float
    polarization_angle: float

    def __post_init__(self) -> None:
        if self.intensity_perp < 0 or self.intensity_par < 0:
            raise ValueError("beam intensities must be nonnegative")
        if self.detuning_perp <= 0 or self.detuning_par <= 0:
            raise ValueError("detunings must be positive (blue of resonance)")
        if self.wave_number <= 0:
            raise ValueError("wave_number must be positive")
        if not 0.0 <= self.polarization_angle <= math.pi:
            raise ValueError("polarization_angle must lie in [0, pi]")


@dataclass(frozen=True)
class TrapParams:
    """One axis of the harmonic well: depth, frequency, width, scattering.

    osc_freq is an ordinary frequency in Hz. A zero-intensity beam gives
    the degenerate record (zero depth, frequency and scattering; infinite
    ground-state width), kept constructible so an all-zero budget stays
    representable.
    """

    well_depth: float
    osc_freq: float
    ground_rms: float
    lamb_dicke: float
    scatter_rate: float

    def __post_init__(self) -> None:
        if self.well_depth == 0.0:
            if self.osc_freq != 0.0 or self.scatter_rate != 0.0:
                raise ValueError("zero-depth trap must have zero frequency and scattering")
            if not (math.isinf(self.ground_rms) and math.isinf(self.lamb_dicke)):
                raise ValueError("zero-depth trap leaves the atom unconfined")
            return
        if min(self.well_depth, self.osc_freq, self.ground_rms, self.lamb_dicke) <= 0:
            raise ValueError("trap parameters must be positive")
        if self.scatter_rate < 0:
            raise ValueError("scatter_rate must be nonnegative")


@dataclass(frozen=True)
class CatalysisField:
    """Near-resonant field driving the dipoles: intensity in W/m^2,
    detuning from the bare resonance in rad/s, saturation parameter, and
    the single-atom scattering rate it causes."""

    intensity: float
    detuning_from_resonance: float
    saturation: float
    scatter_rate: float

    def __post_init__(self) -> None:
        if self.intensity < 0 or self.saturation < 0 or self.scatter_rate < 0:
            raise ValueError("catalysis field quantities must be nonnegative")


@dataclass(frozen=True)
class CatalysisSolution:
    """Catalysis field plus the pair-level rates it implies.

    gamma_sup is the superradiantly enhanced scattering rate of the doubly
    excited-logical pair; figure_of_merit is the shift-to-linewidth ratio
    |shift| / (hbar * gamma_sup), which the Clebsch-Gordan factor cancels
    out of.
    """

    field: CatalysisField
    gamma_sup: float
    figure_of_merit: float


def well_separation(theta, wave_number: float):
    """Distance between the two standing waves' well minima vs angle.

    The sigma+ and sigma- components of the angled-polarization pair form
    standing waves whose minima slide apart as the angle opens; on the
    branch continuous in theta the separation is atan2(sin, 2 cos)/k,
    growing monotonically from 0 through a quarter wavelength at 90 deg.
    Accepts a scalar or an array of angles.
    """
    if wave_number <= 0:
        raise ValueError("wave_number must be positive")
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0) or np.any(th > math.pi):
        raise ValueError("polarization angle must lie in [0, pi]")
    # cos(pi/2) is only zero to rounding; snap it so the quarter-wave
    # separation at 90 degrees comes out exact rather than one ulp short
    two_cos = 2.0 * np.cos(th)
    two_cos = np.where(np.abs(two_cos) < 1e-12, 0.0, two_cos)
    sep = np.arctan2(np.sin(th), two_cos) / wave_number
    return float(sep) if np.isscalar(theta) or th.ndim == 0 else sep


def trap_params(
    species: AtomSpecies,
    intensity: float,
    detuning: float,
    wave_number: float,
    geometry_factor: float = 1.0,
) -> TrapParams:
    """Far-off-resonance standing-wave trap parameters for one axis.

    Two-level light shift per beam U1 = hbar Gamma^2 (I/I_sat) / (8 Delta),
    standing-wave depth 4 U1 times a geometry factor absorbing beam
    arrangement details, harmonic expansion about the node for blue
    detuning. The scattering contribution is the zero-point residual: a
    node-sited atom samples the field over its ground-state width, which
    in the harmonic approximation scatters at Gamma * omega / (4 Delta).
    """
    if detuning <= 0:
        raise ValueError("red or zero detuning not supported; detuning must be > 0")
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    if geometry_factor <= 0:
        raise ValueError("geometry_factor must be positive")
    if wave_number <= 0:
        raise ValueError("wave_number must be positive")
    if intensity == 0.0:
        return TrapParams(0.0, 0.0, math.inf, math.inf, 0.0)
    gamma = species.gamma_natural
    saturation = (intensity / species.i_sat) / (1.0 + (2.0 * detuning / gamma) ** 2)
    if saturation > SATURATION_LIMIT:
        raise ValueError(
            f"saturation {saturation:.3g} exceeds the far-off-resonance limit "
            f"{SATURATION_LIMIT}; the two-level light-shift model does not apply"
        )
    single_beam_shift = _hbar * gamma**2 * (intensity / species.i_sat) / (8.0 * detuning)
    depth = 4.0 * single_beam_shift * geometry_factor
    omega = wave_number * math.sqrt(2.0 * depth / species.mass)
    rms = math.sqrt(_hbar / (2.0 * species.mass * omega))
    return TrapParams(
        well_depth=depth,
        osc_freq=omega / (2.0 * math.pi),
        ground_rms=rms,
        lamb_dicke=wave_number * rms,
        scatter_rate=gamma * omega / (4.0 * detuning),
    )


def total_lattice_scatter(transverse: TrapParams, longitudinal: TrapParams) -> float:
    """Total lattice photon-scattering rate: two transverse axes sharing
    one parameter set plus the longitudinal axis."""
    return 2.0 * transverse.scatter_rate + longitudinal.scatter_rate


@dataclass(frozen=True)
class MergeSchedule:
    """Raised-cosine polarization-angle ramp with its adiabaticity figure.

    adiabaticity compares the peak well velocity against the oscillator
    velocity scale (trap frequency times ground-state width); values at or
    above MERGE_ADIABATIC_THRESHOLD are flagged as too fast.
    """

    theta_start: float
    theta_end: float
    duration: float
    nu_osc: float
    lamb_dicke: float
    adiabaticity: float

    @property
    def adiabatic(self) -> bool:
        return self.adiabaticity < MERGE_ADIABATIC_THRESHOLD

    def theta_at(self, t):
        """Angle along the ramp; clamps outside [0, duration]."""
        frac = np.clip(np.asarray(t, dtype=float) / self.duration, 0.0, 1.0)
        th = self.theta_start + (self.theta_end - self.theta_start) * 0.5 * (
            1.0 - np.cos(math.pi * frac)
        )
        return float(th) if np.isscalar(t) else th

    def separation_at(self, t, wave_number: float):
        return well_separation(self.theta_at(t), wave_number)


_MERGE_GRID = 200_001


def merge_schedule(
    theta_start: float,
    theta_end: float,
    duration: float,
    nu_osc: float,
    lamb_dicke: float,
) -> MergeSchedule:
    """Plan a well merge and score how adiabatic it is.

    The figure is A = max_t |d(separation)/dt| / (nu_osc * ground_rms).
    Both separation and ground_rms carry 1/wave_number, so A only needs
    the Lamb-Dicke parameter. The maximum is taken on a dense time grid;
    the ramp rate is smooth and vanishes at both ends, so the grid error
    is far below the printed precision.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if nu_osc <= 0 or lamb_dicke <= 0:
        raise ValueError("nu_osc and lamb_dicke must be positive")
    for th in (theta_start, theta_end):
        if not 0.0 <= th <= math.pi:
            raise ValueError("ramp angles must lie in [0, pi]")
    if theta_start == theta_end:
        return MergeSchedule(theta_start, theta_end, duration, nu_osc, lamb_dicke, 0.0)

    t = np.linspace(0.0, duration, _MERGE_GRID)
    frac = t / duration
    theta = theta_start + (theta_end - theta_start) * 0.5 * (1.0 - np.cos(math.pi * frac))
    dtheta_dt = (theta_end - theta_start) * 0.5 * math.pi / duration * np.sin(math.pi * frac)
    # d(k * separation)/d(theta) for the continuous branch
    dphi_dtheta = 2.0 / (4.0 * np.cos(theta) ** 2 + np.sin(theta) ** 2)
    peak_rate = float(np.max(np.abs(dphi_dtheta * dtheta_dt)))
    figure = peak_rate / (nu_osc * lamb_dicke)
    return MergeSchedule(theta_start, theta_end, duration, nu_osc, lamb_dicke, figure)


def catalysis_intensity(
    species: AtomSpecies,
    c_g4: float,
    mean_f: float,
    mean_g: float,
    target_shift: float,
) -> CatalysisSolution:
    """Resonant catalysis field reaching a requested dipole-dipole shift.

    Inverts |shift| = hbar * Gamma' * c_g4 * |<f>| for the single-atom
    scattering rate Gamma', converts to saturation s = 2 Gamma' / Gamma and
    intensity I = s * I_sat, and reports the superradiant pair rate
    Gamma' * c_g4 * (1 + <g>) together with the shift-to-linewidth figure
    of merit. target_shift is in joules; its sign is ignored.
    """
    if not 0.0 < c_g4 <= 1.0:
        raise ValueError("c_g4 must lie in (0, 1]")
    if mean_g <= -1.0:
        raise ValueError("mean_g <= -1 would put the pair linewidth at or below zero")
    if mean_f == 0.0:
        raise ValueError("mean_f = 0: no field strength produces a level shift")
    gamma_prime = abs(target_shift) / (_hbar * c_g4 * abs(mean_f))
    saturation = 2.0 * gamma_prime / species.gamma_natural
    field = CatalysisField(
        intensity=saturation * species.i_sat,
        detuning_from_resonance=0.0,
        saturation=saturation,
        scatter_rate=gamma_prime,
    )
    gamma_sup = gamma_prime * c_g4 * (1.0 + mean_g)
    # the ratio is independent of the drive strength and of c_g4
    figure = abs(mean_f) / (1.0 + mean_g)
    return CatalysisSolution(field=field, gamma_sup=gamma_sup, figure_of_merit=figure)


# --- configuration file ---------------------------------------------------

_INTENSITY_UNITS = {
    "W/m2": 1.0,
    "mW/m2": 1e-3,
    "W/cm2": 1e4,
    "mW/cm2": 10.0,
    "uW/cm2": 1e-2,
}
_FREQUENCY_UNITS = {
    "Hz": 1.0,
    "kHz": 1e3,
    "MHz": 1e6,
    "GHz": 1e9,
    "THz": 1e12,
}
_LENGTH_UNITS = {"m": 1.0, "um": 1e-6, "nm": 1e-9}
_ANGLE_UNITS = {"rad": 1.0, "deg": math.pi / 180.0}


@dataclass(frozen=True)
class LatticeConfig:
    """Parsed run configuration: species, beams, the design localization
    at which the dipole average is quoted, and the requested shift."""

    species: AtomSpecies
    species_name: str
    beams: LatticeBeamConfig
    design_geometry: TrapGeometry
    target_shift: float
    geometry_factor: float


def _split_quantity(key: str, raw: str) -> tuple[float, str | None]:
    parts = raw.split()
    if len(parts) == 1:
        return float(parts[0]), None
    if len(parts) == 2:
        return float(parts[0]), parts[1]
    raise ValueError(f"malformed value for {key!r}: {raw!r}")


def _convert(key: str, raw: str, units: dict[str, float], kind: str) -> float:
    value, unit = _split_quantity(key, raw)
    if unit is None:
        raise ValueError(f"{key!r} needs a {kind} unit, one of {sorted(units)}")
    if unit not in units:
        raise ValueError(f"unknown {kind} unit {unit!r} for {key!r}; use one of {sorted(units)}")
    return value * units[unit]


def _dimensionless(key: str, raw: str) -> float:
    value, unit = _split_quantity(key, raw)
    if unit is not None:
        raise ValueError(f"{key!r} is dimensionless, got unit {unit!r}")
    return value


_CONFIG_KEYS = {
    "species",
    "intensity_perp",
    "intensity_par",
    "detuning_perp",
    "detuning_par",
    "lattice_wavelength",
    "polarization_angle",
    "design_eta_perp",
    "design_eta_par",
    "target_shift",
    "geometry_factor",
}


def load_lattice_config(path: str | Path) -> LatticeConfig:
    """Read a key = value lattice configuration.

    Detunings and the target shift are given as ordinary frequencies
    (Hz...THz) and converted to rad/s and joules respectively: a detuning
    of "120 GHz" means 2 pi * 120e9 rad/s, a target_shift of "5 kHz" means
    the level shift whose magnitude over the Planck constant is 5 kHz.
    Intensities accept W/m2 and the usual per-cm^2 variants; the species
    is either the built-in "cesium_d2" or a path to a species file,
    resolved relative to the configuration file.
    """
    path = Path(path)
    values: dict[str, str] = {}
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{line_no}: expected key = value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"{path}:{line_no}: duplicate key {key!r}")
        if not raw:
            raise ValueError(f"{path}:{line_no}: empty value for {key!r}")
        values[key] = raw

    missing = _CONFIG_KEYS - {"geometry_factor"} - set(values)
    if missing:
        raise ValueError(f"{path}: missing keys {sorted(missing)}")

    species_name = values["species"]
    if species_name == "cesium_d2":
        species = cesium_d2()
    else:
        species = load_species(path.parent / species_name)

    wavelength = _convert("lattice_wavelength", values["lattice_wavelength"], _LENGTH_UNITS, "length")
    beams = LatticeBeamConfig(
        intensity_perp=_convert("intensity_perp", values["intensity_perp"], _INTENSITY_UNITS, "intensity"),
        intensity_par=_convert("intensity_par", values["intensity_par"], _INTENSITY_UNITS, "intensity"),
        detuning_perp=2.0 * math.pi * _convert("detuning_perp", values["detuning_perp"], _FREQUENCY_UNITS, "frequency"),
        detuning_par=2.0 * math.pi * _convert("detuning_par", values["detuning_par"], _FREQUENCY_UNITS, "frequency"),
        wave_number=2.0 * math.pi / wavelength,
        polarization_angle=_convert("polarization_angle", values["polarization_angle"], _ANGLE_UNITS, "angle"),
    )
    design = TrapGeometry(
        eta_perp=_dimensionless("design_eta_perp", values["design_eta_perp"]),
        eta_par=_dimensionless("design_eta_par", values["design_eta_par"]),
    )
    target_shift = _planck * _convert("target_shift", values["target_shift"], _FREQUENCY_UNITS, "frequency")
    geometry_factor = _dimensionless("geometry_factor", values.get("geometry_factor", "1"))
    return LatticeConfig(
        species=species,
        species_name=species_name,
        beams=beams,
        design_geometry=design,
        target_shift=target_shift,
        geometry_factor=geometry_factor,
    )


# --- budget ---------------------------------------------------------------


def _finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None


def _trap_block(params: TrapParams) -> dict:
    return {
        "well_depth_joule": params.well_depth,
        "osc_freq_hz": params.osc_freq,
        "ground_rms_m": _finite_or_none(params.ground_rms),
        "lamb_dicke": _finite_or_none(params.lamb_dicke),
        "scatter_rate_per_s": params.scatter_rate,
        "formulas": {
            "well_depth": "4 * geometry_factor * hbar * gamma^2 * (I / I_sat) / (8 * detuning)",
            "osc_freq": "(k / 2 pi) * sqrt(2 * well_depth / mass)",
            "ground_rms": "sqrt(hbar / (2 * mass * 2 pi * osc_freq))",
            "lamb_dicke": "k * ground_rms",
            "scatter_rate": "gamma * (2 pi * osc_freq) / (4 * detuning)",
        },
    }


def budget_report(config: LatticeConfig, quad_spec: QuadratureSpec = DEFAULT_QUAD) -> dict:
    """Full parameter budget as a JSON-ready dictionary.

    Trap blocks derive from the configured beams; the dipole average and
    everything downstream of it (figure of merit, catalysis field) are
    quoted at the configured design localization, with the derived
    Lamb-Dicke parameters reported alongside so the consistency of the
    two is visible in the output.
    """
    species = config.species
    beams = config.beams
    perp = trap_params(
        species, beams.intensity_perp, beams.detuning_perp, beams.wave_number, config.geometry_factor
    )
    par = trap_params(
        species, beams.intensity_par, beams.detuning_par, beams.wave_number, config.geometry_factor
    )
    lattice_rate = total_lattice_scatter(perp, par)

    design = config.design_geometry
    expectation = mean_fg(design, quad_spec)
    solution = catalysis_intensity(
        species,
        c_g4=species.pi_coupling**4,
        mean_f=expectation.mean_f,
        mean_g=expectation.mean_g,
        target_shift=config.target_shift,
    )

    theta = beams.polarization_angle
    return {
        "schema_version": 1,
        "species": {
            "name": config.species_name,
            "mass_kg": species.mass,
            "gamma_natural_per_s": species.gamma_natural,
            "i_sat_w_m2": species.i_sat,
            "lambda_res_m": species.lambda_res,
        },
        "beams": {
            "intensity_perp_w_m2": beams.intensity_perp,
            "intensity_par_w_m2": beams.intensity_par,
            "detuning_perp_rad_s": beams.detuning_perp,
            "detuning_par_rad_s": beams.detuning_par,
            "wave_number_rad_m": beams.wave_number,
            "polarization_angle_rad": theta,
        },
        "transverse_trap": _trap_block(perp),
        "longitudinal_trap": _trap_block(par),
        "lattice_scatter": {
            "rate_per_s": lattice_rate,
            "rate_over_2pi_hz": lattice_rate / (2.0 * math.pi),
            "formula": "2 * transverse.scatter_rate + longitudinal.scatter_rate",
        },
        "well_separation": {
            "angle_rad": theta,
            "separation_m": well_separation(theta, beams.wave_number),
            "formula": "atan2(sin(angle), 2 cos(angle)) / k",
        },
        "dipole_average": {
            "design_eta_perp": design.eta_perp,
            "design_eta_par": design.eta_par,
            "derived_eta_perp": _finite_or_none(perp.lamb_dicke),
            "derived_eta_par": _finite_or_none(par.lamb_dicke),
            "mean_f": expectation.mean_f,
            "mean_g": expectation.mean_g,
            "err_f": expectation.err_f,
            "err_g": expectation.err_g,
            "evaluations": expectation.evaluations,
        },
        "figure_of_merit": {
            "kappa": -expectation.mean_f / (1.0 + expectation.mean_g),
            "magnitude": solution.figure_of_merit,
            "formula": "-mean_f / (1 + mean_g)",
        },
        "catalysis": {
            "target_shift_joule": config.target_shift,
            "target_shift_over_h_hz": config.target_shift / _planck,
            "pi_coupling_4": species.pi_coupling**4,
            "intensity_w_m2": solution.field.intensity,
            "intensity_uw_cm2": solution.field.intensity * 1e2,
            "saturation": solution.field.saturation,
            "scatter_rate_per_s": solution.field.scatter_rate,
            "superradiant_rate_per_s": solution.gamma_sup,
            "superradiant_rate_over_2pi_hz": solution.gamma_sup / (2.0 * math.pi),
            "formulas": {
                "scatter_rate": "|target_shift| / (hbar * c_g^4 * |mean_f|)",
                "saturation": "2 * scatter_rate / gamma",
                "intensity": "saturation * I_sat",
                "superradiant_rate": "scatter_rate * c_g^4 * (1 + mean_g)",
            },
        },
    }
