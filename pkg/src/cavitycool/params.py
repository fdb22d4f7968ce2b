"""Experiment parameters, unit handling and derived quantities.

All frequencies are stored as angular frequencies (rad/s).  Config files use
laboratory units instead (MHz for nu = omega/2pi, micrometres, microkelvin,
picowatt, ...); the unit is part of the key name, e.g. ``kappa_mhz``.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources

import yaml

TWO_PI = 2.0 * math.pi


class ParamError(ValueError):
    """Raised for config parse failures and parameter-invariant violations."""


@dataclass(frozen=True)
class PhysicalConstants:
    planck_hbar: float = 1.054571817e-34  # J s
    boltzmann: float = 1.380649e-23       # J/K
    light_speed: float = 2.99792458e8     # m/s
    atom_mass: float = 1.4100e-25         # kg, Rb-85

    def __post_init__(self):
        for name in ("planck_hbar", "boltzmann", "light_speed", "atom_mass"):
            if getattr(self, name) <= 0:
                raise ParamError(f"physical constant {name} must be positive")


@dataclass(frozen=True)
class CavityParams:
    field_decay_kappa: float   # rad/s
    length: float              # m
    finesse: float
    probe_wavelength: float    # m
    dipole_wavelength: float   # m
    mode_waist: float          # m

    def __post_init__(self):
        if self.probe_wavelength == self.dipole_wavelength:
            raise ParamError("probe_wavelength must differ from dipole_wavelength")
        if not self.mode_waist < 0.25 * self.length:
            raise ParamError("mode_waist must be small compared to the cavity length")
        if self.finesse <= 0:
            raise ParamError("finesse must be positive")


@dataclass(frozen=True)
class AtomParams:
    coupling_g0: float          # rad/s, antinode single-photon coupling
    dipole_decay_gamma: float   # rad/s
    atom_detuning_free: float   # rad/s, probe minus unshifted atom


@dataclass(frozen=True)
class TrapParams:
    guide_depth: float        # J, shallow guiding depth before capture
    trap_depth: float         # J, full depth after capture
    stark_ratio_chi: float    # transition shift per unit ground-state depth

    def __post_init__(self):
        if not self.guide_depth < self.trap_depth:
            raise ParamError("guide_depth must be smaller than trap_depth")
        if self.stark_ratio_chi < 0:
            raise ParamError("stark_ratio_chi must be >= 0")


@dataclass(frozen=True)
class DetectionParams:
    quantum_efficiency: float        # photon detection efficiency
    empty_resonant_output: float     # W, transmitted power at reference input
    reference_input_power: float     # W, input power of the output anchor
    photon_number_per_pw: float      # reported intracavity photons per pW input
    drive_photon_scale: float        # empty-cavity drive photons per reported photon

    def __post_init__(self):
        if not 0.0 < self.quantum_efficiency <= 1.0:
            raise ParamError("quantum_efficiency must be in (0, 1]")
        if self.photon_number_per_pw <= 0 or self.drive_photon_scale <= 0:
            raise ParamError("photon-number calibration constants must be positive")


@dataclass(frozen=True)
class SimParams:
    dt: float                        # s, integrator time step
    trace_period: float              # s, default sampling period of traces
    escape_radius_waists: float      # radial escape boundary in units of w0
    init_axial_temp: float           # K, axial temperature of captured atoms
    init_radial_temp: float          # K, radial temperature of captured atoms
    emission_pattern: str            # "isotropic" or "dipole"
    noise_relative_rms: float        # default trap-depth noise amplitude
    noise_resample_interval: float   # s

    def __post_init__(self):
        if self.emission_pattern not in ("isotropic", "dipole"):
            raise ParamError("emission_pattern must be 'isotropic' or 'dipole'")
        if not 0.0 <= self.noise_relative_rms <= 0.5:
            raise ParamError("noise_relative_rms must lie in [0, 0.5]")
        if self.dt <= 0 or self.trace_period <= 0:
            raise ParamError("dt and trace_period must be positive")


@dataclass(frozen=True)
class ExperimentParams:
    constants: PhysicalConstants
    cavity: CavityParams
    atom: AtomParams
    trap: TrapParams
    detection: DetectionParams
    sim: SimParams

    def __post_init__(self):
        g0 = self.atom.coupling_g0
        kap = self.cavity.field_decay_kappa
        gam = self.atom.dipole_decay_gamma
        if not g0 * g0 > kap * gam:
            raise ParamError("strong coupling violated: g0^2 must exceed kappa*gamma")


@dataclass(frozen=True)
class DerivedParams:
    axial_trap_freq: float        # rad/s, at full trap depth
    radial_trap_freq: float       # rad/s, at full trap depth
    recoil_velocity: float        # m/s, single probe-photon recoil
    capture_velocity: float       # m/s, quarter wavelength per cavity lifetime
    drive_eta_1pw: float          # sqrt(photons)/s at 1 pW input
    probe_wavenumber: float       # rad/m
    dipole_wavenumber: float      # rad/m
    mode_spacing: float           # m, wavelength gap between longitudinal modes
    output_power_per_photon: float  # W per intracavity drive photon


# ---------------------------------------------------------------------------
# defaults and config parsing

_UK = 1e-6  # Kelvin
_MK = 1e-3


def _default_dict() -> dict:
    with resources.files("cavitycool").joinpath("default_config.yaml").open("rb") as f:
        return yaml.safe_load(f)


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, val in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ParamError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ParamError(f"config key {here} must be a mapping")
            out[key] = _merge(base[key], val, here)
        else:
            out[key] = val
    return out


def _get(cfg: dict, section: str, key: str) -> float:
    try:
        val = cfg[section][key]
    except KeyError:
        raise ParamError(f"missing config key: {section}.{key}") from None
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float, str)):
        raise ParamError(f"config key {section}.{key} has invalid type")
    return val


def params_from_dict(cfg: dict) -> ExperimentParams:
    """Build an ExperimentParams from a fully merged config dictionary."""
    constants = PhysicalConstants()
    lam_d = _get(cfg, "cavity", "dipole_wavelength_nm") * 1e-9
    waist = _get(cfg, "cavity", "mode_waist_um")
    if waist is None:
        # default waist makes the axial/radial trap-frequency ratio exactly 100
        waist = 100.0 * math.sqrt(2.0) / (TWO_PI / lam_d)
    else:
        waist = waist * 1e-6
    cavity = CavityParams(
        field_decay_kappa=TWO_PI * _get(cfg, "cavity", "kappa_mhz") * 1e6,
        length=_get(cfg, "cavity", "length_um") * 1e-6,
        finesse=float(_get(cfg, "cavity", "finesse")),
        probe_wavelength=_get(cfg, "cavity", "probe_wavelength_nm") * 1e-9,
        dipole_wavelength=lam_d,
        mode_waist=waist,
    )
    atom = AtomParams(
        coupling_g0=TWO_PI * _get(cfg, "atom", "g0_mhz") * 1e6,
        dipole_decay_gamma=TWO_PI * _get(cfg, "atom", "gamma_mhz") * 1e6,
        atom_detuning_free=TWO_PI * _get(cfg, "atom", "detuning_mhz") * 1e6,
    )
    kb = constants.boltzmann
    trap = TrapParams(
        guide_depth=kb * _get(cfg, "trap", "guide_depth_uk") * _UK,
        trap_depth=kb * _get(cfg, "trap", "trap_depth_mk") * _MK,
        stark_ratio_chi=float(_get(cfg, "trap", "stark_ratio_chi")),
    )
    detection = DetectionParams(
        quantum_efficiency=float(_get(cfg, "detection", "quantum_efficiency")),
        empty_resonant_output=_get(cfg, "detection", "empty_resonant_output_fw") * 1e-15,
        reference_input_power=_get(cfg, "detection", "reference_input_pw") * 1e-12,
        photon_number_per_pw=float(_get(cfg, "detection", "photon_number_per_pw")),
        drive_photon_scale=float(_get(cfg, "detection", "drive_photon_scale")),
    )
    sim = SimParams(
        dt=_get(cfg, "sim", "dt_ns") * 1e-9,
        trace_period=_get(cfg, "sim", "trace_period_us") * 1e-6,
        escape_radius_waists=float(_get(cfg, "sim", "escape_radius_waists")),
        init_axial_temp=_get(cfg, "sim", "init_axial_temp_uk") * _UK,
        init_radial_temp=_get(cfg, "sim", "init_radial_temp_uk") * _UK,
        emission_pattern=str(_get(cfg, "sim", "emission_pattern")),
        noise_relative_rms=float(_get(cfg, "noise", "relative_rms")),
        noise_resample_interval=_get(cfg, "noise", "resample_interval_us") * 1e-6,
    )
    return ExperimentParams(constants, cavity, atom, trap, detection, sim)


def load_params(config_text: str | None = None) -> ExperimentParams:
    """Parse a YAML config (laboratory units) into SI ExperimentParams.

    Missing optional keys fall back to the built-in defaults.  Unknown keys,
    missing required keys and invariant violations raise ParamError naming
    the offending key; YAML syntax errors report the line number.
    """
    base = _default_dict()
    if config_text is not None:
        try:
            user = yaml.safe_load(io.StringIO(config_text))
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1}" if mark is not None else ""
            raise ParamError(f"config parse failure{where}: {exc}") from None
        if user is None:
            user = {}
        if not isinstance(user, dict):
            raise ParamError("config root must be a mapping")
        base = _merge(base, user)
    return params_from_dict(base)


def load_params_file(path: str) -> ExperimentParams:
    with open(path, "r", encoding="utf-8") as f:
        return load_params(f.read())


def default_params() -> ExperimentParams:
    return load_params(None)


def params_as_dict(params: ExperimentParams) -> dict:
    """Resolved parameter set as a flat-ish plain dict (SI units)."""
    out = {}
    for section in ("constants", "cavity", "atom", "trap", "detection", "sim"):
        obj = getattr(params, section)
        out[section] = {k: getattr(obj, k) for k in obj.__dataclass_fields__}
    return out


def config_hash(params: ExperimentParams) -> str:
    blob = json.dumps(params_as_dict(params), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def with_atom_detuning(params: ExperimentParams, detuning: float) -> ExperimentParams:
    """Copy of ``params`` with a different free-atom probe detuning (rad/s)."""
    return replace(params, atom=replace(params.atom, atom_detuning_free=detuning))


def with_noise_rms(params: ExperimentParams, relative_rms: float) -> ExperimentParams:
    return replace(params, sim=replace(params.sim, noise_relative_rms=relative_rms))


# ---------------------------------------------------------------------------
# calibrations and derived quantities

def photon_number_from_power(params: ExperimentParams, probe_power: float) -> float:
    """Reported resonant intracavity photon number for a given input power (W).

    This is the published photon-number calibration (linear in power); the
    stronger empty-cavity drive used by the dynamics is obtained from it via
    ``drive_photon_scale`` (see drive_photon_number).
    """
    if probe_power < 0:
        raise ParamError("probe power must be >= 0")
    return params.detection.photon_number_per_pw * (probe_power / 1e-12)


def drive_photon_number(params: ExperimentParams, probe_power: float) -> float:
    """Empty-cavity resonant photon number |eta/kappa|^2 driving the model."""
    return params.detection.drive_photon_scale * photon_number_from_power(params, probe_power)


def eta_for_power(params: ExperimentParams, probe_power: float) -> float:
    """Drive amplitude eta (sqrt(photons)/s): |alpha|^2 = eta^2/(kappa^2+dc^2) when empty."""
    return params.cavity.field_decay_kappa * math.sqrt(drive_photon_number(params, probe_power))


def derive(params: ExperimentParams) -> DerivedParams:
    """Derived quantities.  Pure and deterministic."""
    c = params.constants
    kp = TWO_PI / params.cavity.probe_wavelength
    kd = TWO_PI / params.cavity.dipole_wavelength
    depth = params.trap.trap_depth
    w0 = params.cavity.mode_waist
    ax = kd * math.sqrt(2.0 * depth / c.atom_mass)
    rad = (2.0 / w0) * math.sqrt(depth / c.atom_mass)
    ratio = ax / rad
    if not 80.0 <= ratio <= 120.0:
        raise ParamError(f"axial/radial trap-frequency ratio {ratio:.1f} outside 100 +- 20%")
    d = params.detection
    c_out = d.empty_resonant_output / drive_photon_number(params, d.reference_input_power)
    return DerivedParams(
        axial_trap_freq=ax,
        radial_trap_freq=rad,
        recoil_velocity=c.planck_hbar * kp / c.atom_mass,
        capture_velocity=(params.cavity.probe_wavelength / 4.0)
        * (2.0 * params.cavity.field_decay_kappa),
        drive_eta_1pw=eta_for_power(params, 1e-12),
        probe_wavenumber=kp,
        dipole_wavenumber=kd,
        mode_spacing=params.cavity.probe_wavelength**2 / (2.0 * params.cavity.length),
        output_power_per_photon=c_out,
    )


def derived_as_text(derived: DerivedParams) -> str:
    lines = [
        f"axial_trap_freq_mhz = {derived.axial_trap_freq / TWO_PI / 1e6:.6g}",
        f"radial_trap_freq_khz = {derived.radial_trap_freq / TWO_PI / 1e3:.6g}",
        f"recoil_velocity_mm_s = {derived.recoil_velocity * 1e3:.6g}",
        f"capture_velocity_m_s = {derived.capture_velocity:.6g}",
        f"drive_eta_1pw = {derived.drive_eta_1pw:.6g}",
        f"probe_wavenumber = {derived.probe_wavenumber:.8g}",
        f"dipole_wavenumber = {derived.dipole_wavenumber:.8g}",
        f"mode_spacing_nm = {derived.mode_spacing * 1e9:.6g}",
        f"output_power_per_photon_fw = {derived.output_power_per_photon * 1e15:.6g}",
    ]
    return "\n".join(lines)
