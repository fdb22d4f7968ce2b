"""Quasi-static cavity-QED layer.

Position-dependent coupling and trap potential, the Stark-shifted atomic
detuning, and the low-saturation steady state of the coupled field/dipole
amplitudes.  Conventions: frames rotate at the probe frequency,
``dc = omega_probe - omega_cavity`` and ``da = omega_probe - omega_atom(pos)``,
with equations of motion

    alpha' = -(kappa - i dc) alpha - i g sigma + eta
    sigma' = -(gamma - i da) sigma - i g alpha

All functions broadcast over numpy arrays of positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .params import ExperimentParams, derive, drive_photon_number, eta_for_power

LOW_SATURATION_LIMIT = 0.05  # excitation above this invalidates the linear model


class Position(NamedTuple):
    """Point in the cavity: z along the axis (0 at the centre), rho radial."""

    z: float
    rho: float

    @classmethod
    def from_cartesian(cls, x: float, y: float, z: float) -> "Position":
        return cls(z=z, rho=float(np.hypot(x, y)))


@dataclass(frozen=True)
class DriveSettings:
    """Instantaneous probe and trap settings."""

    probe_power: float       # W
    cavity_detuning: float   # rad/s, probe minus cavity
    trap_depth_now: float    # J, instantaneous (noise-modulated) depth

    def __post_init__(self):
        if self.probe_power < 0:
            raise ValueError("probe_power must be >= 0")


@dataclass
class FieldAtomState:
    """Cavity field amplitude alpha and atomic dipole amplitude sigma."""

    alpha: complex
    sigma: complex

    @property
    def photon_number(self):
        return np.abs(self.alpha) ** 2

    @property
    def excitation(self):
        return np.abs(self.sigma) ** 2

    @property
    def low_saturation_ok(self):
        return np.all(self.excitation <= LOW_SATURATION_LIMIT)


def coupling(params: ExperimentParams, z, rho):
    """Coupling g(z, rho) = g0 cos(kp z) exp(-rho^2/w0^2)  [rad/s]."""
    kp = 2.0 * np.pi / params.cavity.probe_wavelength
    w0 = params.cavity.mode_waist
    return params.atom.coupling_g0 * np.cos(kp * np.asarray(z)) * np.exp(
        -np.asarray(rho) ** 2 / w0**2
    )


def trap_potential(params: ExperimentParams, z, rho, depth_now: float):
    """Trap potential U = -depth cos^2(kd z) exp(-2 rho^2/w0^2)  [J]."""
    if np.any(np.asarray(depth_now) < 0):
        raise ValueError("depth_now must be >= 0")
    kd = 2.0 * np.pi / params.cavity.dipole_wavelength
    w0 = params.cavity.mode_waist
    return (
        -np.asarray(depth_now)
        * np.cos(kd * np.asarray(z)) ** 2
        * np.exp(-2.0 * np.asarray(rho) ** 2 / w0**2)
    )


def stark_detuning(params: ExperimentParams, z, rho, depth_now: float):
    """Local probe-atom detuning, shifted down by chi |U|/hbar at the antinodes."""
    shift = (
        params.trap.stark_ratio_chi
        * np.abs(trap_potential(params, z, rho, depth_now))
        / params.constants.planck_hbar
    )
    return params.atom.atom_detuning_free - shift


def response_coefficients(params: ExperimentParams, z, rho, drive: DriveSettings):
    """Coefficients (m11, m12, m22, eta) of the linear field/dipole system.

    The state (alpha, sigma) obeys d/dt psi = M psi + (eta, 0) with
    M = [[m11, m12], [m12, m22]].
    """
    g = coupling(params, z, rho)
    da = stark_detuning(params, z, rho, drive.trap_depth_now)
    m11 = -params.cavity.field_decay_kappa + 1j * drive.cavity_detuning
    m12 = -1j * g
    m22 = -params.atom.dipole_decay_gamma + 1j * da
    return m11 + np.zeros_like(m22), m12, m22, eta_for_power(params, drive.probe_power)


def steady_state(params: ExperimentParams, z, rho, drive: DriveSettings) -> FieldAtomState:
    """Low-saturation steady state of the driven atom-cavity system.

    alpha = eta / [(kappa - i dc) + g^2/(gamma - i da)]
    sigma = -i g alpha / (gamma - i da)
    """
    m11, m12, m22, eta = response_coefficients(params, z, rho, drive)
    det = m11 * m22 - m12 * m12
    alpha = -(m22 * eta) / det
    sigma = (m12 * eta) / det
    return FieldAtomState(alpha=alpha, sigma=sigma)


def transmitted_power(params: ExperimentParams, state: FieldAtomState):
    """Detected output power (W), linear in the intracavity photon number.

    The proportionality constant absorbs mirror transmission and mode
    matching; it is anchored so the empty cavity on resonance at the
    reference input power emits ``empty_resonant_output``.
    """
    return derive(params).output_power_per_photon * state.photon_number


def excitation(params: ExperimentParams, z, rho, drive: DriveSettings):
    """Steady-state atomic excitation |sigma|^2 at a position."""
    return steady_state(params, z, rho, drive).excitation


def empty_photon_number(params: ExperimentParams, drive: DriveSettings) -> float:
    """Empty-cavity photon number eta^2/(kappa^2 + dc^2) at the drive settings."""
    kap = params.cavity.field_decay_kappa
    n_res = drive_photon_number(params, drive.probe_power)
    return n_res * kap**2 / (kap**2 + drive.cavity_detuning**2)


def scan_grid(params: ExperimentParams, z_values, rho_values, dc_values, probe_power: float):
    """Photon number / excitation / output power on a (z, rho, dc) grid.

    Returns a dict of flat arrays keyed by column name, for CSV export.
    """
    zs, rs, ds = np.meshgrid(z_values, rho_values, dc_values, indexing="ij")
    cols = {"z": zs.ravel(), "rho": rs.ravel(), "dc": ds.ravel()}
    n = np.empty(zs.size)
    exc = np.empty(zs.size)
    for i, (z, rho, dc) in enumerate(zip(cols["z"], cols["rho"], cols["dc"])):
        drive = DriveSettings(probe_power, dc, params.trap.guide_depth)
        st = steady_state(params, z, rho, drive)
        n[i] = st.photon_number
        exc[i] = st.excitation
    cols["photon_number"] = n
    cols["excitation"] = exc
    cols["p_out"] = derive(params).output_power_per_photon * n
    return cols
