"""Experimental parameters and the scalar scales derived from them.

The value types here describe one storage experiment: the atomic species,
the signal/coupling beam geometry, the radial dipole trap and the thermal
ensemble.  :func:`derive_scales` turns such a description into the length,
velocity, force and density scales that the decay models are written in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .constants import (
    AU_POLARIZABILITY,
    G_DEFAULT,
    M_RB87,
    c,
    e,
    epsilon_0,
    hbar,
    k_B,
    m_e,
)
from .errors import ConfigError

COUNTERPROPAGATING = "counterpropagating"
COPROPAGATING = "copropagating"


def free_electron_polarizability(wavelength):
    """Ponderomotive polarizability -e^2/(m_e omega^2) of a free electron.

    Parameters
    ----------
    wavelength : float
        Vacuum wavelength of the light in m.

    Returns
    -------
    float
        Polarizability in atomic units.
    """
    if wavelength <= 0:
        raise ConfigError("wavelength must be positive")
    omega = 2.0 * math.pi * c / wavelength
    return -(e**2) / (m_e * omega**2) / AU_POLARIZABILITY


@dataclass(frozen=True)
class Species:
    """Atomic species.

    Rydberg polarizabilities default to the free-electron value.  Tabulated
    values in ``rydberg_overrides`` (pairs of wavelength in m and
    polarizability in a.u.) take precedence at their wavelength.
    """

    name: str
    mass: float
    ground_polarizability_1064: float
    ground_polarizability_532: float
    rydberg_overrides: tuple = ()

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError("mass must be positive")

    def rydberg_polarizability(self, wavelength):
        """Rydberg-state polarizability in a.u. at ``wavelength`` (m)."""
        for lam, alpha in self.rydberg_overrides:
            if math.isclose(lam, wavelength, rel_tol=1e-9):
                return float(alpha)
        return free_electron_polarizability(wavelength)

    def ground_polarizability(self, wavelength):
        """Ground-state polarizability in a.u.; only 1064 nm and 532 nm are tabulated."""
        if math.isclose(wavelength, 1064e-9, rel_tol=1e-6):
            return self.ground_polarizability_1064
        if math.isclose(wavelength, 532e-9, rel_tol=1e-6):
            return self.ground_polarizability_532
        raise ConfigError(f"no ground-state polarizability tabulated at {wavelength * 1e9:g} nm")

    def polarizability_ratio(self, wavelength):
        """alpha_r / alpha_g at the trap wavelength."""
        return self.rydberg_polarizability(wavelength) / self.ground_polarizability(wavelength)


RB87 = Species(
    name="87Rb",
    mass=M_RB87,
    ground_polarizability_1064=687.3,
    ground_polarizability_532=-250.0,
    rydberg_overrides=((1064e-9, -550.0), (532e-9, -140.0)),
)


@dataclass(frozen=True)
class BeamGeometry:
    """Signal and coupling beams that write the spin wave."""

    signal_wavelength: float
    coupling_wavelength: float
    geometry: str = COUNTERPROPAGATING
    signal_waist: float = 8e-6

    def __post_init__(self):
        if self.signal_wavelength <= 0 or self.coupling_wavelength <= 0:
            raise ConfigError("wavelengths must be positive")
        if self.signal_waist <= 0:
            raise ConfigError("signal waist must be positive")
        if self.geometry not in (COUNTERPROPAGATING, COPROPAGATING):
            raise ConfigError(f"unknown beam geometry {self.geometry!r}")


@dataclass(frozen=True)
class TrapConfig:
    """Radially confining dipole trap.

    ``radial_trap_frequency`` is an angular frequency in rad/s.
    ``on_during_dark_time`` says whether the atoms stay trapped between
    storage and retrieval.
    """

    radial_trap_frequency: float
    polarizability_ratio: float
    trap_depth: Optional[float] = None
    trap_beam_waist: Optional[float] = None
    gravity: float = G_DEFAULT
    on_during_dark_time: bool = False

    def __post_init__(self):
        if self.radial_trap_frequency < 0:
            raise ConfigError("trap frequency must be nonnegative")
        if self.trap_depth is not None and self.trap_depth <= 0:
            raise ConfigError("trap depth must be positive")
        if self.trap_beam_waist is not None and self.trap_beam_waist <= 0:
            raise ConfigError("trap beam waist must be positive")


@dataclass(frozen=True)
class ThermalEnsemble:
    """Temperature, atom number and length of the atomic medium.

    ``temperature == 0`` marks a condensate; thermal scales then do not exist.
    """

    temperature: float
    atom_number: float = 1e4
    medium_length: float = 0.4e-3

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigError("temperature must be nonnegative")
        if self.atom_number <= 0 or self.medium_length <= 0:
            raise ConfigError("atom number and medium length must be positive")

    @property
    def is_condensate(self):
        return self.temperature == 0

    @property
    def beta(self):
        if self.temperature <= 0:
            raise ConfigError("beta is undefined at T = 0")
        return 1.0 / (k_B * self.temperature)


@dataclass(frozen=True)
class ExperimentConfig:
    species: Species
    beams: BeamGeometry
    trap: TrapConfig
    ensemble: ThermalEnsemble


@dataclass(frozen=True)
class DerivedScales:
    """Length, velocity, force and density scales of a thermal cloud in the trap."""

    sigma_v: float
    sigma_k: float
    lambda_dB: float
    sigma_x: float
    sag: float
    w_r: float
    kappa_g: float
    kappa_r: float
    F: float
    rho0: float
    psd: float
    mass: float = field(default=M_RB87)
    waist: float = field(default=8e-6)


# --- single-quantity helpers ---------------------------------------------

def thermal_velocity(temperature, mass):
    """1D rms velocity sqrt(k_B T / m)."""
    if temperature <= 0:
        raise ConfigError("thermal velocity requires T > 0")
    return math.sqrt(k_B * temperature / mass)


def de_broglie_wavelength(temperature, mass):
    """Thermal de Broglie wavelength hbar sqrt(2 pi / (m k_B T))."""
    if temperature <= 0:
        raise ConfigError("de Broglie wavelength requires T > 0")
    return hbar * math.sqrt(2.0 * math.pi / (mass * k_B * temperature))


def thermal_wavenumber(temperature, mass):
    """rms wave number sqrt(m k_B T)/hbar of the thermal momentum distribution."""
    if temperature <= 0:
        raise ConfigError("thermal wave number requires T > 0")
    return math.sqrt(mass * k_B * temperature) / hbar


def gravitational_sag(omega, gravity=G_DEFAULT):
    """Displacement g/omega^2 of the cloud below the trap axis."""
    if omega <= 0:
        raise ConfigError("sag is undefined for a vanishing trap frequency")
    return gravity / omega**2


def cloud_radius(temperature, mass, omega):
    """rms radius sigma_v/omega of a thermal cloud in a harmonic trap."""
    if omega <= 0:
        raise ConfigError("cloud radius is undefined for a vanishing trap frequency")
    return thermal_velocity(temperature, mass) / omega


def transferred_radius(sigma_x, waist):
    """Radius w_r of the cloud fraction addressed by a Gaussian beam.

    ``sigma_x = math.inf`` describes a homogeneous cloud and returns the waist.
    """
    inv = 1.0 / waist**2
    if math.isfinite(sigma_x):
        inv += 1.0 / (4.0 * sigma_x**2)
    return inv**-0.5


def oscillator_length(omega, mass):
    """Ground-state length sqrt(hbar/(m omega))."""
    if omega <= 0:
        raise ConfigError("oscillator length requires omega > 0")
    return math.sqrt(hbar / (mass * omega))


def derive_scales(cfg: ExperimentConfig) -> DerivedScales:
    """Derived scales of a thermal cloud in the radial trap.

    Parameters
    ----------
    cfg : ExperimentConfig
        Needs ``T > 0`` and ``omega > 0``.

    Returns
    -------
    DerivedScales

    Raises
    ------
    ConfigError
        For a condensate (``T = 0``) or a switched-off trap (``omega = 0``);
        use the single-quantity helpers for those cases.
    """
    m = cfg.species.mass
    T = cfg.ensemble.temperature
    omega = cfg.trap.radial_trap_frequency
    if T <= 0:
        raise ConfigError("derived thermal scales require T > 0")
    if omega <= 0:
        raise ConfigError("cloud radius and sag require a nonzero trap frequency")

    sigma_v = thermal_velocity(T, m)
    sigma_x = sigma_v / omega
    lam = de_broglie_wavelength(T, m)
    w = cfg.beams.signal_waist
    ratio = cfg.trap.polarizability_ratio
    kappa_g = m * omega**2
    rho0 = cfg.ensemble.atom_number / (2.0 * math.pi * sigma_x**2 * cfg.ensemble.medium_length)
    return DerivedScales(
        sigma_v=sigma_v,
        sigma_k=thermal_wavenumber(T, m),
        lambda_dB=lam,
        sigma_x=sigma_x,
        sag=gravitational_sag(omega, cfg.trap.gravity),
        w_r=transferred_radius(sigma_x, w),
        kappa_g=kappa_g,
        kappa_r=kappa_g * ratio,
        F=m * cfg.trap.gravity * abs(1.0 - ratio),
        rho0=rho0,
        psd=rho0 * lam**3,
        mass=m,
        waist=w,
    )


def spin_wave_wavevector(beams: BeamGeometry):
    """Wave number and wavelength of the spin wave written by the two beams.

    Returns
    -------
    k_R : float
        In 1/m.  Zero when the beams cancel exactly.
    lambda_R : float
        In m; ``math.inf`` when ``k_R == 0``.
    """
    ks = 1.0 / beams.signal_wavelength
    kc = 1.0 / beams.coupling_wavelength
    inv = kc - ks if beams.geometry == COUNTERPROPAGATING else kc + ks
    inv = abs(inv)
    if inv == 0:
        return 0.0, math.inf
    return 2.0 * math.pi * inv, 1.0 / inv


@dataclass(frozen=True)
class TrapOptics:
    intensity: float
    pi_rate: float
    pi_lifetime: Optional[float]

    @property
    def stable(self):
        """True when photoionization is absent (infinite lifetime)."""
        return self.pi_lifetime is None


def trap_optics(depth, polarizability, pi_cross_section, photon_wavelength) -> TrapOptics:
    """Peak trap intensity and photoionization of Rydberg atoms by the trap light.

    Parameters
    ----------
    depth : float
        Trap depth in J.
    polarizability : float
        Ground-state polarizability in a.u.
    pi_cross_section : float
        Photoionization cross section in m^2.
    photon_wavelength : float
        Trap wavelength in m.

    Returns
    -------
    TrapOptics
        ``pi_lifetime`` is None when the cross section vanishes.
    """
    if depth <= 0 or polarizability <= 0:
        raise ConfigError("depth and polarizability must be positive")
    if pi_cross_section < 0:
        raise ConfigError("cross section must be nonnegative")
    intensity = 2.0 * epsilon_0 * c * depth / (polarizability * AU_POLARIZABILITY)
    photon_energy = 2.0 * math.pi * hbar * c / photon_wavelength
    rate = pi_cross_section * intensity / photon_energy
    return TrapOptics(intensity, rate, 1.0 / rate if rate > 0 else None)


def mixing_angle(g_R, N, Omega_c):
    """Dark-state polariton mixing angle atan2(2 g_R sqrt(N), Omega_c) in rad.

    ``Omega_c = math.inf`` gives 0 (pure light).
    """
    if Omega_c < 0:
        raise ConfigError("coupling Rabi frequency must be nonnegative")
    return math.atan2(2.0 * g_R * math.sqrt(N), Omega_c)
