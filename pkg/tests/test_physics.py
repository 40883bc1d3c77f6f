import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinwave import constants
from spinwave.errors import ConfigError
from spinwave.figures import reference_experiment
from spinwave.physics import (
    COPROPAGATING,
    RB87,
    BeamGeometry,
    ThermalEnsemble,
    TrapConfig,
    cloud_radius,
    de_broglie_wavelength,
    derive_scales,
    gravitational_sag,
    mixing_angle,
    oscillator_length,
    spin_wave_wavevector,
    thermal_velocity,
    trap_optics,
    transferred_radius,
)

# reference values at 0.2 uK, 2 pi x 96 Hz, 1064 nm trap, 8 um waist, 1e4 atoms in 0.4 mm
SCALES = {
    "sigma_v": 4.3742076688e-3,
    "sigma_x": 7.2518413813e-6,
    "sag": 2.6935427509e-5,
    "w_r": 7.0050365188e-6,
    "rho0": 7.5659514095e16,
    "psd": 5.5554621302e-3,
    "F": 2.5460634812e-24,
}


@pytest.fixture(scope="module")
def scales():
    return derive_scales(reference_experiment(0.2e-6))


@pytest.mark.parametrize("name", sorted(SCALES))
def test_reference_scales(scales, name):
    assert getattr(scales, name) == pytest.approx(SCALES[name], rel=1e-8)


def test_curvatures_follow_polarizability_ratio(scales):
    assert scales.kappa_r / scales.kappa_g == pytest.approx(-550.0 / 687.3, rel=1e-12)
    assert scales.F == pytest.approx(scales.mass * 9.8 * abs(1 + 550.0 / 687.3), rel=1e-12)


def test_spin_wave_wavelength_geometries():
    k, lam = spin_wave_wavevector(BeamGeometry(780.24e-9, 480e-9))
    assert lam == pytest.approx(1.0 / (1 / 480e-9 - 1 / 780.24e-9), rel=1e-12)
    assert k * lam == pytest.approx(2 * math.pi)
    _, lam_co = spin_wave_wavevector(BeamGeometry(780.24e-9, 480e-9, COPROPAGATING))
    assert lam_co == pytest.approx(1.0 / (1 / 480e-9 + 1 / 780.24e-9), rel=1e-12)


def test_polarizability_ratios():
    assert RB87.polarizability_ratio(1064e-9) == pytest.approx(-0.80023, abs=1e-5)
    assert 1 - RB87.polarizability_ratio(532e-9) == pytest.approx(0.44)
    with pytest.raises(ConfigError):
        RB87.ground_polarizability(850e-9)


def test_photoionization_lifetime():
    opt = trap_optics(constants.k_B * 18e-6, 687.3, 1.2e-24, 1064e-9)
    assert opt.pi_lifetime == pytest.approx(1.3364897777e-3, rel=1e-8)
    assert trap_optics(constants.k_B * 18e-6, 687.3, 0.0, 1064e-9).stable


def test_single_quantity_helpers():
    omega = 2 * math.pi * 96
    assert gravitational_sag(omega) == pytest.approx(9.8 / omega**2)
    assert cloud_radius(0.2e-6, RB87.mass, omega) == pytest.approx(SCALES["sigma_x"], rel=1e-9)
    assert oscillator_length(omega, RB87.mass) == pytest.approx(
        math.sqrt(constants.hbar / (RB87.mass * omega)))
    lam = de_broglie_wavelength(2e-6, RB87.mass)
    assert lam == pytest.approx(2 * math.pi * constants.hbar
                                / math.sqrt(2 * math.pi * RB87.mass * constants.k_B * 2e-6))
    assert transferred_radius(7e-6, 8e-6) < 8e-6


def test_mixing_angle_limits():
    assert mixing_angle(1.0, 100.0, math.inf) == 0.0
    assert mixing_angle(1.0, 100.0, 0.0) == pytest.approx(math.pi / 2)
    with pytest.raises(ConfigError):
        mixing_angle(1.0, 100.0, -1.0)


@pytest.mark.parametrize("factory", [
    lambda: BeamGeometry(-1.0, 480e-9),
    lambda: BeamGeometry(780e-9, 480e-9, "sideways"),
    lambda: TrapConfig(-1.0, 0.5),
    lambda: ThermalEnsemble(-1e-6),
    lambda: ThermalEnsemble(0.0).beta,
])
def test_invalid_inputs_raise(factory):
    with pytest.raises(ConfigError):
        factory()


@given(st.floats(1e-3, 1e3), st.sampled_from(["K", "mK", "uK", "nK", "s", "ms", "us", "ns",
                                              "m", "mm", "um", "nm", "Hz", "kHz"]))
def test_unit_round_trip(value, unit):
    assert constants.from_si(constants.to_si(value, unit), unit) == pytest.approx(value, rel=1e-14)


def test_frequency_units_are_angular():
    assert constants.to_si(96.0, "Hz") == pytest.approx(2 * math.pi * 96.0)
    assert constants.to_si(1.0, "kHz") == pytest.approx(2 * math.pi * 1e3)
    assert constants.au_to_si(constants.si_to_au(3e-39)) == pytest.approx(3e-39)


@given(st.floats(1e-9, 1e-3))
def test_thermal_velocity_scaling(T):
    assert thermal_velocity(4 * T, RB87.mass) == pytest.approx(2 * thermal_velocity(T, RB87.mass))
    assert np.isfinite(thermal_velocity(T, RB87.mass))
