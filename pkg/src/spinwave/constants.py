"""Physical constants and unit conversions.

Everything inside the package is SI.  The helpers at the bottom convert the
laboratory units used at the command-line boundary (µK, µs, µm, nm, Hz, mW,
atomic units of polarizability) into SI and back.
"""

import math

from scipy import constants as _sc

hbar = _sc.hbar
k_B = _sc.k
epsilon_0 = _sc.epsilon_0
c = _sc.c
e = _sc.e
m_e = _sc.m_e

#: mass of a 87Rb atom in kg
M_RB87 = 1.44316e-25

#: standard gravity as used for the sag estimates, m/s^2
G_DEFAULT = 9.8

#: one atomic unit of polarizability in J/(V/m)^2
AU_POLARIZABILITY = 1.649e-41

# scale factors from laboratory units to SI
MICRO = 1e-6
NANO = 1e-9
MILLI = 1e-3
PICO = 1e-12

UNIT_SCALE = {
    "K": 1.0,
    "mK": MILLI,
    "uK": MICRO,
    "nK": NANO,
    "s": 1.0,
    "ms": MILLI,
    "us": MICRO,
    "ns": NANO,
    "m": 1.0,
    "mm": MILLI,
    "um": MICRO,
    "nm": NANO,
    "W": 1.0,
    "mW": MILLI,
    "uW": MICRO,
}


def to_si(value, unit):
    """Convert ``value`` given in ``unit`` to SI.

    Frequencies given in ``"Hz"`` or ``"kHz"`` are returned as angular
    frequencies in rad/s, ``"rad/s"`` passes through unchanged.
    """
    if unit == "Hz":
        return 2.0 * math.pi * value
    if unit == "kHz":
        return 2.0e3 * math.pi * value
    if unit == "rad/s":
        return value
    if unit == "au":
        return value * AU_POLARIZABILITY
    try:
        return value * UNIT_SCALE[unit]
    except KeyError:
        raise ValueError(f"unknown unit {unit!r}") from None


def from_si(value, unit):
    """Inverse of :func:`to_si`."""
    if unit == "Hz":
        return value / (2.0 * math.pi)
    if unit == "kHz":
        return value / (2.0e3 * math.pi)
    if unit == "rad/s":
        return value
    if unit == "au":
        return value / AU_POLARIZABILITY
    try:
        return value / UNIT_SCALE[unit]
    except KeyError:
        raise ValueError(f"unknown unit {unit!r}") from None


def au_to_si(alpha_au):
    """Polarizability in atomic units to J/(V/m)^2."""
    return alpha_au * AU_POLARIZABILITY


def si_to_au(alpha_si):
    """Polarizability in J/(V/m)^2 to atomic units."""
    return alpha_si / AU_POLARIZABILITY
