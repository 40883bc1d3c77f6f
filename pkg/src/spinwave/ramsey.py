"""Ramsey fringes, fringe visibility and first-order spatial coherence.

Two short pulses separated by a dark time t give

    P_r(t) = 2 |c_a c_b|^2 (C(0) + Re[exp(i Delta_R t) C(t)])

with the same coherence C(t) that governs the retrieval efficiency of a
stored spin wave.  Pulses are described by position-independent
coefficients c_a, c_b, which holds for a plane-wave mode at any pulse area
or for any mode at small pulse area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .constants import hbar
from .errors import ConfigError, VisibilityError
from .models import CoherenceSeries

PLANE_WAVE = "plane_wave"
SMALL_AREA = "small_area"

#: largest |c_b| = |phi|/2 accepted in the small-area regime
SMALL_AREA_LIMIT = 0.1

Coherence = Union[CoherenceSeries, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class RamseyConfig:
    """Pulse coefficients, detuning and dark-time coherence of a Ramsey sequence.

    Parameters
    ----------
    detuning : float
        Delta_R in rad/s.
    c_a, c_b : complex
        Pulse coefficients, U_p = c_a + c_b S_r^dag - c_b^* S_r.
    coherence : CoherenceSeries or callable
        Source of C(t).  A series is interpolated linearly inside its time
        range; a callable must accept an array of times in s.
    regime : {"plane_wave", "small_area"}
    """

    detuning: float
    c_a: complex
    c_b: complex
    coherence: Coherence
    regime: str = PLANE_WAVE

    def __post_init__(self):
        a, b = abs(self.c_a), abs(self.c_b)
        if self.regime == PLANE_WAVE:
            if a * a + b * b > 1.0 + 1e-12:
                raise ConfigError("|c_a|^2 + |c_b|^2 must not exceed 1")
        elif self.regime == SMALL_AREA:
            # c_a = 1 to first order in the pulse area
            if b > SMALL_AREA_LIMIT or a > 1.0 + 1e-12:
                raise ConfigError(f"small-area pulses need |c_b| <= {SMALL_AREA_LIMIT} and |c_a| <= 1")
        else:
            raise ConfigError(f"unsupported Ramsey regime {self.regime!r}")

    @classmethod
    def from_pulse_area(cls, area, detuning, coherence, regime=PLANE_WAVE):
        """Coefficients for pulse area ``area`` (may be complex)."""
        mag = abs(area)
        if regime == SMALL_AREA:
            return cls(detuning, 1.0, -0.5j * area, coherence, regime)
        if mag == 0:
            return cls(detuning, 1.0, 0.0, coherence, regime)
        return cls(detuning, math.cos(mag / 2), -1j * area / mag * math.sin(mag / 2), coherence, regime)

    def C(self, t):
        t = np.atleast_1d(np.asarray(t, float))
        src = self.coherence
        if isinstance(src, CoherenceSeries):
            if t.min() < src.times[0] or t.max() > src.times[-1]:
                raise ConfigError("times outside the range of the coherence series")
            return np.interp(t, src.times, src.C.real) + 1j * np.interp(t, src.times, src.C.imag)
        return np.asarray(src(t), complex) * np.ones_like(t)

    @property
    def C0(self):
        src = self.coherence
        if isinstance(src, CoherenceSeries):
            return float(src.mu0)
        return float(np.real(self.C(0.0)[0]))


def ramsey_signal(t, cfg: RamseyConfig):
    """Probability P_r of finding the atom in |r> after the second pulse.

    Returns
    -------
    ndarray
        (P_r0/2)(1 + V cos(Delta_R t + theta)) with P_r0 = 4|c_a c_b|^2 C(0),
        V = |C(t)/C(0)| and theta = arg C(t).
    """
    C0 = cfg.C0
    if C0 == 0:
        raise VisibilityError("C(0) = 0: fringe visibility is undefined")
    t = np.atleast_1d(np.asarray(t, float))
    C = cfg.C(t)
    P0 = 4.0 * abs(cfg.c_a * cfg.c_b) ** 2 * C0
    return 0.5 * P0 * (1.0 + np.abs(C / C0) * np.cos(cfg.detuning * t + np.angle(C)))


def visibility(series: CoherenceSeries):
    """Fringe visibility V(t) = |C(t)/C(0)|, with C(0) = mu(0)."""
    if series.mu0 == 0:
        raise VisibilityError("C(0) = 0: fringe visibility is undefined")
    return np.abs(series.C / series.mu0)


def g1_thermal(r, lambda_dB):
    """Normalized first-order coherence of a homogeneous thermal gas.

    g1(r) = exp(-pi r^2 / lambda_dB^2), so that |g1|^2 = exp(-2 pi r^2 / lambda_dB^2).
    """
    r = np.asarray(r, float)
    return np.exp(-math.pi * r**2 / lambda_dB**2)


def recoil_velocity(k_R, mass):
    return hbar * abs(k_R) / mass


def eta_from_g1(v_R, t, lambda_dB):
    """eta/eta_0 = |g1(v_R t)|^2 for a homogeneous uncorrelated thermal gas."""
    return g1_thermal(v_R * np.asarray(t, float), lambda_dB) ** 2
