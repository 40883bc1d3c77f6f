"""Closed-form decay models of the retrieval efficiency.

Every function returns the efficiency normalized to its value at zero dark
time, eta(t)/eta_0.  The mechanisms are

* photon recoil combined with thermal motion (Gaussian decay),
* a harmonic trap with gravitational sag, in the frozen-motion limit,
* an exact solution for a linear differential potential,
* Markovian population or phase decay (exponential),
* release from a harmonic trap, for a condensate and for a hot gas,
* the energy-proportional phase mapping of a thermal gas in two harmonic traps,
* a general frozen-motion integral over arbitrary potentials.

The scenario classes at the bottom wrap these functions with their
parameters so that mechanisms can be multiplied and sampled uniformly.
Timescales that are infinite (no decay) are passed as ``None``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .constants import M_RB87, hbar
from .errors import ConfigError, QuadratureError

CARTESIAN = "cartesian"
MIXTURE = "mixture"

KUHR_INTERMEDIATE = "kuhr"
KUHR_RAMAN_NATH = "raman-nath"


# --- sampled data ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DecayCurve:
    """Sampled efficiency curve.

    ``eta`` holds eta/eta_0 unless a model with ``eta0 < 1`` produced it.
    ``warnings`` carries validity-window notes of the generating model.
    """

    times: np.ndarray
    eta: np.ndarray
    sigma_eta: Optional[np.ndarray] = None
    warnings: tuple = ()

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        eta = np.atleast_1d(np.asarray(self.eta, dtype=float))
        if t.shape != eta.shape or t.ndim != 1:
            raise ConfigError("times and eta must be 1D arrays of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ConfigError("times must be strictly increasing")
        if np.any(eta < 0) or not np.all(np.isfinite(eta)):
            raise ConfigError("efficiencies must be finite and nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "eta", eta)
        if self.sigma_eta is not None:
            s = np.atleast_1d(np.asarray(self.sigma_eta, dtype=float))
            if s.shape != t.shape or np.any(s < 0):
                raise ConfigError("sigma_eta must match times and be nonnegative")
            object.__setattr__(self, "sigma_eta", s)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self):
        return self.times.size


@dataclass(frozen=True, eq=False)
class CoherenceSeries:
    """Thermally averaged coherence C(t) with its mode-overlap normalization.

    ``mu0`` is mu(0) and ``mu_t`` the samples of mu(t); for a plane-wave beam
    both are 1.
    """

    times: np.ndarray
    C: np.ndarray
    mu0: float = 1.0
    mu_t: Optional[np.ndarray] = None

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        C = np.atleast_1d(np.asarray(self.C, dtype=complex))
        if C.shape != t.shape:
            raise ConfigError("C must have one sample per time")
        mu_t = np.full(t.shape, float(self.mu0)) if self.mu_t is None else np.asarray(self.mu_t, float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "mu_t", np.atleast_1d(mu_t))

    @property
    def eta(self):
        """eta/eta_0 = |C|^2 / (mu(0) mu(t))."""
        return np.abs(self.C) ** 2 / (self.mu0 * self.mu_t)

    def curve(self, warnings=()):
        return DecayCurve(self.times, self.eta, warnings=warnings)


def _t(t):
    return np.asarray(t, dtype=float)


# --- photon recoil ----------------------------------------------------------

def recoil_time(k_R, sigma_v):
    """Gaussian 1/e time 1/(k_R sigma_v) of recoil dephasing, None if no decay."""
    if sigma_v < 0:
        raise ConfigError("sigma_v must be nonnegative")
    rate = abs(k_R) * sigma_v
    return None if rate == 0 else 1.0 / rate


def recoil_time_from_coherence_length(lambda_dB, v_R):
    """Same timescale written as lambda_dB / (v_R sqrt(2 pi)).

    The coherence length of a thermal gas is travelled at the recoil velocity.
    """
    if v_R == 0:
        return None
    return lambda_dB / (abs(v_R) * math.sqrt(2.0 * math.pi))


def eta_recoil(t, k_R, sigma_v):
    """Efficiency decay exp(-t^2/tau_R^2) from recoil and thermal motion.

    Parameters
    ----------
    t : array_like
        Dark time in s.
    k_R : float
        Spin-wave wave number in 1/m.
    sigma_v : float
        1D rms thermal velocity in m/s.
    """
    tau = recoil_time(k_R, sigma_v)
    t = _t(t)
    if tau is None:
        return np.ones_like(t)
    return np.exp(-((t / tau) ** 2))


def coherence_recoil(t, k_R, sigma_v, mass):
    """Complex coherence exp(-i hbar k_R^2 t / 2m) exp(-t^2/(2 tau_R^2)) of a homogeneous gas."""
    t = _t(t)
    phase = np.exp(-1j * hbar * k_R**2 * t / (2.0 * mass))
    return phase * np.sqrt(eta_recoil(t, k_R, sigma_v))


# --- harmonic trap with gravitational sag ---------------------------------------

@dataclass(frozen=True)
class TrapTimescales:
    """tau_F (linear part) and tau_kappa (quadratic part); None means no decay."""

    tau_F: Optional[float]
    tau_kappa: Optional[float]


def harmonic_trap_timescales(scales) -> TrapTimescales:
    """Decay times of the differential light shift in a sagged harmonic trap.

    Parameters
    ----------
    scales : DerivedScales
        Supplies ``w_r``, ``F``, ``kappa_g`` and ``kappa_r``.
    """
    w_r = scales.w_r
    if w_r <= 0:
        raise ConfigError("w_r must be positive")
    dk = abs(scales.kappa_g - scales.kappa_r)
    tau_F = None if scales.F == 0 else 2.0 * hbar / (w_r * abs(scales.F))
    tau_kappa = None if dk == 0 else 4.0 * hbar / (w_r**2 * dk)
    return TrapTimescales(tau_F, tau_kappa)


def eta_harmonic_sag(t, tau_F, tau_kappa):
    """Frozen-motion decay in a displaced harmonic differential potential.

    eta/eta_0 = exp(-(t/tau_F)^2 / |zeta|^2) / |zeta|^2 with
    |zeta|^2 = 1 + (t/tau_kappa)^2.  Either timescale may be None.
    """
    t = _t(t)
    zeta_sq = np.ones_like(t) if tau_kappa is None else 1.0 + (t / tau_kappa) ** 2
    expo = np.zeros_like(t) if tau_F is None else (t / tau_F) ** 2
    return np.exp(-expo / zeta_sq) / zeta_sq


def raman_nath_limits(mass, kappa_g, kappa_r, w_r, sigma_v, k_R=0.0):
    """Dark-time bounds of the frozen-motion approximation in a harmonic trap.

    Returns a dict of named times; the approximation needs t well below each.
    """
    limits = {}
    dk = abs(kappa_r - kappa_g)
    if dk > 0:
        limits["oscillation"] = 2.0 * math.pi * math.sqrt(mass / dk)
    if sigma_v > 0:
        limits["thermal motion"] = w_r / (2.0 * sigma_v)
    v_R = hbar * abs(k_R) / mass
    if v_R > 0:
        limits["recoil motion"] = w_r / (2.0 * v_R)
    limits["zero-point spreading"] = mass * w_r**2 / (4.0 * hbar)
    return limits


def window_warnings(limits, times, margin=0.1, label="frozen-motion approximation"):
    """Warnings for every bound that the largest time exceeds by more than ``margin``."""
    times = np.atleast_1d(_t(times))
    if times.size == 0:
        return ()
    t_max = float(times.max())
    out = []
    for name, bound in limits.items():
        if t_max > margin * bound:
            out.append(
                f"{label}: t_max = {t_max:.3g} s exceeds {margin:g} x {name} bound {bound:.3g} s"
            )
    return tuple(out)


# --- linear potential, exact ----------------------------------------------------

def expansion_time(mass, w):
    """tau_w = m w^2 / hbar, the zero-point spreading time out of the beam."""
    return mass * w**2 / hbar


def _force_frame(k_R, force):
    k = np.zeros(3)
    k[:] = np.broadcast_to(np.asarray(k_R, float), 3)
    f = np.zeros(3)
    f[:] = np.broadcast_to(np.asarray(force, float), 3) if np.ndim(force) else (force, 0.0, 0.0)
    if f[2] != 0:
        raise ConfigError("a force component along the beam axis is not supported")
    F = math.hypot(f[0], f[1])
    if F == 0:
        return k[0], k[1], k[2], 0.0
    ex = f[:2] / F
    k_par = k[0] * ex[0] + k[1] * ex[1]
    k_perp = -k[0] * ex[1] + k[1] * ex[0]
    return k_par, k_perp, k[2], F


def eta_linear_force_exact(t, w, sigma_v, mass, k_R=(0.0, 0.0, 0.0), force=0.0):
    """Exact decay of a homogeneous thermal gas in a uniform force field.

    Parameters
    ----------
    t : array_like
        Dark time in s.
    w : float
        Signal beam waist in m.
    sigma_v : float
        1D rms thermal velocity in m/s.
    mass : float
        Atomic mass in kg.
    k_R : sequence of 3 floats
        Spin-wave wave vector; the third component is along the beam.
    force : float or sequence of 3 floats
        Differential force.  A scalar is taken along x; a vector must be
        transverse and the transverse frame is rotated to align it with x.

    Returns
    -------
    ndarray
        eta/eta_0 including zero-point spreading, thermal exit from the beam,
        recoil and the momentum kick of the force.
    """
    kx, ky, kz, F = _force_frame(k_R, force)
    t = _t(t)
    tau_w = expansion_time(mass, w)
    zeta = 1.0 + 1j * t / tau_w + (sigma_v * t / w) ** 2
    k_F = F * t / hbar
    re = np.real((zeta - 1.0) / zeta)
    expo = -((t * kz * sigma_v) ** 2) - 0.25 * w**2 * k_F**2
    expo = expo - w**2 * (ky**2 + (kx + k_F) ** 2) * re
    return np.exp(expo) / np.abs(zeta) ** 2


def force_time(w, force):
    """tau_F,inf = 2 hbar / (w |F|), None for F = 0."""
    return None if force == 0 else 2.0 * hbar / (w * abs(force))


def eta_force_gaussian(t, w, force):
    """Gaussian limit exp(-t^2/tau_F,inf^2) for a point-like velocity distribution."""
    return eta_harmonic_sag(t, force_time(w, force), None)


def eta_zero_point_spreading(t, tau_w):
    """Algebraic limit 1/(1 + t^2/tau_w^2) in two transverse dimensions."""
    return 1.0 / (1.0 + (_t(t) / tau_w) ** 2)


def eta_thermal_exit(t, sigma_v, w):
    """Limit 1/(1 + sigma_v^2 t^2/w^2)^2 of atoms leaving the beam by thermal motion."""
    return 1.0 / (1.0 + (sigma_v * _t(t) / w) ** 2) ** 2


def eta_transverse_recoil(t, w, sigma_v, k_R):
    """Force-free high-temperature form with a transverse recoil component.

    Uses |zeta| = 1 + sigma_v^2 t^2/w^2.
    """
    k = np.broadcast_to(np.asarray(k_R, float), 3)
    t = _t(t)
    z = 1.0 + (sigma_v * t / w) ** 2
    expo = -((t * sigma_v) ** 2) * (k[2] ** 2 + (k[0] ** 2 + k[1] ** 2) / z)
    return np.exp(expo) / z**2


# --- Markovian decay ------------------------------------------------------

def eta_exponential(t, gamma_rg):
    """exp(-gamma t), for both dephasing and population decay of |r>."""
    if gamma_rg < 0:
        raise ConfigError("decay rate must be nonnegative")
    return np.exp(-gamma_rg * _t(t))


def eta_gaussian_offset(t, tau_offset):
    """Phenomenological factor exp(-t^2/tau_off^2), None for no decay."""
    return eta_harmonic_sag(t, tau_offset, None)


# --- release from a harmonic trap -----------------------------------------------

def bec_release_time(mass, a0, w):
    """tau_a = m a0 w / hbar."""
    return mass * a0 * w / hbar


def eta_release_bec(t, a0, w, omega):
    """Exact 1D decay of a released noninteracting condensate.

    Parameters
    ----------
    t : array_like
        Dark time in s.
    a0 : float
        Oscillator length of the trap before release, in m.
    w : float
        Signal beam waist in m.
    omega : float
        Trap angular frequency before release.
    """
    if a0 <= 0 or w <= 0:
        raise ConfigError("a0 and w must be positive")
    t = _t(t)
    a2 = a0**2
    w2 = w**2
    wt2 = (omega * t) ** 2
    num = w2**2 * (2 * a2 + w2) * (2 * a2 + w2 + 2 * a2 * wt2)
    den = (2 * a2 + w2) ** 2 * (w2 + a2 * wt2) ** 2 + 4 * a2**4 * wt2
    return np.sqrt(num / den)


def eta_release_bec_wide(t, tau_a):
    """Limit a0 << w: sqrt(1 + 2 t^2/tau_a^2) / (1 + t^2/tau_a^2)."""
    x = (_t(t) / tau_a) ** 2
    return np.sqrt(1.0 + 2.0 * x) / (1.0 + x)


def eta_release_bec_wide_asymptotic(t, tau_a):
    """Single-scale form 1/sqrt(1 + t^2/(2 tau_a^2)) of the a0 << w limit.

    It shares the t >> tau_a tail sqrt(2) tau_a / t of the limit but not its
    quartic onset.
    """
    return 1.0 / np.sqrt(1.0 + _t(t) ** 2 / (2.0 * tau_a**2))


def eta_release_bec_narrow(t, tau_w):
    """Limit w << a0: 1/sqrt(1 + t^2/tau_w^2)."""
    return 1.0 / np.sqrt(1.0 + (_t(t) / tau_w) ** 2)


def release_time(sigma_v, w, mass):
    """tau_rel = w / sqrt(sigma_v^2 + hbar^2/(m^2 w^2))."""
    return w / math.sqrt(sigma_v**2 + (hbar / (mass * w)) ** 2)


def eta_release_thermal(t, sigma_x, sigma_v, w, mass, dims=1):
    """Overlap model for a hot gas released from a harmonic trap.

    Phases are discarded and only the spatial overlap of the expanding
    ground and Rydberg clouds with the beam is kept.  ``dims=2`` squares the
    1D result.
    """
    if dims not in (1, 2):
        raise ConfigError("dims must be 1 or 2")
    t = _t(t)
    sg2 = sigma_x**2 + (sigma_v * t) ** 2
    sr0_2 = 1.0 / (1.0 / sigma_x**2 + 4.0 / w**2)
    svr2 = sigma_v**2 + (hbar / (mass * w)) ** 2
    sr2 = sr0_2 + svr2 * t**2
    a = 1.0 / (4.0 * sg2) + 1.0 / w**2
    eta = np.sqrt(a) / np.sqrt(sr2) / (a + 1.0 / (4.0 * sr2))
    return eta**dims


def eta_release_rel(t, tau_rel, dims=1):
    """Small-beam limit sqrt(1 + 4 t^2/tau_rel^2) / (1 + 2 t^2/tau_rel^2) per dimension."""
    x = (_t(t) / tau_rel) ** 2
    return (np.sqrt(1.0 + 4.0 * x) / (1.0 + 2.0 * x)) ** dims


def eta_release_rel_asymptotic(t, tau_rel, dims=1):
    """Single-scale form 1/sqrt(1 + t^2/tau_rel^2) per dimension, exact for t >> tau_rel."""
    return (1.0 + (_t(t) / tau_rel) ** 2) ** (-dims / 2.0)


# --- energy-proportional level mapping -------------------------------------------

def kuhr_times(beta, kappa_g, kappa_r):
    """Return (K, tau_kappa') for thermal dephasing between two harmonic traps.

    K = beta hbar omega_g / (omega_g - omega_r) and
    tau_kappa' = beta hbar kappa_g / |kappa_g - kappa_r|; None when the traps
    are equal.  K is None also when kappa_r <= 0 (no bound Rydberg levels).
    """
    if kappa_g <= 0:
        raise ConfigError("kappa_g must be positive")
    if kappa_r == kappa_g:
        return None, None
    tau = beta * hbar * kappa_g / abs(kappa_g - kappa_r)
    if kappa_r <= 0:
        return None, tau
    s = math.sqrt(kappa_r / kappa_g)
    return abs(beta * hbar / (1.0 - s)), tau


def kuhr_window(beta, kappa_g, kappa_r, mass):
    """Ratios describing the intermediate-temperature window.

    Returns ``(k_B T / hbar omega_g, hbar omega_g a_g / (|Delta a| k_B T))``;
    both must be large for the energy-proportional mapping to hold.
    """
    omega_g = math.sqrt(kappa_g / mass)
    kT = 1.0 / beta
    lower = kT / (hbar * omega_g)
    if kappa_r <= 0 or kappa_r == kappa_g:
        upper = math.inf if kappa_r == kappa_g else 0.0
    else:
        # a ~ kappa^(-1/4)
        rel = abs(1.0 - (kappa_g / kappa_r) ** 0.25)
        upper = hbar * omega_g / (rel * kT)
    return lower, upper


def eta_kuhr(t, beta, kappa_g, kappa_r, dims=3, variant=KUHR_INTERMEDIATE):
    """Thermal dephasing of a gas held in two different harmonic traps.

    Parameters
    ----------
    variant : {"kuhr", "raman-nath"}
        ``"kuhr"``: |C|^2 = (1 + t^2/K^2)^(-d), from the energy-proportional
        mapping of levels.  ``"raman-nath"``: |C|^2 = (1 + t^2/tau'^2)^(-d/2),
        the frozen-motion result at high temperature.
    """
    if dims not in (1, 2, 3):
        raise ConfigError("dims must be 1, 2 or 3")
    K, tau = kuhr_times(beta, kappa_g, kappa_r)
    t = _t(t)
    if variant == KUHR_INTERMEDIATE:
        if kappa_r <= 0:
            raise ConfigError("the level-mapping variant needs a confining Rydberg trap")
        if K is None:
            return np.ones_like(t)
        return (1.0 + (t / K) ** 2) ** (-dims)
    if variant == KUHR_RAMAN_NATH:
        if tau is None:
            return np.ones_like(t)
        return (1.0 + (t / tau) ** 2) ** (-dims / 2.0)
    raise ConfigError(f"unknown variant {variant!r}")


# --- general frozen-motion integral ----------------------------------------------

def raman_nath_general(times, density, mode_sq, dV, half_width, center=(0.0, 0.0),
                       volume=1.0, rtol=1e-6):
    """Frozen-motion coherence for arbitrary transverse potentials.

    C(t) = V * integral of rho_g |v|^2 exp(-i dV t / hbar) over the plane,
    with ``dV = V_r - V_g``.  The integral runs over a square of half width
    ``half_width`` about ``center``, which should cover six standard
    deviations of rho_g |v|^2.

    Parameters
    ----------
    times : array_like
        Dark times in s.
    density, mode_sq, dV : callable
        Functions of ``(x, y)`` in SI units.
    half_width : float
        Half width of the integration square in m.
    rtol : float
        Target relative accuracy of eta; efficiencies below 1e-3 rtol are
        resolved in absolute terms only.

    Returns
    -------
    C : ndarray of complex
    eta : ndarray
        |C(t)/C(0)|^2.

    Raises
    ------
    QuadratureError
        When the reported error estimate exceeds the tolerance.
    """
    times = np.atleast_1d(_t(times))
    x0, y0 = center
    ranges = [(y0 - half_width, y0 + half_width), (x0 - half_width, x0 + half_width)]
    # QUADPACK error estimates of nested integrals are pessimistic; run tighter
    # than rtol and keep the inner level tighter than the outer one
    inner_rel = max(1e-5 * rtol, 1e-13)
    outer_rel = max(1e-3 * rtol, 1e-12)

    def nquad(f, scale):
        opts = [{"epsrel": inner_rel, "epsabs": 1e-3 * inner_rel * scale, "limit": 200},
                {"epsrel": outer_rel, "epsabs": 1e-3 * outer_rel * scale, "limit": 200}]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.nquad(f, ranges, opts=opts)

    def weight(y, x):
        return density(x, y) * mode_sq(x, y)

    c0, err0 = nquad(weight, 0.0)
    if c0 <= 0:
        raise QuadratureError("normalization integral is not positive", achieved=err0)
    if err0 > rtol * abs(c0):
        raise QuadratureError(
            f"normalization integral reached only {err0 / abs(c0):.2e} relative accuracy",
            achieved=err0 / abs(c0),
        )
    out = np.empty(times.size, complex)
    for i, t in enumerate(times):
        if t == 0:
            out[i] = c0
            continue
        re, err_re = nquad(lambda y, x: weight(y, x) * math.cos(dV(x, y) * t / hbar), c0)
        im, err_im = nquad(lambda y, x: -weight(y, x) * math.sin(dV(x, y) * t / hbar), c0)
        value = complex(re, im)
        # error of eta = |C/C0|^2, relative with an absolute floor of 1e-3 rtol
        eta_t = abs(value / c0) ** 2
        d_eta = 2.0 * abs(value) * math.hypot(err_re, err_im) / c0**2 + 2.0 * eta_t * err0 / c0
        if d_eta > rtol * eta_t + 1e-3 * rtol:
            raise QuadratureError(
                f"quadrature at t = {t:.3g} s reached only {d_eta / eta_t:.2e} relative accuracy",
                achieved=d_eta / eta_t,
            )
        out[i] = value
    C = volume * out
    eta = np.abs(out / c0) ** 2
    return C, eta


def gaussian_trap_integrands(sigma_x, w, kappa_g, kappa_r, x0):
    """Gaussian cloud, Gaussian beam and quadratic trap potentials.

    The ground trap is centred on the cloud, the Rydberg trap on ``x = x0``.
    Returns ``(density, mode_sq, dV, half_width)`` for :func:`raman_nath_general`.
    """
    def density(x, y):
        return math.exp(-(x * x + y * y) / (2 * sigma_x**2)) / (2 * math.pi * sigma_x**2)

    def mode_sq(x, y):
        return 2.0 / (math.pi * w**2) * math.exp(-2.0 * (x * x + y * y) / w**2)

    def dV(x, y):
        return 0.5 * kappa_r * ((x - x0) ** 2 + y * y) - 0.5 * kappa_g * (x * x + y * y)

    s_eff = (1.0 / sigma_x**2 + 4.0 / w**2) ** -0.5
    return density, mode_sq, dV, 6.0 * s_eff


# --- scenarios -------------------------------------------------------------------

@dataclass(frozen=True, kw_only=True)
class ScenarioModel:
    """Base class of all decay scenarios.

    Subclasses implement :meth:`relative`, which returns eta/eta_0.
    """

    kind = "base"
    eta0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eta0 <= 1.0:
            raise ConfigError("eta0 must lie in (0, 1]")

    def relative(self, t):
        raise NotImplementedError

    def eta(self, t):
        return self.eta0 * self.relative(t)

    def validity_warnings(self, times):
        return ()

    def curve(self, times, normalized=True):
        """Sample the model into a :class:`DecayCurve`."""
        times = np.atleast_1d(_t(times))
        values = self.relative(times) if normalized else self.eta(times)
        return DecayCurve(times, values, warnings=self.validity_warnings(times))


@dataclass(frozen=True, kw_only=True)
class Recoil(ScenarioModel):
    kind = "recoil"
    k_R: float
    sigma_v: float

    @property
    def tau(self):
        return recoil_time(self.k_R, self.sigma_v)

    def relative(self, t):
        return eta_recoil(t, self.k_R, self.sigma_v)


@dataclass(frozen=True, kw_only=True)
class HarmonicSag(ScenarioModel):
    kind = "harmonic_sag"
    tau_F: Optional[float]
    tau_kappa: Optional[float]
    limits: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_scales(cls, scales, k_R=0.0, eta0=1.0):
        ts = harmonic_trap_timescales(scales)
        limits = raman_nath_limits(scales.mass, scales.kappa_g, scales.kappa_r,
                                   scales.w_r, scales.sigma_v, k_R)
        return cls(tau_F=ts.tau_F, tau_kappa=ts.tau_kappa, limits=limits, eta0=eta0)

    def relative(self, t):
        return eta_harmonic_sag(t, self.tau_F, self.tau_kappa)

    def validity_warnings(self, times):
        return window_warnings(self.limits, times)


@dataclass(frozen=True, kw_only=True)
class LinearForceExact(ScenarioModel):
    kind = "linear_force_exact"
    w: float
    sigma_v: float
    mass: float = M_RB87
    k_R: tuple = (0.0, 0.0, 0.0)
    force: object = 0.0

    def __post_init__(self):
        super().__post_init__()
        _force_frame(self.k_R, self.force)

    def relative(self, t):
        return eta_linear_force_exact(t, self.w, self.sigma_v, self.mass, self.k_R, self.force)


@dataclass(frozen=True, kw_only=True)
class Exponential(ScenarioModel):
    kind = "exponential"
    gamma: float

    def relative(self, t):
        return eta_exponential(t, self.gamma)


@dataclass(frozen=True, kw_only=True)
class GaussianOffset(ScenarioModel):
    """Phenomenological Gaussian factor for a decay of unidentified origin."""

    kind = "gaussian_offset"
    tau: Optional[float]

    def relative(self, t):
        return eta_gaussian_offset(t, self.tau)


@dataclass(frozen=True, kw_only=True)
class ReleaseBEC(ScenarioModel):
    kind = "release_bec"
    a0: float
    w: float
    omega: float

    def relative(self, t):
        return eta_release_bec(t, self.a0, self.w, self.omega)


@dataclass(frozen=True, kw_only=True)
class ReleaseThermal(ScenarioModel):
    kind = "release_thermal"
    sigma_x: float
    sigma_v: float
    w: float
    mass: float = M_RB87
    dims: int = 2
    psd: Optional[float] = None

    def relative(self, t):
        return eta_release_thermal(t, self.sigma_x, self.sigma_v, self.w, self.mass, self.dims)

    def validity_warnings(self, times):
        if self.psd is not None and self.psd >= 0.1:
            return (f"hot-gas overlap model used at phase-space density {self.psd:.3g}",)
        return ()


@dataclass(frozen=True, kw_only=True)
class Kuhr(ScenarioModel):
    kind = "kuhr"
    beta: float
    kappa_g: float
    kappa_r: float
    dims: int = 3
    variant: str = KUHR_INTERMEDIATE
    mass: float = M_RB87
    margin: float = 5.0

    def relative(self, t):
        return eta_kuhr(t, self.beta, self.kappa_g, self.kappa_r, self.dims, self.variant)

    def validity_warnings(self, times):
        if self.variant != KUHR_INTERMEDIATE:
            return ()
        lower, upper = kuhr_window(self.beta, self.kappa_g, self.kappa_r, self.mass)
        out = []
        if lower < self.margin:
            out.append(f"level-mapping model: k_B T / hbar omega_g = {lower:.3g} is not large")
        if upper < self.margin:
            out.append(f"level-mapping model: temperature too high for the trap mismatch "
                       f"(window ratio {upper:.3g})")
        return tuple(out)


@dataclass(frozen=True, kw_only=True)
class RamanNathGeneral(ScenarioModel):
    kind = "raman_nath_general"
    density: Callable
    mode_sq: Callable
    dV: Callable
    half_width: float
    center: tuple = (0.0, 0.0)
    rtol: float = 1e-6
    limits: dict = field(default_factory=dict, compare=False)

    def relative(self, t):
        t = _t(t)
        flat = np.atleast_1d(t).ravel()
        order = np.argsort(flat)
        _, eta = raman_nath_general(flat[order], self.density, self.mode_sq, self.dV,
                                    self.half_width, self.center, rtol=self.rtol)
        out = np.empty_like(flat)
        out[order] = eta
        return out.reshape(t.shape)

    def validity_warnings(self, times):
        return window_warnings(self.limits, times)


@dataclass(frozen=True, kw_only=True)
class Composite(ScenarioModel):
    """Independent mechanisms multiplied in eta/eta_0.

    Multiplying mechanisms other than separate Cartesian directions is a
    modelling assumption.
    """

    kind = "composite"
    factors: tuple

    def __post_init__(self):
        super().__post_init__()
        if not self.factors:
            raise ConfigError("composite needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    def relative(self, t):
        out = np.ones_like(_t(t))
        for f in self.factors:
            out = out * f.relative(t)
        return out

    def validity_warnings(self, times):
        return tuple(w for f in self.factors for w in f.validity_warnings(times))


def compose(items: Sequence, mode=CARTESIAN, weights=None, times=None) -> DecayCurve:
    """Combine decay curves or models.

    Parameters
    ----------
    items : sequence of DecayCurve or ScenarioModel
        Models are sampled on ``times``.
    mode : {"cartesian", "mixture"}
        ``"cartesian"`` multiplies the eta/eta_0 factors; ``"mixture"``
        returns sum_n P_n eta_n.
    weights : sequence of float, optional
        Mixture weights P_n, nonnegative and summing to one within 1e-9.
    """
    if not items:
        raise ConfigError("nothing to compose")
    curves = []
    for item in items:
        if isinstance(item, ScenarioModel):
            if times is None:
                raise ConfigError("times are required to sample models")
            curves.append(item.curve(times))
        else:
            curves.append(item)
    t0 = curves[0].times
    for c in curves[1:]:
        if c.times.shape != t0.shape or not np.array_equal(c.times, t0):
            raise ConfigError("curves must share one time grid")
    warnings = tuple(w for c in curves for w in c.warnings)
    if mode == CARTESIAN:
        eta = np.prod([c.eta for c in curves], axis=0)
    elif mode == MIXTURE:
        if weights is None or len(weights) != len(curves):
            raise ConfigError("mixture needs one weight per curve")
        P = np.asarray(weights, float)
        if np.any(P < 0) or abs(P.sum() - 1.0) > 1e-9:
            raise ConfigError("mixture weights must be nonnegative and sum to 1")
        eta = np.tensordot(P, np.array([c.eta for c in curves]), axes=1)
    else:
        raise ConfigError(f"unknown composition mode {mode!r}")
    return DecayCurve(t0, eta, warnings=warnings)


def decay_time(model, level=math.exp(-1.0), t_max=None):
    """First time at which eta/eta_0 falls to ``level`` (default 1/e).

    ``model`` is a ScenarioModel or any callable of t.  Returns None when no
    crossing is found below ``t_max`` (default: searched up to 1e3 s).
    """
    f = model.relative if isinstance(model, ScenarioModel) else model
    g = lambda t: float(f(np.array([t]))[0]) - level
    hi = 1e-9
    limit = 1e3 if t_max is None else t_max
    while g(hi) > 0:
        hi *= 1.5
        if hi > limit:
            return None
    return optimize.brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-13)
