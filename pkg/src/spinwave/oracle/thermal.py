"""Thermal averaging of per-state overlaps and ready-made oracle scenarios.

The scenario functions set up grids, initial states and potentials for the
situations that have closed forms in :mod:`spinwave.models`, so that each
closed form can be checked against a first-principles propagation.
Two-dimensional results are products of independent 1D runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..constants import hbar, k_B
from ..errors import ConfigError, TailBoundError
from ..models import CoherenceSeries, DecayCurve
from .grid import (
    Grid1D,
    GridState,
    StorageOperator,
    hermite_functions,
    hermite_required_extent,
    propagate_overlaps,
)


@dataclass(frozen=True)
class ThermalSpec:
    """Gibbs weights p_n = (1 - q) q^n of a harmonic oscillator, q = exp(-beta hbar omega).

    The truncation n <= n_max must leave a tail sum q^(n_max + 1) below ``eps``.
    """

    beta: float
    omega: float
    n_max: int
    eps: float = 1e-4

    def __post_init__(self):
        if self.beta <= 0 or self.omega <= 0:
            raise ConfigError("beta and omega must be positive")
        tail = self.tail
        if tail >= self.eps:
            need = self.required_n_max(self.beta, self.omega, self.eps)
            raise TailBoundError(
                f"thermal tail {tail:.3g} above {self.eps:g}; n_max must be at least {need}",
                required_n_max=need,
            )

    @property
    def q(self):
        return math.exp(-self.beta * hbar * self.omega)

    @property
    def tail(self):
        return self.q ** (self.n_max + 1)

    @property
    def weights(self):
        q = self.q
        return (1.0 - q) * q ** np.arange(self.n_max + 1)

    @staticmethod
    def required_n_max(beta, omega, eps):
        x = beta * hbar * omega
        return max(0, int(math.ceil(-math.log(eps) / x)) - 1)

    @classmethod
    def from_ratio(cls, kT_over_hw, omega, eps=1e-4):
        """Spec for k_B T = kT_over_hw * hbar omega with the smallest admissible n_max."""
        beta = 1.0 / (kT_over_hw * hbar * omega)
        return cls(beta, omega, cls.required_n_max(beta, omega, eps), eps)


def thermal_efficiency(Q, M, M0, weights, times=None):
    """Thermal average of per-state overlaps.

    Parameters
    ----------
    Q, M : array, shape (states, times)
        Per-state coherence and normalization overlaps.
    M0 : array, shape (states,)
    weights : ThermalSpec or array of p_n
        A single weight ``[1.0]`` gives the condensate result.

    Returns
    -------
    DecayCurve, CoherenceSeries
    """
    Q = np.atleast_2d(Q)
    M = np.atleast_2d(M)
    M0 = np.atleast_1d(M0)
    p = weights.weights if isinstance(weights, ThermalSpec) else np.asarray(weights, float)
    if p.shape[0] != Q.shape[0]:
        raise ConfigError(f"{Q.shape[0]} states supplied for {p.shape[0]} weights")
    C = p @ Q
    mu_t = p @ M
    mu0 = float(p @ M0)
    if times is None:
        times = np.arange(Q.shape[1], dtype=float)
    series = CoherenceSeries(times, C, mu0, mu_t)
    eta = np.minimum(series.eta, 1.0) if np.allclose(series.eta, 1.0, atol=1e-12) else series.eta
    return DecayCurve(series.times, eta), series


def efficiency_from_overlaps(overlaps, weights):
    return thermal_efficiency(overlaps.Q, overlaps.M, overlaps.M0, weights, overlaps.times)


def product_series(a: CoherenceSeries, b: CoherenceSeries) -> CoherenceSeries:
    """Coherence of a separable 2D problem from its two 1D factors."""
    return CoherenceSeries(a.times, a.C * b.C, a.mu0 * b.mu0, a.mu_t * b.mu_t)


# --- oracle scenarios ----------------------------------------------------------

def recoil_oracle(times, k_R, temperature, mass, eps=1e-10, box_periods=None, threads=1):
    """Homogeneous thermal gas, plane-wave beam, no potentials.

    The thermal state is the Gibbs mixture of the box momentum eigenstates.
    """
    sigma_k = math.sqrt(mass * k_B * temperature) / hbar
    lam_R = 2.0 * math.pi / abs(k_R)
    if box_periods is None:
        # box long compared with the thermal coherence length
        box_periods = int(math.ceil(40.0 * 2.0 * math.pi / sigma_k / lam_R))
    L = box_periods * lam_R
    k_cut = math.sqrt(2.0) * sigma_k * special.erfcinv(eps)
    grid = Grid1D.covering(0.5 * L, k_cut + abs(k_R) + 8 * 2 * math.pi / L)
    ks = grid.k
    keep = np.abs(ks) <= k_cut
    psi = np.exp(1j * np.outer(ks[keep], grid.x)) / math.sqrt(L)
    weights = np.exp(-0.5 * (ks[keep] / sigma_k) ** 2)
    weights /= weights.sum()
    ov = propagate_overlaps(GridState(grid, psi), StorageOperator(k_R=k_R), None, None, times, mass,
                            threads=threads)
    return efficiency_from_overlaps(ov, weights)


def release_grid(a0, w, times, mass, n_max=0, margin=8.0):
    """Grid for oscillator states up to n_max released into free space."""
    t_max = float(np.max(times)) if np.size(times) else 0.0
    half, k_need = hermite_required_extent(n_max, a0)
    k_beam = 8.0 / w + k_need
    spread = hbar * k_beam * t_max / mass
    return Grid1D.covering(max(half, margin * w) + spread, 1.5 * k_beam)


def release_bec_oracle(times, a0, w, mass):
    """Condensate in the oscillator ground state released when the beam stores."""
    grid = release_grid(a0, w, times, mass)
    psi = hermite_functions(0, a0, grid)
    ov = propagate_overlaps(GridState(grid, psi), StorageOperator(waist=w), None, None, times, mass)
    return efficiency_from_overlaps(ov, [1.0])


def release_state_overlaps(times, a0, w, mass, n_max, threads=1):
    """Per-state overlaps Q_n, M_n for oscillator states 0..n_max after release."""
    grid = release_grid(a0, w, times, mass, n_max)
    psi = hermite_functions(n_max, a0, grid)
    return propagate_overlaps(GridState(grid, psi), StorageOperator(waist=w), None, None, times,
                              mass, threads=threads)


def release_thermal_oracle(times, a0, w, mass, kT_over_hw, eps=1e-4, threads=1):
    """Thermal gas released from a 1D harmonic trap, summed over oscillator states."""
    omega = hbar / (mass * a0**2)
    spec = ThermalSpec.from_ratio(kT_over_hw, omega, eps)
    ov = release_state_overlaps(times, a0, w, mass, spec.n_max, threads)
    return efficiency_from_overlaps(ov, spec)


def linear_force_oracle(times, w, force, mass, half_width=None):
    """Homogeneous gas at zero velocity spread in a uniform force along x.

    Returns the 2D curve and coherence as products of the x run (with
    force) and the y run (force free), and the two 1D curves.
    """
    times = np.atleast_1d(np.asarray(times, float))
    t_max = float(times.max())
    tau_w = mass * w**2 / hbar
    k_F = abs(force) * t_max / hbar
    spread = w * (1.0 + t_max / tau_w)
    if half_width is None:
        half_width = 10.0 * spread + hbar * k_F * t_max / mass
    grid = Grid1D.covering(half_width, 1.5 * (k_F + 10.0 / w))
    psi = np.full(grid.points, 1.0 / math.sqrt(grid.length), complex)
    R = StorageOperator(waist=w)
    ox = propagate_overlaps(GridState(grid, psi), R, None, lambda x: -force * x, times, mass)
    oy = propagate_overlaps(GridState(grid, psi), R, None, None, times, mass)
    cx, sx = efficiency_from_overlaps(ox, [1.0])
    cy, sy = efficiency_from_overlaps(oy, [1.0])
    return DecayCurve(times, cx.eta * cy.eta), product_series(sx, sy), (cx, cy)


def harmonic_trap_oracle(times, temperature, omega, ratio, w, mass, gravity=9.8, eps=1e-3,
                         threads=1):
    """Thermal gas held in the trap during the dark time, sag included.

    Ground atoms feel kappa_g = m omega^2 about the cloud centre; Rydberg atoms
    feel kappa_r = ratio * kappa_g about their own equilibrium position, which
    is displaced by gravity.  Returns the 2D curve and coherence and the
    x and y curves.
    """
    times = np.atleast_1d(np.asarray(times, float))
    kappa_g = mass * omega**2
    kappa_r = ratio * kappa_g
    # equilibrium positions below the trap axis (x grows against gravity)
    x0 = (kappa_r - kappa_g) / (kappa_g * kappa_r) * mass * gravity if kappa_r != 0 else 0.0
    spec = ThermalSpec.from_ratio(k_B * temperature / (hbar * omega), omega, eps)
    a0 = math.sqrt(hbar / (mass * omega))
    half, k_need = hermite_required_extent(spec.n_max, a0)
    half = max(half, 8.0 * w)
    curves, series = [], []
    for shift in (x0, 0.0):
        grid = Grid1D.covering(half, 1.5 * (k_need + 8.0 / w))
        psi = hermite_functions(spec.n_max, a0, grid)
        Vg = 0.5 * kappa_g * grid.x**2
        Vr = 0.5 * kappa_r * (grid.x - shift) ** 2 - 0.5 * kappa_r * shift**2
        energies = hbar * omega * (np.arange(spec.n_max + 1) + 0.5)
        ov = propagate_overlaps(GridState(grid, psi), StorageOperator(waist=w), Vg, Vr, times, mass,
                                threads=threads, ground_energies=energies)
        curve, ser = efficiency_from_overlaps(ov, spec)
        curves.append(curve)
        series.append(ser)
    return (DecayCurve(times, curves[0].eta * curves[1].eta), product_series(*series),
            tuple(curves))
