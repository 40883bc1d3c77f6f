"""Exact thermal coherence of a gas moved between two harmonic traps.

A thermal state of the ground-state trap (frequency omega_g) is projected
onto the levels of the Rydberg-state trap (omega_r) at storage.  Then

    C(t) = C0 (1 - q) sum_{n,n'} q^n exp(i t (omega_g n - omega_r n')) |<phi_g,n|phi_r,n'>|^2

with C0 = exp(i t (omega_g - omega_r)/2) and q = exp(-beta hbar omega_g).
The overlaps come either from grid quadrature of oscillator eigenfunctions
or from the second-order expansion in the length mismatch Delta a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..constants import hbar
from ..errors import ConfigError, NumericalError, TailBoundError
from .grid import Grid1D, hermite_functions, hermite_required_extent

GRID_OVERLAP = "grid"
PERTURBATIVE = "perturbative"


@dataclass(frozen=True, eq=False)
class KuhrResult:
    times: np.ndarray
    C: np.ndarray
    overlaps: np.ndarray
    window: tuple
    weights: np.ndarray
    warnings: tuple = ()

    @property
    def sideband_weight(self):
        """Thermal probability of a level change n -> n' != n at storage.

        These transitions give the components of C(t) shifted by multiples of
        2 omega_r; they are negligible inside the intermediate window.
        """
        n = len(self.weights)
        diag = self.overlaps[np.arange(n), np.arange(n)]
        return float(self.weights @ (1.0 - diag))


def length_mismatch(omega_g, omega_r):
    """Relative change Delta a / a_g of the oscillator length."""
    return math.sqrt(omega_g / omega_r) - 1.0


def overlap_matrix_grid(n_max, ratio, n_extra=None, tol=1e-10):
    """|<phi_{a_g,n}|phi_{a_r,n'}>|^2 by quadrature, with a_r/a_g = ``ratio``.

    Rows n = 0..n_max; columns are added until every row sums to one within ``tol``.
    """
    if n_extra is None:
        n_extra = 20 + int(4 * n_max * abs(ratio - 1.0))
    for _ in range(6):
        n_r = n_max + n_extra
        half_g, k_g = hermite_required_extent(n_max, 1.0)
        half_r, k_r = hermite_required_extent(n_r, ratio)
        grid = Grid1D.covering(max(half_g, half_r), 1.5 * max(k_g, k_r))
        phi_g = hermite_functions(n_max, 1.0, grid)
        phi_r = hermite_functions(n_r, ratio, grid)
        P = (phi_g @ phi_r.T * grid.dx) ** 2
        if np.max(np.abs(P.sum(axis=1) - 1.0)) < tol:
            return P
        n_extra *= 2
    raise NumericalError("overlap matrix did not reach completeness")


def overlap_matrix_perturbative(n_max, delta):
    """Second-order overlaps for a small relative length mismatch ``delta``.

    |<n|n'>|^2 = delta_{nn'} + (delta^2/4) [ (n-1)n delta_{n,n'+2}
    - 2(n^2+n+1) delta_{nn'} + (n+1)(n+2) delta_{n,n'-2} ],
    which keeps every row summed to one.
    """
    if abs(delta) >= 0.3:
        raise ConfigError("perturbative overlaps need |Delta a|/a_g < 0.3")
    P = np.zeros((n_max + 1, n_max + 3))
    c = delta**2 / 4.0
    for n in range(n_max + 1):
        P[n, n] = 1.0 - 2.0 * c * (n * n + n + 1)
        if n >= 2:
            P[n, n - 2] = c * (n - 1) * n
        P[n, n + 2] = c * (n + 1) * (n + 2)
    return P


def kuhr_exact(beta, omega_g, omega_r, n_max, times, method=GRID_OVERLAP, eps=1e-4,
               margin=5.0) -> KuhrResult:
    """Exact thermal coherence for a gas transferred between two harmonic traps.

    Parameters
    ----------
    beta : float
        1/(k_B T) in 1/J.
    omega_g, omega_r : float
        Trap angular frequencies of the ground and Rydberg state.
    n_max : int
        Highest ground-trap level kept; its Boltzmann tail must stay below ``eps``.
    times : array_like
        Dark times in s.
    method : {"grid", "perturbative"}

    Returns
    -------
    KuhrResult
        ``window`` holds (k_B T / hbar omega_g, hbar omega_g a_g / (|Delta a| k_B T)).
    """
    if omega_g <= 0 or omega_r <= 0:
        raise ConfigError("both trap frequencies must be positive")
    x = beta * hbar * omega_g
    q = math.exp(-x)
    if q ** (n_max + 1) >= eps:
        need = max(0, int(math.ceil(-math.log(eps) / x)) - 1)
        raise TailBoundError(f"n_max = {n_max} leaves a thermal tail above {eps:g}; need {need}",
                             required_n_max=need)
    delta = length_mismatch(omega_g, omega_r)
    if method == GRID_OVERLAP:
        P = overlap_matrix_grid(n_max, 1.0 + delta)
    elif method == PERTURBATIVE:
        P = overlap_matrix_perturbative(n_max, delta)
    else:
        raise ConfigError(f"unknown overlap method {method!r}")
    times = np.atleast_1d(np.asarray(times, float))
    p = (1.0 - q) * q ** np.arange(n_max + 1)
    n = np.arange(n_max + 1)
    n_r = np.arange(P.shape[1])
    phase_g = np.exp(1j * np.outer(times, omega_g * n))
    phase_r = np.exp(-1j * np.outer(times, omega_r * n_r))
    C = np.einsum("tn,n,nm,tm->t", phase_g, p, P, phase_r)
    C = C * np.exp(0.5j * times * (omega_g - omega_r))

    lower = 1.0 / x
    upper = math.inf if delta == 0 else x / abs(delta)
    warnings = []
    if lower < margin:
        warnings.append(f"k_B T / hbar omega_g = {lower:.3g} is not large")
    if upper < margin:
        warnings.append(f"temperature too high for the trap mismatch (window ratio {upper:.3g})")
    return KuhrResult(times, C, P, (lower, upper), p, tuple(warnings))
