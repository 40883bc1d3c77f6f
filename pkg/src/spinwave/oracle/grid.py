"""Split-operator propagation of single-atom wavefunctions on a periodic 1D grid.

The storage overlaps

    Q(t) = <psi_g(t)| R U_r(t) R^dagger |psi_g(0)>,
    M(t) = <psi_g(t)| R R^dagger |psi_g(t)>,

are computed by evolving the ground-state wavefunction with H_g and the
stored wavefunction R^dagger psi_g(0) with H_r, then taking grid inner
products.  Batches of initial states are propagated together.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ..constants import hbar
from ..errors import ConfigError, GridTooSmallError, NormDriftError

Potential = Union[None, np.ndarray, Callable]

#: largest phase advance per Strang step, rad
MAX_PHASE_STEP = 0.1
#: relative norm drift that aborts a propagation
MAX_NORM_DRIFT = 1e-6


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid with ``points`` samples on [x_min, x_max)."""

    x_min: float
    x_max: float
    points: int

    def __post_init__(self):
        if self.points < 256 or self.points & (self.points - 1):
            raise ConfigError("grid needs a power of two >= 256 points")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max must exceed x_min")

    @classmethod
    def centered(cls, half_width, points, center=0.0):
        return cls(center - half_width, center + half_width, points)

    @classmethod
    def covering(cls, half_width, k_max, center=0.0, min_points=256):
        """Smallest power-of-two grid spanning +-half_width that resolves |k| <= k_max."""
        n = max(min_points, 2 * half_width * k_max / math.pi)
        return cls.centered(half_width, 1 << int(math.ceil(math.log2(n))), center)

    @property
    def length(self):
        """Quantization length L_x of the box."""
        return self.x_max - self.x_min

    @property
    def dx(self):
        return self.length / self.points

    @property
    def dk(self):
        return 2.0 * math.pi / (self.points * self.dx)

    @property
    def k_max(self):
        return math.pi / self.dx

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.points)

    @property
    def k(self):
        return 2.0 * math.pi * np.fft.fftfreq(self.points, d=self.dx)

    def half_width(self, center=0.0):
        return min(center - self.x_min, self.x_max - center)


@dataclass(frozen=True, eq=False)
class GridState:
    """Wavefunction(s) on a grid; ``psi`` has shape (points,) or (states, points)."""

    grid: Grid1D
    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape[-1] != self.grid.points or psi.ndim > 2:
            raise ConfigError("psi does not match the grid")
        object.__setattr__(self, "psi", psi)

    def norm(self):
        return np.sum(np.abs(self.psi) ** 2, axis=-1) * self.grid.dx

    def inner(self, other):
        """<self|other> for matching batches."""
        return np.sum(np.conj(self.psi) * other.psi, axis=-1) * self.grid.dx

    def batch(self):
        return np.atleast_2d(self.psi)


@dataclass(frozen=True)
class StorageOperator:
    """Multiplication operator R^dagger = sqrt(L) v(x) exp(i k_R x).

    Without a waist the beam is a plane wave and R^dagger = exp(i k_R x),
    which must fit an integer number of periods into the box.
    """

    k_R: float = 0.0
    waist: Optional[float] = None
    center: float = 0.0

    def dagger_factor(self, grid: Grid1D):
        x = grid.x
        phase = np.exp(1j * self.k_R * x)
        if self.waist is None:
            periods = self.k_R * grid.length / (2.0 * math.pi)
            if abs(periods - round(periods)) > 1e-9:
                raise ConfigError("a plane-wave storage phase must be commensurate with the box")
            return phase
        v = (2.0 / (math.pi * self.waist**2)) ** 0.25 * np.exp(-((x - self.center) / self.waist) ** 2)
        return math.sqrt(grid.length) * v * phase

    def mode_weight(self, grid: Grid1D):
        """R R^dagger = L |v|^2 as a function on the grid."""
        return np.abs(self.dagger_factor(grid)) ** 2


IDENTITY = StorageOperator()


def hermite_required_extent(n, a0):
    """Half width and largest wave number needed to hold oscillator state n."""
    x_tp = a0 * math.sqrt(2 * n + 1)
    return max(4.0 * x_tp, x_tp + 8.0 * a0), x_tp / a0**2 + 8.0 / a0


def hermite_functions(n_max, a0, grid: Grid1D, center=0.0):
    """Normalized oscillator eigenfunctions 0..n_max on the grid.

    Uses the three-term recurrence of the normalized Hermite functions with a
    running logarithmic scale, so neither Hermite polynomials nor the Gaussian
    are ever formed separately.

    Returns
    -------
    ndarray, shape (n_max + 1, points), real
    """
    if n_max < 0:
        raise ConfigError("n must be nonnegative")
    half, k_need = hermite_required_extent(n_max, a0)
    have = grid.half_width(center)
    if have < half:
        raise GridTooSmallError(
            f"grid half width {have:.3g} m is below the {half:.3g} m needed for n = {n_max}",
            required_half_width=half,
        )
    if grid.k_max < k_need:
        raise GridTooSmallError(
            f"grid spacing {grid.dx:.3g} m too coarse for n = {n_max}; need dx <= {math.pi / k_need:.3g} m"
        )
    u = (grid.x - center) / a0
    out = np.empty((n_max + 1, grid.points))
    log_scale = -0.5 * u**2 - 0.25 * math.log(math.pi) - 0.5 * math.log(a0)
    prev = np.zeros_like(u)
    cur = np.ones_like(u)
    out[0] = np.exp(log_scale)
    for n in range(n_max):
        nxt = math.sqrt(2.0 / (n + 1)) * u * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            prev = np.where(big, prev * 1e-100, prev)
            cur = np.where(big, cur * 1e-100, cur)
            log_scale = np.where(big, log_scale + 100 * math.log(10.0), log_scale)
        with np.errstate(under="ignore"):
            out[n + 1] = cur * np.exp(log_scale)
    return out


def hermite_state(n, a0, grid: Grid1D, center=0.0) -> GridState:
    """Oscillator eigenstate n with length a0, normalized on the grid."""
    return GridState(grid, hermite_functions(n, a0, grid, center)[n])


def _potential(V: Potential, grid: Grid1D):
    if V is None:
        return None
    if callable(V):
        V = V(grid.x)
    V = np.asarray(V, dtype=float)
    if V.shape != (grid.points,):
        raise ConfigError("potential does not match the grid")
    return V


def spectral_bandwidth(psi, grid: Grid1D, threshold=1e-14):
    """Largest |k| carrying spectral weight above ``threshold`` x peak, over a batch."""
    spec = np.abs(np.fft.fft(np.atleast_2d(psi), axis=-1)) ** 2
    mask = spec > threshold * spec.max(axis=-1, keepdims=True)
    k = np.abs(grid.k)
    return float(np.max(np.where(mask, k, 0.0)))


class _Propagator:
    """Strang splitting exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2) with fixed dt."""

    def __init__(self, grid, V, mass, dt_max):
        self.grid = grid
        self.V = V
        self.mass = mass
        self.dt_max = dt_max
        self.kinetic = hbar * grid.k**2 / (2.0 * mass)

    def advance(self, psi, duration):
        if duration <= 0:
            return psi
        if self.V is None:
            return np.fft.ifft(np.exp(-1j * self.kinetic * duration) * np.fft.fft(psi, axis=-1), axis=-1)
        steps = max(1, int(math.ceil(duration / self.dt_max)))
        dt = duration / steps
        half = np.exp(-0.5j * self.V * dt / hbar)
        kin = np.exp(-1j * self.kinetic * dt)
        full = half * half
        psi = half * psi
        for i in range(steps):
            psi = np.fft.ifft(kin * np.fft.fft(psi, axis=-1), axis=-1)
            psi = (full if i < steps - 1 else half) * psi
        return psi


@dataclass(frozen=True, eq=False)
class OverlapSeries:
    """Per-state storage overlaps; ``Q`` and ``M`` have shape (states, times)."""

    times: np.ndarray
    Q: np.ndarray
    M: np.ndarray
    M0: np.ndarray
    dt: float

    def single(self, n=0):
        return OverlapSeries(self.times, self.Q[n:n + 1], self.M[n:n + 1], self.M0[n:n + 1], self.dt)


def _support_mask(grid, psis, threshold=1e-16, pad=0.1):
    """Grid points within the hull of the states' support, padded by a fraction of the box."""
    dens = np.max([np.max(np.abs(np.atleast_2d(p)) ** 2, axis=0) for p in psis], axis=0)
    idx = np.nonzero(dens > threshold * dens.max())[0]
    x = grid.x
    lo = x[idx[0]] - pad * grid.length
    hi = x[idx[-1]] + pad * grid.length
    return (x >= lo) & (x <= hi)


def _time_step(grid, psis, potentials, mass):
    mask = _support_mask(grid, psis)
    vmax = max((float(np.max(np.abs(V[mask]))) for V in potentials if V is not None), default=0.0)
    k_eff = max(spectral_bandwidth(p, grid) for p in psis)
    e_kin = hbar * k_eff**2 / (2.0 * mass)
    rate = max(vmax / hbar, e_kin)
    return MAX_PHASE_STEP / rate if rate > 0 else math.inf


def _propagate_chunk(psi0, grid, R_dag, weight, Vg, Vr, times, mass, dt, energies):
    prop_g = _Propagator(grid, Vg, mass, dt)
    prop_r = _Propagator(grid, Vr, mass, dt)
    psi_g = psi0
    psi_r = R_dag * psi0
    n0_g = np.sum(np.abs(psi_g) ** 2, axis=-1)
    n0_r = np.sum(np.abs(psi_r) ** 2, axis=-1)
    M0 = np.sum(weight * np.abs(psi0) ** 2, axis=-1) * grid.dx
    Q = np.empty((psi0.shape[0], times.size), complex)
    M = np.empty((psi0.shape[0], times.size))
    t_prev = 0.0
    for j, t in enumerate(times):
        if Vg is None and Vr is None:
            # free evolution is exact in one step from t = 0
            g = prop_g.advance(psi0, t)
            r = prop_r.advance(R_dag * psi0, t)
        else:
            if energies is None:
                psi_g = prop_g.advance(psi_g, t - t_prev)
            else:
                psi_g = np.exp(-1j * energies * t / hbar)[:, None] * psi0
            psi_r = prop_r.advance(psi_r, t - t_prev)
            g, r = psi_g, psi_r
        t_prev = t
        Q[:, j] = np.sum(np.conj(g) * np.conj(R_dag) * r, axis=-1) * grid.dx
        M[:, j] = np.sum(weight * np.abs(g) ** 2, axis=-1) * grid.dx
        drift = max(
            float(np.max(np.abs(np.sum(np.abs(g) ** 2, axis=-1) / n0_g - 1.0))),
            float(np.max(np.abs(np.sum(np.abs(r) ** 2, axis=-1) / np.where(n0_r > 0, n0_r, 1.0) - 1.0)
                         * (n0_r > 0))),
        )
        if drift > MAX_NORM_DRIFT:
            raise NormDriftError(f"norm drift {drift:.2e} at t = {t:.3g} s exceeds {MAX_NORM_DRIFT:g}")
    return Q, M, M0


def propagate_overlaps(initial: GridState, R: StorageOperator, V_g: Potential, V_r: Potential,
                       times, mass, dt=None, threads=1, ground_energies=None) -> OverlapSeries:
    """Storage overlaps Q(t), M(t) and M(0) of one or many initial states.

    Parameters
    ----------
    initial : GridState
        psi_g(0), a single state or a batch.
    R : StorageOperator
        Storage phase and beam envelope.
    V_g, V_r : array, callable of x, or None
        Potentials of the ground and Rydberg state during the dark time, in J.
    times : array_like
        Nondecreasing dark times in s, starting at or after 0.
    mass : float
        Atomic mass in kg.
    dt : float, optional
        Override of the automatic Strang step (phase advance below 0.1 rad
        per step for both the potentials and the kinetic bandwidth).
    threads : int
        Independent initial states are split into this many concurrent chunks.
    ground_energies : array_like, optional
        When the initial states are eigenstates of H_g with these energies,
        psi_g(t) is obtained from the phase factors instead of propagation.

    Raises
    ------
    NormDriftError
        When any propagated state loses more than 1e-6 of its norm.
    """
    grid = initial.grid
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size and (times[0] < 0 or np.any(np.diff(times) < 0)):
        raise ConfigError("times must be nonnegative and nondecreasing")
    psi0 = initial.batch()
    Vg = _potential(V_g, grid)
    Vr = _potential(V_r, grid)
    R_dag = R.dagger_factor(grid)
    weight = np.abs(R_dag) ** 2
    if dt is None:
        dt = _time_step(grid, [psi0, R_dag * psi0], [Vg, Vr], mass)
    chunks = np.array_split(np.arange(psi0.shape[0]), max(1, min(threads, psi0.shape[0])))
    E = None if ground_energies is None else np.broadcast_to(np.asarray(ground_energies, float), psi0.shape[:1])
    args = [(psi0[idx], grid, R_dag, weight, Vg, Vr, times, mass, dt, None if E is None else E[idx])
            for idx in chunks]
    if len(args) == 1:
        results = [_propagate_chunk(*args[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(args)) as pool:
            results = list(pool.map(lambda a: _propagate_chunk(*a), args))
    Q = np.concatenate([r[0] for r in results])
    M = np.concatenate([r[1] for r in results])
    M0 = np.concatenate([r[2] for r in results])
    return OverlapSeries(times, Q, M, M0, dt)
