"""Closed-form storage overlaps of oscillator eigenstates released into free space.

For the n-th eigenstate of a harmonic trap with length a0, stored by a
Gaussian beam of waist w and released at storage, Q_n(t), M_n(t) and
M_n(0) reduce to finite double sums over Hermite coefficients.  The sums
cancel strongly for large n, so they are evaluated with exact integer
coefficients in arbitrary-precision arithmetic (mpmath).
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp

from ..constants import hbar
from ..errors import ConfigError

#: default largest admissible state index
N_LIMIT = 40


@lru_cache(maxsize=None)
def hermite_coefficients(n):
    """Integer coefficients d_{n,r} of H_n(x) = sum_r d_{n,r} x^r."""
    if n == 0:
        return (1,)
    prev, cur = (1,), (0, 2)
    for k in range(1, n):
        nxt = [0] * (k + 2)
        for r, c in enumerate(cur):
            nxt[r + 1] += 2 * c
        for r, c in enumerate(prev):
            nxt[r] -= 2 * k * c
        prev, cur = cur, tuple(nxt)
    return cur


@lru_cache(maxsize=None)
def squared_coefficients(n):
    """Integer coefficients u_{n,r} of H_n(x)^2 = sum_r u_{n,r} x^(2r)."""
    d = hermite_coefficients(n)
    u = [0] * (n + 1)
    for r, a in enumerate(d):
        if a == 0:
            continue
        for s, b in enumerate(d):
            if b:
                u[(r + s) // 2] += a * b
    return tuple(u)


def gauss_moment(j):
    """H_{2j}(0)/(-4)^j = (2j)!/(4^j j!), as an mpf."""
    return mp.factorial(2 * j) / (mp.mpf(4) ** j * mp.factorial(j))


def _branch(b, a0, A):
    # b = a0 w / (2A) for Q_n, a0 w / (2 sqrt 2 A) for M_n
    xi1 = mp.mpf(1) / 2 + b**2 + 1j * a0**2 / (2 * A)
    xi2 = b**4 / xi1
    xi3_sq = 1 - 1 / xi1
    # xi3^n xi4^r = xi3_sq^((n-r)/2) (b^2/xi1)^r, branch free for r = n mod 2
    return xi1, xi2, xi3_sq


def _sum_with_xi3(n, b, xi1, xi3_sq, xi5):
    d = hermite_coefficients(n)
    inv5 = 1 / xi5
    c = b**2 / xi1
    total = mp.mpc(0)
    for r in range(n + 1):
        if not d[r]:
            continue
        inner = mp.mpc(0)
        for s in range(n + 1):
            if d[s]:
                j = (r + s) // 2
                inner += d[s] * gauss_moment(j) * inv5**j
        total += d[r] * c**r * xi3_sq ** ((n - r) // 2) * inner
    return total


def hermite_release_closedform(n, t, a0, w, mass, length=1.0, n_limit=N_LIMIT, dps=None):
    """Q_n(t), M_n(t) and M_n(0) for oscillator state n after release.

    Parameters
    ----------
    n : int
        Oscillator quantum number, at most ``n_limit``.
    t : float
        Dark time in s, must be positive for Q_n and M_n(t).
    a0 : float
        Oscillator length in m.
    w : float
        Beam waist in m.
    mass : float
        Atomic mass in kg.
    length : float
        Quantization length L_x; it cancels in the efficiency.
    n_limit : int
        Largest admissible n.
    dps : int, optional
        Decimal digits of the working precision (chosen from n and t when
        omitted).

    Returns
    -------
    Q : complex
    M_t : float
    M_0 : float
    """
    if n < 0 or n > n_limit:
        raise ConfigError(f"state index {n} outside the supported range 0..{n_limit}")
    if t <= 0:
        raise ConfigError("closed form requires t > 0; use M_n(0) for t = 0")
    A0 = hbar * t / mass
    b_float = a0 * w / (2 * A0)
    if dps is None:
        dps = 30 + 2 * n + int(max(0.0, 2 * math.log10(b_float)))
    with mp.workdps(dps):
        a0m, wm, A = mp.mpf(a0), mp.mpf(w), mp.mpf(A0)
        v0sq = mp.sqrt(2 / (mp.pi * wm**2))
        pref = mp.mpf(length) * v0sq / (mp.mpf(2) ** n * mp.factorial(n))

        b = a0m * wm / (2 * A)
        xi1, xi2, xi3_sq = _branch(b, a0m, A)
        xi5 = mp.conj(xi1) - xi2 + a0m**2 / wm**2
        Q = pref * b / mp.sqrt(xi1) / mp.sqrt(xi5) * _sum_with_xi3(n, b, xi1, xi3_sq, xi5)

        bt = a0m * wm / (2 * mp.sqrt(2) * A)
        xt1, xt2, xt3_sq = _branch(bt, a0m, A)
        xt5 = mp.conj(xt1) - xt2
        Mt = pref * bt / mp.sqrt(xt1) / mp.sqrt(xt5) * _sum_with_xi3(n, bt, xt1, xt3_sq, xt5)

        M0 = release_norm_at_zero(n, a0, w, length, dps=dps)
        return complex(Q), float(mp.re(Mt)), M0


def release_norm_at_zero(n, a0, w, length=1.0, dps=50):
    """M_n(0) = L_x v0^2 xi6^(-1/2) / (2^n n!) sum_r U_{n,r} xi6^(-r), xi6 = 1 + 2 a0^2/w^2."""
    with mp.workdps(dps):
        xi6 = 1 + 2 * mp.mpf(a0) ** 2 / mp.mpf(w) ** 2
        u = squared_coefficients(n)
        s = mp.fsum(u[r] * gauss_moment(r) / xi6**r for r in range(n + 1) if u[r])
        v0sq = mp.sqrt(2 / (mp.pi * mp.mpf(w) ** 2))
        return float(mp.mpf(length) * v0sq / mp.sqrt(xi6) * s / (mp.mpf(2) ** n * mp.factorial(n)))
