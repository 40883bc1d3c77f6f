"""Ramsey fringes of a thermal gas and the storage efficiency they imply.

The fringe contrast of a recoil-dephased coherence equals V = |C(t)/C(0)|,
and V^2 is the relative retrieval efficiency.

    python demos/ramsey_fringes.py
"""

import math

import numpy as np

from spinwave import models
from spinwave.models import CoherenceSeries
from spinwave.physics import RB87, thermal_velocity
from spinwave.ramsey import RamseyConfig, ramsey_signal, visibility

k_R = 2 * math.pi / 1.247e-6
sigma_v = thermal_velocity(2e-6, RB87.mass)
t = np.linspace(0, 40e-6, 401)
series = CoherenceSeries(t, models.coherence_recoil(t, k_R, sigma_v, RB87.mass))
cfg = RamseyConfig.from_pulse_area(math.pi / 2, 2 * math.pi * 250e3, series)

P = ramsey_signal(t, cfg)
V = visibility(series)
for tj, Pj, Vj, ej in zip(t[::40], P[::40], V[::40], series.eta[::40]):
    print(f"t = {tj * 1e6:5.1f} us   P_r = {Pj:.4f}   V = {Vj:.4f}   V^2 = {Vj**2:.4f}   eta = {ej:.4f}")
