"""Recover the spin-wave wavelength from decay times at several temperatures.

Synthetic Gaussian decays with 3 % noise are fitted one by one, and the
resulting 1/tau^2 values are regressed against temperature.

    python demos/temperature_regression.py
"""

import numpy as np

from spinwave import figures, models
from spinwave.fitting import GAUSSIAN, fit_decay, fit_tau_vs_temperature
from spinwave.models import DecayCurve
from spinwave.physics import RB87, spin_wave_wavevector, thermal_velocity

rng = np.random.default_rng(7)
k_R, lam = spin_wave_wavevector(figures.reference_experiment().beams)
t = np.linspace(0.5e-6, 60e-6, 40)

rows = []
for T in np.linspace(0.2e-6, 2.0e-6, 8):
    m = models.Composite(factors=(
        models.Recoil(k_R=k_R, sigma_v=thermal_velocity(T, RB87.mass)),
        models.GaussianOffset(tau=figures.TAU_OFFSET)), eta0=0.15)
    eta = m.eta(t)
    noisy = eta * (1 + 0.03 * rng.standard_normal(t.size))
    fit = fit_decay(DecayCurve(t, noisy, sigma_eta=0.03 * eta), GAUSSIAN, floor=0.02)
    rows.append((T, fit.value("tau"), fit.sigma("tau")))
    print(f"T = {T * 1e6:4.2f} uK   tau = {fit.value('tau') * 1e6:6.2f} +- {fit.sigma('tau') * 1e6:.2f} us")

res = fit_tau_vs_temperature(rows, RB87.mass)
print(f"\nlambda_R = {res.lambda_R * 1e6:.3f} +- {res.sigma_lambda_R * 1e6:.3f} um  (model {lam * 1e6:.3f})")
print(f"offset   = {res.tau_offset * 1e6:.1f} +- {res.sigma_tau_offset * 1e6:.1f} us")
