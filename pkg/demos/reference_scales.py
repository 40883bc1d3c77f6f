"""Length and time scales of the reference storage experiment.

Prints the derived trap scales at 0.2 uK and the decay times that follow,
for trap light at 1064 nm and at 532 nm.

    python demos/reference_scales.py
"""

from spinwave import figures, models
from spinwave.physics import derive_scales, spin_wave_wavevector


def describe(label, exp):
    s = derive_scales(exp)
    ts = models.harmonic_trap_timescales(s)
    print(f"{label}")
    print(f"  sag              {s.sag * 1e6:8.2f} um")
    print(f"  sigma_x          {s.sigma_x * 1e6:8.2f} um")
    print(f"  w_r              {s.w_r * 1e6:8.2f} um")
    print(f"  tau_F            {ts.tau_F * 1e6:8.2f} us")
    print(f"  tau_kappa        {ts.tau_kappa * 1e6:8.2f} us")


exp = figures.reference_experiment()
_, lam = spin_wave_wavevector(exp.beams)
print(f"spin-wave wavelength {lam * 1e6:.4f} um\n")
describe("trap at 1064 nm", exp)
describe("trap at 532 nm", figures.reference_experiment(trap_wavelength=532e-9))

free, trap = figures.fig4_models()
print(f"\n1/e time, free expansion with offset: {models.decay_time(free) * 1e6:.1f} us")
print(f"1/e time, trap left on:                {models.decay_time(trap) * 1e6:.1f} us")
