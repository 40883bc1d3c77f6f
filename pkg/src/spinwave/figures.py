"""Built-in parameter sets and dataset generators for the reference figures.

Parameters are those of the storage experiment with 87Rb: signal 780.24 nm,
coupling 480 nm counterpropagating, signal waist 8 um, radial trap
frequency 2 pi x 96 Hz, trap light at 1064 nm, temperatures 0.2 and 2.0 uK.
The T -> 0 offset of 38 us enters as a Gaussian factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models
from .constants import M_RB87, hbar
from .fitting import GAUSSIAN, STRETCHED, fit_decay, fit_tau_vs_temperature
from .models import DecayCurve
from .oracle.thermal import ThermalSpec, release_state_overlaps, thermal_efficiency
from .physics import (
    RB87,
    BeamGeometry,
    ExperimentConfig,
    ThermalEnsemble,
    TrapConfig,
    derive_scales,
    oscillator_length,
    spin_wave_wavevector,
    thermal_velocity,
)

FIGURES = ("fig2", "fig3", "fig4", "figS2")

SIGNAL_WAVELENGTH = 780.24e-9
COUPLING_WAVELENGTH = 480e-9
WAIST = 8e-6
TRAP_OMEGA = 2.0 * math.pi * 96.0
TRAP_WAVELENGTH = 1064e-9
T_COLD = 0.2e-6
T_HOT = 2.0e-6
TAU_OFFSET = 38e-6
ETA0 = 0.15

#: (k_B T / hbar omega, w / a0) pairs of the release comparison
S2_CASES = ((10.0, 5.0), (10.0, 7.3), (20.0, 5.0), (20.0, 7.3))
S2_POINTS = 41
#: highest level of the truncated thermal sum
S2_TRUNCATION = 40


def reference_experiment(temperature=T_COLD, trap_wavelength=TRAP_WAVELENGTH,
                         on_during_dark_time=True) -> ExperimentConfig:
    beams = BeamGeometry(SIGNAL_WAVELENGTH, COUPLING_WAVELENGTH, signal_waist=WAIST)
    trap = TrapConfig(TRAP_OMEGA, RB87.polarizability_ratio(trap_wavelength),
                      on_during_dark_time=on_during_dark_time)
    return ExperimentConfig(RB87, beams, trap, ThermalEnsemble(temperature))


@dataclass
class FigureData:
    """Tables (column name -> array) and a JSON-ready summary."""

    name: str
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def _fit_summary(fit):
    return {k: {"value": v, "sigma": s} for k, (v, s) in fit.params.items()}


def fig2(points=45, noise=0.03, seed=0) -> FigureData:
    """Recoil decay at 2.0 uK with a Gaussian and a stretched-exponential fit."""
    exp = reference_experiment(T_HOT, on_during_dark_time=False)
    k_R, lam = spin_wave_wavevector(exp.beams)
    model = models.Recoil(k_R=k_R, sigma_v=thermal_velocity(T_HOT, RB87.mass), eta0=ETA0)
    t = np.linspace(0.7e-6, 31.5e-6, points)
    eta = model.eta(t)
    rng = np.random.default_rng(seed)
    noisy = eta * (1.0 + noise * rng.standard_normal(t.size))
    synth = DecayCurve(t, np.clip(noisy, 0.0, None), sigma_eta=noise * eta)
    g = fit_decay(DecayCurve(t, eta), GAUSSIAN)
    s = fit_decay(synth, STRETCHED)
    data = FigureData("fig2")
    data.tables["fig2_curve"] = {"t_us": t * 1e6, "eta": eta, "eta_synthetic": synth.eta,
                                 "sigma_synthetic": synth.sigma_eta}
    data.summary = {
        "temperature_uK": T_HOT * 1e6,
        "lambda_R_um": lam * 1e6,
        "tau_R_us": model.tau * 1e6,
        "gaussian_fit": _fit_summary(g),
        "stretched_fit_synthetic": _fit_summary(s),
        "synthetic_noise": noise,
        "seed": seed,
    }
    return data


def fig3(temperatures=None) -> FigureData:
    """1/tau^2 against temperature and the straight-line fit."""
    if temperatures is None:
        temperatures = np.linspace(T_COLD, T_HOT, 10)
    temperatures = np.asarray(temperatures, float)
    k_R, lam = spin_wave_wavevector(reference_experiment().beams)
    taus = []
    for T in temperatures:
        m = models.Composite(factors=(
            models.Recoil(k_R=k_R, sigma_v=thermal_velocity(T, RB87.mass)),
            models.GaussianOffset(tau=TAU_OFFSET)))
        taus.append(models.decay_time(m))
    taus = np.array(taus)
    fit = fit_tau_vs_temperature(np.column_stack([temperatures, taus]), RB87.mass)
    data = FigureData("fig3")
    data.tables["fig3_tau_vs_T"] = {"T_uK": temperatures * 1e6, "tau_us": taus * 1e6,
                                    "inv_tau_sq_per_us2": 1.0 / (taus * 1e6) ** 2}
    data.summary = {
        "lambda_R_model_um": lam * 1e6,
        "lambda_R_fit_um": fit.lambda_R * 1e6,
        "tau_offset_fit_us": None if fit.tau_offset is None else fit.tau_offset * 1e6,
        "slope_per_us2_uK": fit.slope * 1e-12 * 1e-6,
        "intercept_per_us2": fit.intercept * 1e-12,
    }
    return data


def fig4_models():
    """(free-expansion model, in-trap model) at 0.2 uK."""
    free = reference_experiment(T_COLD, on_during_dark_time=False)
    k_R, _ = spin_wave_wavevector(free.beams)
    recoil = models.Recoil(k_R=k_R, sigma_v=thermal_velocity(T_COLD, RB87.mass))
    free_model = models.Composite(factors=(recoil, models.GaussianOffset(tau=TAU_OFFSET)))
    trap_model = models.HarmonicSag.from_scales(derive_scales(reference_experiment(T_COLD)))
    return free_model, trap_model


def fig4(points=121, t_max=60e-6) -> FigureData:
    """Free expansion (recoil with offset) and in-trap (differential light shift)."""
    free_model, trap_model = fig4_models()
    t = np.linspace(0.0, t_max, points)
    data = FigureData("fig4")
    data.tables["fig4_curves"] = {"t_us": t * 1e6, "eta_free": free_model.relative(t),
                                  "eta_trap": trap_model.relative(t)}
    summary = {}
    for label, m in (("free_expansion", free_model), ("in_trap", trap_model)):
        fit = fit_decay(DecayCurve(t[1:], m.relative(t[1:])), GAUSSIAN)
        summary[label] = {"decay_time_us": models.decay_time(m) * 1e6,
                          "gaussian_fit_tau_us": fit.value("tau") * 1e6,
                          "warnings": list(m.validity_warnings(t))}
    summary["in_trap"]["tau_F_us"] = trap_model.tau_F * 1e6
    summary["in_trap"]["tau_kappa_us"] = trap_model.tau_kappa * 1e6
    data.summary = summary
    return data


def release_comparison(kT_over_hw, w_over_a0, omega=TRAP_OMEGA, mass=M_RB87, points=S2_POINTS,
                       eps=1e-4, threads=1):
    """Oracle against the hot-gas overlap model for a gas released from a 1D trap.

    Returns times, converged oracle, oracle truncated at n <= 40, approximation.
    """
    a0 = oscillator_length(omega, mass)
    w = w_over_a0 * a0
    sigma_v = math.sqrt(kT_over_hw * hbar * omega / mass)
    times = np.linspace(0.0, 2.0 * w / sigma_v, points)
    spec = ThermalSpec.from_ratio(kT_over_hw, omega, eps)
    n_max = max(spec.n_max, S2_TRUNCATION)
    ov = release_state_overlaps(times, a0, w, mass, n_max, threads)
    q = spec.q
    p = (1.0 - q) * q ** np.arange(n_max + 1)
    converged, _ = thermal_efficiency(ov.Q, ov.M, ov.M0, p, times)
    n = S2_TRUNCATION + 1
    p40 = p[:n] / p[:n].sum()
    truncated, _ = thermal_efficiency(ov.Q[:n], ov.M[:n], ov.M0[:n], p40, times)
    approx = models.eta_release_thermal(times, sigma_v / omega, sigma_v, w, mass, dims=1)
    return times, converged.eta, truncated.eta, approx


def figS2(threads=1, cases=S2_CASES) -> FigureData:
    """Release from a 1D trap: oracle against the hot-gas overlap model."""
    data = FigureData("figS2")
    rows = []
    for kT, r in cases:
        t, conv, trunc, approx = release_comparison(kT, r, threads=threads)
        tag = f"kT{kT:g}_w{r:g}".replace(".", "p")
        data.tables[f"figS2_{tag}"] = {"t_us": t * 1e6, "eta_oracle": conv,
                                       "eta_oracle_n40": trunc, "eta_approx": approx}
        rows.append({
            "kT_over_hbar_omega": kT,
            "w_over_a0": r,
            "max_rel_deviation": float(np.max(np.abs(conv - approx) / approx)),
            "max_rel_deviation_n40": float(np.max(np.abs(trunc - approx) / approx)),
            "thermal_tail_n40": math.exp(-(S2_TRUNCATION + 1) / kT),
        })
    data.summary = {"cases": rows, "time_window": "0 to 2 w / sigma_v", "points": S2_POINTS}
    return data


def build_figure(name, threads=1) -> FigureData:
    if name == "fig2":
        return fig2()
    if name == "fig3":
        return fig3()
    if name == "fig4":
        return fig4()
    if name == "figS2":
        return figS2(threads=threads)
    raise KeyError(name)
