import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinwave.constants import M_RB87, k_B
from spinwave.errors import FitError
from spinwave.fitting import (
    ALGEBRAIC,
    EXPONENTIAL,
    GAUSSIAN,
    STRETCHED,
    fit_decay,
    fit_tau_vs_temperature,
    model_eta,
)
from spinwave.models import DecayCurve

TRUTH = {
    GAUSSIAN: {"eta0": 0.15, "tau": 12e-6},
    EXPONENTIAL: {"eta0": 0.15, "tau": 12e-6},
    ALGEBRAIC: {"eta0": 0.15, "tau": 12e-6},
    STRETCHED: {"eta0": 0.15, "tau": 12e-6, "p": 1.6},
}
T = np.linspace(0.7e-6, 31.5e-6, 40)


@pytest.mark.parametrize("model", list(TRUTH))
def test_noise_free_round_trip(model):
    fit = fit_decay(DecayCurve(T, model_eta(model, T, TRUTH[model])), model)
    for name, value in TRUTH[model].items():
        assert fit.value(name) == pytest.approx(value, rel=1e-9)
    assert fit.residual_norm < 1e-9
    assert fit.n_points == T.size and fit.n_excluded == 0


@pytest.mark.parametrize("model", list(TRUTH))
def test_rescaling_invariance(model):
    eta = model_eta(model, T, TRUTH[model])
    base = fit_decay(DecayCurve(T, eta), model)
    scaled = fit_decay(DecayCurve(T, 3.7 * eta), model)
    assert scaled.value("eta0") == pytest.approx(3.7 * base.value("eta0"), rel=1e-9)
    assert scaled.value("tau") == pytest.approx(base.value("tau"), rel=1e-9)


def test_noisy_stretched_fit_recovers_exponent():
    rng = np.random.default_rng(4)
    eta = model_eta(STRETCHED, T, TRUTH[STRETCHED])
    noisy = eta * (1 + 0.01 * rng.standard_normal(T.size))
    fit = fit_decay(DecayCurve(T, noisy, sigma_eta=0.01 * eta), STRETCHED)
    assert abs(fit.value("p") - 1.6) < 4 * fit.sigma("p")
    assert fit.sigma("p") > 0


def test_floor_excludes_points():
    t = np.linspace(0, 100e-6, 50)
    eta = model_eta(GAUSSIAN, t, TRUTH[GAUSSIAN])
    fit = fit_decay(DecayCurve(t, eta), GAUSSIAN, floor=1e-4)
    assert fit.n_excluded > 0
    assert fit.value("tau") == pytest.approx(12e-6, rel=1e-9)


def test_fit_errors():
    with pytest.raises(FitError, match="insufficient"):
        fit_decay(DecayCurve(T[:3], model_eta(GAUSSIAN, T[:3], TRUTH[GAUSSIAN])), GAUSSIAN)
    with pytest.raises(FitError, match="insufficient"):
        fit_decay(DecayCurve(T[:4], model_eta(STRETCHED, T[:4], TRUTH[STRETCHED])), STRETCHED)
    eta = model_eta(GAUSSIAN, T, TRUTH[GAUSSIAN])
    with pytest.raises(FitError):
        fit_decay(DecayCurve(T, eta, sigma_eta=np.zeros_like(eta)), GAUSSIAN)
    with pytest.raises(FitError):
        fit_decay(DecayCurve(T, eta), "lorentzian")
    with pytest.raises(FitError):
        fit_decay(DecayCurve(T, eta[::-1].copy()), GAUSSIAN)


def synthetic_times(lam, offset, temps):
    k = 2 * math.pi / lam
    rate = k**2 * k_B * temps / M_RB87 + (0.0 if offset is None else offset**-2)
    return rate**-0.5


def test_temperature_regression_round_trip():
    temps = np.linspace(0.2e-6, 2e-6, 10)
    fit = fit_tau_vs_temperature(np.column_stack([temps, synthetic_times(1.2474e-6, 38e-6, temps)]))
    assert fit.lambda_R == pytest.approx(1.2474e-6, rel=1e-9)
    assert fit.tau_offset == pytest.approx(38e-6, rel=1e-9)
    lam, off = fit
    assert (lam, off) == (fit.lambda_R, fit.tau_offset)


@given(st.permutations(list(range(6))))
@settings(max_examples=20)
def test_temperature_regression_order_invariance(order):
    temps = np.linspace(0.3e-6, 1.8e-6, 6)
    rng = np.random.default_rng(0)
    taus = synthetic_times(1.25e-6, 30e-6, temps) * (1 + 0.02 * rng.standard_normal(6))
    pts = np.column_stack([temps, taus])
    a = fit_tau_vs_temperature(pts)
    b = fit_tau_vs_temperature(pts[list(order)])
    assert b.lambda_R == pytest.approx(a.lambda_R, rel=1e-12)
    assert b.tau_offset == pytest.approx(a.tau_offset, rel=1e-12)


def test_temperature_regression_without_offset():
    temps = np.array([0.5e-6, 1e-6])
    taus = synthetic_times(1.25e-6, None, temps) * np.array([1.01, 1.0])
    fit = fit_tau_vs_temperature(np.column_stack([temps, taus]))
    assert fit.tau_offset is None and fit.sigma_tau_offset is None
    assert fit.intercept <= 0
    exact = fit_tau_vs_temperature(np.column_stack([temps, synthetic_times(1.25e-6, None, temps)]))
    assert exact.lambda_R == pytest.approx(1.25e-6, rel=1e-9)


def test_weighted_regression():
    temps = np.linspace(0.2e-6, 2e-6, 5)
    taus = synthetic_times(1.2474e-6, 38e-6, temps)
    fit = fit_tau_vs_temperature(np.column_stack([temps, taus, 0.01 * taus]), weighted=True)
    assert fit.lambda_R == pytest.approx(1.2474e-6, rel=1e-9)
    with pytest.raises(FitError):
        fit_tau_vs_temperature(np.column_stack([temps, taus]), weighted=True)
    with pytest.raises(FitError):
        fit_tau_vs_temperature(np.column_stack([temps, taus, np.zeros(5)]), weighted=True)


def test_temperature_regression_errors():
    with pytest.raises(FitError, match="insufficient"):
        fit_tau_vs_temperature([[1e-6, 1e-5]])
    with pytest.raises(FitError):
        fit_tau_vs_temperature([[1e-6, 1e-5], [2e-6, 2e-5]])
    with pytest.raises(FitError):
        fit_tau_vs_temperature([[1e-6, -1e-5], [2e-6, 2e-5]])
