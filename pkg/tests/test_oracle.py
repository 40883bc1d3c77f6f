import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinwave import models
from spinwave.constants import M_RB87, hbar, k_B
from spinwave.errors import ConfigError, GridTooSmallError, TailBoundError
from spinwave.oracle import (
    IDENTITY,
    Grid1D,
    GridState,
    StorageOperator,
    ThermalSpec,
    efficiency_from_overlaps,
    harmonic_trap_oracle,
    hermite_functions,
    hermite_release_closedform,
    hermite_required_extent,
    hermite_state,
    kuhr_exact,
    linear_force_oracle,
    propagate_overlaps,
    recoil_oracle,
    release_bec_oracle,
    release_norm_at_zero,
    release_state_overlaps,
    release_thermal_oracle,
    thermal_efficiency,
)
from spinwave.oracle.grid import _Propagator
from spinwave.oracle.kuhr import (
    length_mismatch,
    overlap_matrix_grid,
    overlap_matrix_perturbative,
)
from spinwave.oracle.thermal import release_grid
from spinwave.physics import oscillator_length

OMEGA = 2 * math.pi * 96
A0 = oscillator_length(OMEGA, M_RB87)


# --- grid and states ---------------------------------------------------------------

def test_grid_invariants():
    g = Grid1D.centered(1e-4, 512)
    assert g.dk == pytest.approx(2 * math.pi / (g.points * g.dx))
    assert np.allclose(np.diff(g.x), g.dx)
    for bad in (100, 300):
        with pytest.raises(ConfigError):
            Grid1D.centered(1e-4, bad)


def test_hermite_functions_orthonormal():
    half, k = hermite_required_extent(40, A0)
    grid = Grid1D.covering(half, 1.5 * k)
    phi = hermite_functions(40, A0, grid)
    gram = phi @ phi.T * grid.dx
    np.testing.assert_allclose(gram, np.eye(41), atol=1e-8)
    ground = hermite_state(0, A0, grid)
    assert ground.norm() == pytest.approx(1.0, abs=1e-10)
    rms = math.sqrt(np.sum(grid.x**2 * np.abs(ground.psi) ** 2) * grid.dx)
    assert rms == pytest.approx(A0 / math.sqrt(2), rel=1e-10)


def test_hermite_grid_too_small():
    with pytest.raises(GridTooSmallError) as info:
        hermite_functions(40, A0, Grid1D.covering(3 * A0, 40 / A0))
    assert info.value.required_half_width > 3 * A0


def test_split_operator_norm_conservation():
    half, k = hermite_required_extent(10, A0)
    grid = Grid1D.covering(half + 2 * A0, 1.5 * k)
    psi = hermite_functions(10, A0, grid, center=2 * A0).astype(complex)
    V = 0.5 * M_RB87 * OMEGA**2 * grid.x**2
    prop = _Propagator(grid, V, M_RB87, 1e-5)
    out = prop.advance(psi, 1000 * 1e-5)
    norms = np.sum(np.abs(out) ** 2, axis=-1) * grid.dx
    np.testing.assert_allclose(norms, 1.0, atol=1e-10)


def test_plane_wave_storage_is_unitary():
    grid = Grid1D.centered(50e-6, 1024)
    k_R = 2 * math.pi * 20 / grid.length
    R = StorageOperator(k_R=k_R)
    psi = hermite_state(3, 2e-6, grid).psi
    np.testing.assert_allclose(np.abs(R.dagger_factor(grid) * psi), np.abs(psi), rtol=1e-15)
    with pytest.raises(ConfigError):
        StorageOperator(k_R=k_R * 1.01).dagger_factor(grid)


def test_gaussian_storage_weight_of_homogeneous_state():
    grid = Grid1D.centered(100e-6, 2048)
    psi = np.full(grid.points, 1 / math.sqrt(grid.length))
    M = np.sum(StorageOperator(waist=8e-6).mode_weight(grid) * psi**2) * grid.dx
    assert M == pytest.approx(1.0, abs=1e-12)


def test_identity_storage_and_equal_potentials():
    half, k = hermite_required_extent(5, A0)
    grid = Grid1D.covering(half + A0, 1.5 * k)
    psi = hermite_functions(5, A0, grid, center=A0)
    V = 0.5 * M_RB87 * OMEGA**2 * grid.x**2
    ov = propagate_overlaps(GridState(grid, psi), IDENTITY, V, V, [0, 1e-3, 4e-3], M_RB87)
    np.testing.assert_allclose(ov.Q, ov.M, atol=1e-12)
    np.testing.assert_allclose(ov.M, ov.M0[:, None] * np.ones((1, 3)), atol=1e-12)


def test_free_plane_wave_phase():
    grid = Grid1D.centered(20e-6, 1024)
    k0 = 2 * math.pi * 3 / grid.length
    k_R = 2 * math.pi * 10 / grid.length
    psi = np.exp(1j * k0 * grid.x) / math.sqrt(grid.length)
    t = np.array([0.0, 1e-5, 3e-5])
    ov = propagate_overlaps(GridState(grid, psi), StorageOperator(k_R=k_R), None, None, t, M_RB87)
    E_g = hbar**2 * k0**2 / (2 * M_RB87)
    E_r = hbar**2 * (k0 + k_R) ** 2 / (2 * M_RB87)
    np.testing.assert_allclose(ov.Q[0], np.exp(1j * (E_g - E_r) * t / hbar), atol=1e-12)


def test_bad_time_order():
    grid = Grid1D.centered(20e-6, 256)
    with pytest.raises(ConfigError):
        propagate_overlaps(GridState(grid, np.ones(256)), IDENTITY, None, None, [1.0, 0.5], M_RB87)


# --- thermal weights -------------------------------------------------------------

@given(st.floats(0.5, 50.0), st.floats(1e-8, 1e-2))
def test_thermal_tail_bound(ratio, eps):
    spec = ThermalSpec.from_ratio(ratio, OMEGA, eps)
    assert spec.tail < eps
    assert spec.weights.sum() == pytest.approx(1 - spec.tail, rel=1e-12)
    if spec.n_max > 0:
        with pytest.raises(TailBoundError) as info:
            ThermalSpec(spec.beta, OMEGA, spec.n_max - 1, eps)
        assert info.value.required_n_max == spec.n_max


def test_thermal_efficiency_single_state_starts_at_one():
    curve, series = thermal_efficiency([[2.0 + 0j, 1.0]], [[2.0, 1.5]], [2.0], [1.0], [0.0, 1.0])
    assert curve.eta[0] == 1.0
    with pytest.raises(ConfigError):
        thermal_efficiency([[1.0]], [[1.0]], [1.0], [0.5, 0.5])


# --- oracle scenarios against closed forms ------------------------------------------

def test_recoil_oracle():
    k_R = 2 * math.pi / 1.2474e-6
    t = np.linspace(0, 40e-6, 9)
    curve, series = recoil_oracle(t, k_R, 2e-6, M_RB87)
    sv = math.sqrt(k_B * 2e-6 / M_RB87)
    np.testing.assert_allclose(curve.eta, models.eta_recoil(t, k_R, sv), rtol=1e-3)
    assert np.all(np.abs(series.C) ** 2 <= series.mu0 * series.mu_t * (1 + 1e-12))


def test_release_bec_oracle_and_box_length():
    t = np.linspace(0, 30e-3, 7)
    w = 8e-6
    curve, series = release_bec_oracle(t, A0, w, M_RB87)
    np.testing.assert_allclose(curve.eta, models.eta_release_bec(t, A0, w, OMEGA), rtol=1e-3)
    assert series.C[0].real == pytest.approx(series.mu0) and abs(series.C[0].imag) < 1e-15
    # doubling the quantization length leaves eta unchanged
    grid = release_grid(A0, w, t, M_RB87)
    etas = []
    for g in (grid, Grid1D.centered(2 * grid.half_width(), 2 * grid.points)):
        ov = propagate_overlaps(GridState(g, hermite_functions(0, A0, g)), StorageOperator(waist=w),
                                None, None, t, M_RB87)
        etas.append(efficiency_from_overlaps(ov, [1.0])[0].eta)
    np.testing.assert_allclose(etas[0], etas[1], atol=1e-6)


def test_linear_force_oracle():
    F = 2.546e-24
    t = np.linspace(0, 30e-6, 7)
    curve, _, (cx, cy) = linear_force_oracle(t, 8e-6, F, M_RB87)
    np.testing.assert_allclose(curve.eta, models.eta_linear_force_exact(t, 8e-6, 0.0, M_RB87, force=F),
                               rtol=1e-3)
    np.testing.assert_allclose(curve.eta, cx.eta * cy.eta, rtol=1e-15)


def test_grid_refinement():
    # halving dx and dt changes eta by < 1e-4
    t = np.linspace(0, 5e-3, 6)
    w = 8e-6
    half, k = hermite_required_extent(8, A0)
    results = []
    for refine in (1, 2):
        grid = Grid1D.covering(1.5 * half, 1.5 * k * refine)
        psi = hermite_functions(8, A0, grid)
        V = 0.5 * M_RB87 * OMEGA**2 * grid.x**2
        ov = propagate_overlaps(GridState(grid, psi), StorageOperator(waist=w), V, 0.6 * V, t,
                                M_RB87, dt=2e-5 / refine)
        results.append(efficiency_from_overlaps(ov, np.full(9, 1 / 9))[0].eta)
    assert results[1].size == t.size
    assert np.max(np.abs(results[0] - results[1])) < 1e-4


def test_harmonic_trap_oracle_tracks_sag_model():
    T, ratio = 0.05e-6, -550.0 / 687.3
    t = np.linspace(0, 30e-6, 7)
    curve, series, (cx, cy) = harmonic_trap_oracle(t, T, OMEGA, ratio, 8e-6, M_RB87)
    from spinwave.figures import reference_experiment
    from spinwave.physics import derive_scales
    s = derive_scales(reference_experiment(T))
    ts = models.harmonic_trap_timescales(s)
    ref = models.eta_harmonic_sag(t, ts.tau_F, ts.tau_kappa)
    assert np.max(np.abs(curve.eta - ref)) < 1e-3
    assert np.max(np.abs(curve.eta - ref) / ref) < 0.03
    assert np.all(np.abs(series.C) ** 2 <= series.mu0 * series.mu_t * (1 + 1e-12))


def test_release_thermal_oracle_within_documented_agreement():
    t = np.linspace(0, 2 * 7.3 * A0 / math.sqrt(10 * hbar * OMEGA / M_RB87), 9)
    curve, _ = release_thermal_oracle(t, A0, 7.3 * A0, M_RB87, 10.0)
    sv = math.sqrt(10 * hbar * OMEGA / M_RB87)
    approx = models.eta_release_thermal(t, sv / OMEGA, sv, 7.3 * A0, M_RB87)
    assert np.max(np.abs(curve.eta - approx) / approx) < 0.10


# --- Hermite closed form ----------------------------------------------------------

def test_closed_form_short_time_limit():
    w = 5 * A0
    for n in (0, 1, 7, 20, 40):
        Q, M_t, M_0 = hermite_release_closedform(n, 1e-12, A0, w, M_RB87)
        assert abs(Q - M_0) / M_0 < 1e-8
        assert abs(M_t - M_0) / M_0 < 1e-8
        assert M_0 == pytest.approx(float(release_norm_at_zero(n, A0, w)), rel=1e-14)


def test_closed_form_rejects_unstable_range():
    with pytest.raises(ConfigError):
        hermite_release_closedform(41, 1e-3, A0, 5 * A0, M_RB87)
    with pytest.raises(ConfigError):
        hermite_release_closedform(3, 0.0, A0, 5 * A0, M_RB87)


def test_closed_form_ground_state_is_bec_formula():
    t = np.array([1e-3, 1e-2, 5e-2])
    w = 8e-6
    eta = []
    for tj in t:
        Q, M_t, M_0 = hermite_release_closedform(0, tj, A0, w, M_RB87)
        eta.append(abs(Q) ** 2 / (M_0 * M_t))
    np.testing.assert_allclose(eta, models.eta_release_bec(t, A0, w, OMEGA), rtol=1e-10)


@pytest.mark.parametrize("ratio", [2.0, 20.0])
def test_closed_form_thermal_sum_matches_grid(ratio):
    # states n <= min(n_max, 40) with renormalized weights
    w = 5 * A0
    spec = ThermalSpec.from_ratio(ratio, OMEGA, 1e-4)
    n_top = min(spec.n_max, 40)
    p = spec.weights[:n_top + 1]
    p = p / p.sum()
    t = np.array([0.0, 5e-3, 2e-2])
    ov = release_state_overlaps(t, A0, w, M_RB87, n_top)
    L = release_grid(A0, w, t, M_RB87, n_top).length
    grid_eta = thermal_efficiency(ov.Q, ov.M, ov.M0, p, t)[0].eta
    Q = np.empty((n_top + 1, t.size), complex)
    M = np.empty((n_top + 1, t.size))
    M0 = np.empty(n_top + 1)
    for n in range(n_top + 1):
        M0[n] = float(release_norm_at_zero(n, A0, w, length=L))
        Q[n, 0] = M[n, 0] = M0[n]
        for j in range(1, t.size):
            Q[n, j], M[n, j], _ = hermite_release_closedform(n, t[j], A0, w, M_RB87, length=L)
    closed_eta = thermal_efficiency(Q, M, M0, p, t)[0].eta
    np.testing.assert_allclose(closed_eta, grid_eta, rtol=1e-6)


# --- level mapping between two traps -------------------------------------------------

def test_equal_traps_give_identity():
    P = overlap_matrix_grid(20, 1.0)
    np.testing.assert_allclose(P[:, :21], np.eye(21), atol=1e-12)
    beta = 1 / (k_B * 1e-6)
    res = kuhr_exact(beta, 2 * math.pi * 1e3, 2 * math.pi * 1e3, 600, np.linspace(0, 1e-2, 11))
    np.testing.assert_allclose(np.abs(res.C), res.weights.sum(), rtol=1e-10)
    assert res.weights.sum() > 1 - 1e-4


@given(st.floats(0.8, 1.25))
@settings(max_examples=10, deadline=None)
def test_overlap_parity_and_completeness(ratio):
    P = overlap_matrix_grid(12, ratio)
    n, m = np.indices(P.shape)
    assert np.all(np.abs(P[(n - m) % 2 == 1]) < 1e-14)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-10)


def test_perturbative_overlaps():
    delta = length_mismatch(1.0, 1.0 / 1.01**2)
    P = overlap_matrix_perturbative(15, delta)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-14)
    # the residual against quadrature is third order in the mismatch
    errs = []
    for d in (delta, delta / 2):
        G = overlap_matrix_grid(15, 1.0 + d)
        errs.append(np.max(np.abs(overlap_matrix_perturbative(15, d) - G[:, :18])))
    assert errs[0] < 1e-3
    assert errs[0] / errs[1] > 6.0
    with pytest.raises(ConfigError):
        overlap_matrix_perturbative(5, 0.3)


def test_level_mapping_window():
    omega_g = 2 * math.pi * 1e3
    omega_r = omega_g / 0.999**2
    beta = 1 / (20 * hbar * omega_g)
    K, _ = models.kuhr_times(beta, M_RB87 * omega_g**2, M_RB87 * omega_r**2)
    t = np.linspace(0, K, 41)
    res = kuhr_exact(beta, omega_g, omega_r, ThermalSpec.required_n_max(beta, omega_g, 1e-6), t,
                     eps=1e-6)
    assert not res.warnings
    np.testing.assert_allclose(np.abs(res.C), (1 + (t / K) ** 2) ** -0.5, atol=5e-3)
    assert res.sideband_weight < 1e-3


def test_level_mapping_outside_window():
    omega_g = 2 * math.pi * 1e3
    omega_r = 0.6 * omega_g
    beta = 1 / (5 * hbar * omega_g)
    res = kuhr_exact(beta, omega_g, omega_r, ThermalSpec.required_n_max(beta, omega_g, 1e-4),
                     np.linspace(0, 5e-3, 11))
    assert res.warnings
    assert res.sideband_weight > 0.1
    with pytest.raises(TailBoundError):
        kuhr_exact(beta, omega_g, omega_r, 3, [0.0])
