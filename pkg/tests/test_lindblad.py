import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import expm

from dynamics.ensemble import DecoherenceLayers, layered_fidelity
from dynamics.lindblad import (
    DecoherenceParams,
    DephasingMode,
    calibrate_dephasing_mode,
    excited_population_trace,
    lifetime_consistency,
    lindblad_rhs,
    liouvillian,
    propagate,
    propagate_and_relax,
    relax_excited,
    step_limit,
)
from quantum_model.drive import TWO_PI, GateSpec, PulseEnvelope, dark_bright, hamiltonian_at, pulse_timing
from quantum_model.holonomy import ideal_for_spec, named_gate_spec
from quantum_model.states import (
    Level,
    QuantumState,
    StandardState,
    embed_qubit_state,
    standard_state,
    state_fidelity,
)

OMEGA_168 = TWO_PI * 168e6


def test_lifetimes_of_measured_rates(measured_params):
    report = lifetime_consistency(measured_params)
    assert report.t1 == pytest.approx(11.05e-9, rel=1e-3)
    assert report.t_phi == pytest.approx(18.09e-9, rel=1e-3)


def test_single_mode_doubles_dephasing_time(measured_params):
    single = replace(measured_params, dephasing_mode=DephasingMode.SINGLE)
    assert lifetime_consistency(single).t_phi == pytest.approx(2 * lifetime_consistency(measured_params).t_phi)


def test_calibration_picks_double_mode(measured_params):
    mode, error = calibrate_dephasing_mode(measured_params)
    assert mode is DephasingMode.DOUBLE
    assert error < 0.01


def test_ideal_params_have_no_lifetimes(ideal_params):
    report = lifetime_consistency(ideal_params)
    assert report.t1 is None and report.t_phi is None
    assert not ideal_params.is_dissipative


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        DecoherenceParams(gamma0=-1.0)


def test_relaxation_branches_by_rate(measured_params):
    final = relax_excited(QuantumState.basis(Level.A2), measured_params)
    total = 1.6 + 8.5 + 4.3
    assert final.population(Level.MINUS_ONE) == pytest.approx(8.5 / total, abs=1e-8)
    assert final.population(Level.PLUS_ONE) == pytest.approx(4.3 / total, abs=1e-8)
    assert final.population(Level.ZERO) == pytest.approx(1.6 / total, abs=1e-8)
    assert final.population(Level.A2) < 1e-8
    assert final.trace == pytest.approx(1.0, abs=1e-12)


def test_relaxation_keeps_qubit_coherence(measured_params):
    rho = 0.5 * standard_state(StandardState.X).rho + 0.5 * QuantumState.basis(Level.A2).rho
    final = relax_excited(QuantumState(rho), measured_params)
    assert final.rho[0, 1] == pytest.approx(0.25, abs=1e-12)


def test_relaxation_without_excitation_is_identity(measured_params):
    state = standard_state(StandardState.Y)
    assert relax_excited(state, measured_params) is state


def test_liouvillian_matches_master_equation(measured_params):
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    spec = GateSpec(theta=0.9, phi=0.4, delta=0.7, omega=OMEGA_168)
    h = hamiltonian_at(spec, 1e-9)
    direct = lindblad_rhs(rho, h, measured_params)
    vectorized = liouvillian(h, measured_params) @ rho.reshape(-1)
    np.testing.assert_allclose(vectorized, direct.reshape(-1), atol=1e-6 * np.max(np.abs(direct)))


def test_resonant_x_flips_pole(ideal_params):
    spec = named_gate_spec("X", OMEGA_168)
    final = propagate(standard_state(StandardState.Z), spec, ideal_params)
    assert final.population(Level.PLUS_ONE) == pytest.approx(1.0, abs=1e-7)
    assert final.trace == pytest.approx(1.0, abs=1e-12)


def test_dark_state_is_untouched_by_decoherence(measured_params):
    spec = named_gate_spec("X", OMEGA_168)
    dark = standard_state(StandardState.X)
    final = propagate_and_relax(dark, spec, measured_params)
    assert state_fidelity(StandardState.X.vector, final) == pytest.approx(1.0, abs=1e-9)


def test_decay_leaks_population_out_of_qubit(measured_params):
    spec = named_gate_spec("X", TWO_PI * 60e6)
    final = propagate_and_relax(standard_state(StandardState.Z), spec, measured_params)
    assert final.population(Level.ZERO) > 1e-3
    assert final.population(Level.A2) < 1e-8
    final.validate()


def test_detuned_rabi_oscillation_matches_closed_form(ideal_params):
    omega = TWO_PI * 60e6
    delta = 0.5
    spec = GateSpec(theta=math.pi / 2, phi=0.0, delta=delta, omega=omega)
    # |-x> is the bright state of this drive
    trace = excited_population_trace(standard_state(StandardState.MINUS_X), spec, ideal_params,
                                     t_end=40e-9, n_points=81, steps_per_cycle=1000)
    rate = omega * math.hypot(1.0, delta)
    expected = np.sin(0.5 * rate * trace.times) ** 2 / (1.0 + delta * delta)
    np.testing.assert_allclose(trace.p_a2, expected, atol=1e-6)


def test_trace_rejects_bad_window(ideal_params):
    spec = named_gate_spec("X", OMEGA_168)
    with pytest.raises(ValueError):
        excited_population_trace(standard_state(StandardState.Z), spec, ideal_params, t_end=0.0, n_points=10)
    with pytest.raises(ValueError):
        excited_population_trace(standard_state(StandardState.Z), spec, ideal_params, t_end=1e-8, n_points=1)


def test_step_limit_respects_bounds():
    spec = named_gate_spec("H", OMEGA_168)
    timing = pulse_timing(spec)
    h = step_limit(spec, timing)
    assert h == pytest.approx(timing.total / 400)
    assert step_limit(spec, timing, dt_max=1e-12) == 1e-12
    # fewer than 200 steps per cycle is never used
    assert step_limit(spec, timing, steps_per_cycle=50) == pytest.approx(timing.total / 200)


def test_step_halving_changes_fidelity_little():
    coarse = layered_fidelity("X", OMEGA_168, DecoherenceLayers.T1_AND_TPHI, steps_per_cycle=400)
    fine = layered_fidelity("X", OMEGA_168, DecoherenceLayers.T1_AND_TPHI, steps_per_cycle=800)
    assert abs(coarse - fine) < 1e-7


def test_master_equation_preserves_trace(measured_params):
    rng = np.random.default_rng(11)
    spec = GateSpec(theta=1.2, phi=2.5, delta=-0.4, omega=OMEGA_168)
    h = hamiltonian_at(spec, 2e-9)
    for _ in range(100):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rhs = lindblad_rhs(a + a.conj().T, h, measured_params)
        assert abs(np.trace(rhs)) <= 1e-9 * np.abs(rhs).max()


@pytest.mark.parametrize("theta, phi", [(0.0, 0.0), (0.75 * math.pi, 0.0), (1.1, 2.3)])
def test_dark_state_is_stationary(measured_params, theta, phi):
    spec = GateSpec(theta=theta, phi=phi, delta=0.6, omega=OMEGA_168)
    rho = embed_qubit_state(dark_bright(theta, phi).dark).rho
    rhs = lindblad_rhs(rho, hamiltonian_at(spec, 1e-9), measured_params)
    np.testing.assert_allclose(rhs, 0.0, atol=1e-12 * OMEGA_168)


def test_pure_decay_rate(measured_params):
    rhs = lindblad_rhs(QuantumState.basis(Level.A2), np.zeros((4, 4)), measured_params)
    assert rhs[2, 2].real == pytest.approx(-measured_params.decay_total, rel=1e-12)
    assert rhs[3, 3].real == pytest.approx(measured_params.gamma0, rel=1e-12)


def test_undriven_excitation_decays_exponentially(measured_params):
    generator = liouvillian(np.zeros((4, 4)), measured_params)
    x0 = QuantumState.basis(Level.A2).rho.reshape(-1)
    t1 = lifetime_consistency(measured_params).t1
    for t in (0.5e-9, 5e-9, 20e-9):
        p_a2 = np.real((expm(generator * t) @ x0).reshape(4, 4)[2, 2])
        assert p_a2 == pytest.approx(math.exp(-t / t1), rel=1e-6)


def test_no_shelving_decay_keeps_population_in_qubit(measured_params):
    params = replace(measured_params, gamma0=0.0).without_hopping()
    spec = named_gate_spec("X", TWO_PI * 60e6)
    final = propagate_and_relax(standard_state(StandardState.Z), spec, params)
    assert final.population(Level.ZERO) == pytest.approx(0.0, abs=1e-12)
    assert final.population(Level.MINUS_ONE) + final.population(Level.PLUS_ONE) == pytest.approx(1.0, abs=1e-8)


def test_envelope_following_detuning_closes_the_loop(ideal_params):
    spec = named_gate_spec("X(pi/2)", TWO_PI * 152e6, PulseEnvelope.trapezoid())
    bright = dark_bright(spec.theta, spec.phi).bright
    final = propagate(embed_qubit_state(bright), spec, ideal_params, steps_per_cycle=800)
    assert final.population(Level.A2) < 1e-10
    target = ideal_for_spec(spec).unitary @ bright
    assert state_fidelity(target, final) == pytest.approx(1.0, abs=1e-8)
