import math

import numpy as np
import pytest

from quantum_model.drive import (
    AreaMode,
    GateSpec,
    PulseEnvelope,
    TWO_PI,
    bright_state_population,
    cycle_time,
    dark_bright,
    drive_profile,
    envelope_value,
    hamiltonian_at,
    hamiltonian_parts,
    pulse_area,
    pulse_duration,
    pulse_timing,
)
from quantum_model.errors import GateRangeError, InfeasiblePulseError
from quantum_model.holonomy import named_gate_spec
from quantum_model.states import StandardState, embed_qubit_vector, is_hermitian, standard_state

OMEGA_150 = TWO_PI * 150e6


@pytest.mark.parametrize("theta, phi", [(0.0, 0.0), (math.pi / 2, 0.0), (0.75 * math.pi, 1.3), (math.pi, 4.0)])
def test_dark_state_is_decoupled(theta, phi):
    spec = GateSpec(theta=theta, phi=phi, delta=0.4, omega=OMEGA_150)
    coupling, _ = hamiltonian_parts(spec)
    dark = embed_qubit_vector(dark_bright(theta, phi).dark)
    np.testing.assert_allclose(coupling @ dark, np.zeros(4), atol=1e-14)


def test_dark_and_bright_are_orthonormal():
    pair = dark_bright(1.1, 0.7)
    assert abs(np.vdot(pair.dark, pair.bright)) < 1e-14
    assert np.linalg.norm(pair.dark) == pytest.approx(1.0)
    assert np.linalg.norm(pair.bright) == pytest.approx(1.0)


def test_hamiltonian_is_hermitian_and_ignores_zero_level():
    spec = GateSpec(theta=0.3, phi=2.0, delta=-1.2, omega=OMEGA_150)
    h = hamiltonian_at(spec, 0.5 * pulse_duration(spec))
    assert is_hermitian(h)
    np.testing.assert_allclose(h[3, :], 0)
    np.testing.assert_allclose(h[:, 3], 0)
    assert h[2, 2] == pytest.approx(spec.detuning)


def test_rectangular_duration_is_cycle_time():
    spec = GateSpec(theta=0.0, phi=0.0, delta=0.5, omega=OMEGA_150)
    expected = TWO_PI / math.hypot(OMEGA_150, 0.5 * OMEGA_150)
    assert pulse_duration(spec) == pytest.approx(expected, rel=1e-12)
    assert cycle_time(OMEGA_150, spec.detuning) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("mode", [AreaMode.RABI, AreaMode.OMEGA])
def test_trapezoid_area_is_two_pi(mode):
    spec = named_gate_spec("X(pi/2)", OMEGA_150, PulseEnvelope.trapezoid(area_mode=mode))
    timing = pulse_timing(spec)
    assert timing.plateau > 0
    assert pulse_area(spec, timing) == pytest.approx(TWO_PI, rel=1e-9)


def test_trapezoid_is_longer_than_rectangle():
    rect = named_gate_spec("H", OMEGA_150)
    trap = rect.with_envelope(PulseEnvelope.trapezoid())
    assert pulse_duration(trap) > pulse_duration(rect)


def test_envelope_shape():
    spec = named_gate_spec("X", OMEGA_150, PulseEnvelope.trapezoid())
    timing = pulse_timing(spec)
    assert envelope_value(spec.omega, timing, -1e-12) == 0.0
    assert envelope_value(spec.omega, timing, 0.5 * timing.rise) == pytest.approx(0.5 * spec.omega)
    assert envelope_value(spec.omega, timing, timing.rise + 0.5 * timing.plateau) == spec.omega
    assert envelope_value(spec.omega, timing, timing.total + 1e-12) == 0.0


def test_ramps_exceeding_area_are_infeasible():
    spec = named_gate_spec("Y(pi/2)", TWO_PI * 1000e6, PulseEnvelope.trapezoid())
    with pytest.raises(InfeasiblePulseError):
        pulse_timing(spec)


def test_omega_area_mode_stays_feasible_longer():
    spec = named_gate_spec("Y(pi/2)", TWO_PI * 800e6, PulseEnvelope.trapezoid(area_mode=AreaMode.OMEGA))
    assert pulse_timing(spec).plateau > 0
    with pytest.raises(InfeasiblePulseError):
        pulse_timing(spec.with_envelope(PulseEnvelope.trapezoid(area_mode=AreaMode.RABI)))


def test_gate_spec_ranges():
    with pytest.raises(GateRangeError):
        GateSpec(theta=4.0, phi=0.0, delta=0.0, omega=OMEGA_150)
    with pytest.raises(GateRangeError):
        GateSpec(theta=1.0, phi=0.0, delta=0.0, omega=0.0)
    with pytest.raises(GateRangeError):
        GateSpec(theta=1.0, phi=0.0, delta=float("inf"), omega=OMEGA_150)


def test_phi_is_reduced_modulo_two_pi():
    spec = GateSpec(theta=1.0, phi=-math.pi / 2, delta=0.0, omega=OMEGA_150)
    assert spec.phi == pytest.approx(1.5 * math.pi)


def test_rectangular_envelope_rejects_ramps():
    with pytest.raises(ValueError):
        PulseEnvelope(rise=1e-9)


def test_bright_population_of_pole_state():
    state = standard_state(StandardState.Z)
    assert bright_state_population(state, math.pi / 2, 0.0) == pytest.approx(0.5)
    assert bright_state_population(state, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_with_detuning_keeps_omega():
    spec = GateSpec(theta=0.0, phi=0.0, delta=0.2, omega=OMEGA_150)
    shifted = spec.with_detuning(spec.detuning + TWO_PI * 15e6)
    assert shifted.omega == spec.omega
    assert shifted.delta == pytest.approx(0.3)


@pytest.mark.parametrize("mode", [AreaMode.RABI, AreaMode.OMEGA])
def test_rectangular_duration_ignores_area_mode(mode):
    spec = named_gate_spec("Y(pi/2)", TWO_PI * 600e6, PulseEnvelope.rectangular(mode))
    assert pulse_duration(spec) == pytest.approx(cycle_time(spec.omega, abs(spec.detuning)), rel=1e-14)


def test_trapezoid_adds_mean_ramp_to_cycle_time():
    spec = named_gate_spec("X(pi/2)", OMEGA_150, PulseEnvelope.trapezoid(rise=1.2e-9, fall=1.3e-9))
    expected = cycle_time(spec.omega, abs(spec.detuning)) + 1.25e-9
    assert pulse_duration(spec) == pytest.approx(expected, rel=1e-12)


def test_detuning_rides_the_ramps_in_rabi_mode():
    spec = named_gate_spec("X(pi/2)", OMEGA_150, PulseEnvelope.trapezoid())
    timing = pulse_timing(spec)
    assert drive_profile(spec, timing, 0.5 * timing.rise)[1] == pytest.approx(0.5 * spec.detuning)
    assert drive_profile(spec, timing, timing.rise + 0.5 * timing.plateau)[1] == pytest.approx(spec.detuning)
    # before the pulse only the programmed detuning remains
    assert drive_profile(spec, timing, -1e-12)[0] == 0.0
    assert drive_profile(spec, timing, -1e-12)[1] == pytest.approx(spec.detuning)
    fixed = spec.with_envelope(PulseEnvelope.trapezoid(area_mode=AreaMode.OMEGA))
    assert drive_profile(fixed, pulse_timing(fixed), 0.5 * timing.rise)[1] == pytest.approx(spec.detuning)


def test_offset_is_static():
    spec = named_gate_spec("X(pi/2)", OMEGA_150, PulseEnvelope.trapezoid())
    timing = pulse_timing(spec)
    shifted = spec.with_offset(TWO_PI * 15e6)
    assert pulse_timing(shifted) == timing
    omega_t, detuning_t = drive_profile(shifted, timing, 0.5 * timing.rise)
    assert omega_t == pytest.approx(0.5 * spec.omega)
    assert detuning_t == pytest.approx(0.5 * spec.detuning + TWO_PI * 15e6)
    h = hamiltonian_at(shifted, 0.5 * timing.rise, timing)
    assert h[2, 2] == pytest.approx(detuning_t)
    with pytest.raises(GateRangeError):
        spec.with_offset(float("nan"))
