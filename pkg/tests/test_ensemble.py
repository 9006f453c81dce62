import math

import numpy as np
import pytest

from dynamics.ensemble import DecoherenceLayers, HopQuadrature, hop_average, layered_fidelity
from dynamics.lindblad import DecoherenceParams, propagate_and_relax
from quantum_model.drive import AreaMode, PulseEnvelope, TWO_PI
from quantum_model.holonomy import NamedGate, named_gate_spec
from quantum_model.states import StandardState, standard_state

OMEGA_168 = TWO_PI * 168e6
SIGMA = TWO_PI * 15e6


def test_quadrature_matches_gaussian_moments():
    quad = HopQuadrature.gauss_hermite(SIGMA, 15)
    assert quad.n_nodes == 15
    assert quad.weights.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(quad.nodes + quad.nodes[::-1], 0.0, atol=1e-6)
    assert np.sum(quad.weights * quad.nodes) == pytest.approx(0.0, abs=1e-6)
    assert np.sum(quad.weights * quad.nodes ** 2) == pytest.approx(SIGMA ** 2, rel=1e-12)
    assert np.sum(quad.weights * quad.nodes ** 4) == pytest.approx(3 * SIGMA ** 4, rel=1e-10)


def test_quadrature_validation():
    with pytest.raises(ValueError):
        HopQuadrature.gauss_hermite(SIGMA, 0)
    with pytest.raises(ValueError):
        HopQuadrature(nodes=np.array([0.0, 1.0]), weights=np.array([0.3, 0.3]))


def test_zero_width_is_a_single_shot(measured_params):
    spec = named_gate_spec("X", OMEGA_168)
    rho_in = standard_state(StandardState.Z)
    params = measured_params.without_hopping()
    averaged = hop_average(rho_in, spec, params)
    single = propagate_and_relax(rho_in, spec, params)
    assert averaged.distance(single) < 1e-14


def test_node_order_does_not_matter(measured_params):
    spec = named_gate_spec("X(pi/2)", OMEGA_168)
    rho_in = standard_state(StandardState.Y)
    quad = HopQuadrature.gauss_hermite(measured_params.sigma_delta, 5)
    forward = hop_average(rho_in, spec, measured_params, quad)
    backward = hop_average(rho_in, spec, measured_params, quad.reversed())
    assert forward.distance(backward) < 1e-12
    forward.validate()


def test_hop_average_is_a_mixture(measured_params):
    spec = named_gate_spec("Z", TWO_PI * 60e6, gamma=math.pi)
    rho_in = standard_state(StandardState.X)
    quad = HopQuadrature.gauss_hermite(measured_params.sigma_delta, 7)
    averaged = hop_average(rho_in, spec, measured_params, quad)
    purity = float(np.real(np.trace(averaged.rho @ averaged.rho)))
    assert purity < 1.0 - 1e-4


def test_layers_switch_effects_on_cumulatively(measured_params):
    assert DecoherenceLayers.NONE.apply(measured_params) == DecoherenceParams(
        dephasing_mode=measured_params.dephasing_mode)
    t1 = DecoherenceLayers.T1_ONLY.apply(measured_params)
    assert t1.gamma_phi == 0 and t1.sigma_delta == 0 and t1.decay_total == measured_params.decay_total
    t1tphi = DecoherenceLayers.T1_AND_TPHI.apply(measured_params)
    assert t1tphi.gamma_phi == measured_params.gamma_phi and t1tphi.sigma_delta == 0
    assert DecoherenceLayers.FULL.apply(measured_params) == measured_params
    assert DecoherenceLayers.FULL.uses_hopping and not DecoherenceLayers.T1_AND_TPHI.uses_hopping


@pytest.mark.parametrize("gate", [g for g in NamedGate if g is not NamedGate.Z])
def test_decoherence_free_gates_are_exact(gate):
    assert layered_fidelity(gate, OMEGA_168, DecoherenceLayers.NONE) > 1 - 1e-6


def test_decoherence_free_phase_gate_is_exact():
    assert layered_fidelity("Z", OMEGA_168, DecoherenceLayers.NONE, gamma=0.3 * math.pi) > 1 - 1e-6


def test_fidelity_drops_layer_by_layer():
    fidelities = [layered_fidelity("X", OMEGA_168, layer, n_nodes=9) for layer in DecoherenceLayers]
    assert fidelities[0] > 1 - 1e-6
    assert all(a > b for a, b in zip(fidelities, fidelities[1:]))


def test_hopping_hurts_phase_gate_at_low_power():
    without = layered_fidelity("Z", TWO_PI * 60e6, DecoherenceLayers.T1_AND_TPHI, gamma=math.pi)
    with_hop = layered_fidelity("Z", TWO_PI * 60e6, DecoherenceLayers.FULL, gamma=math.pi, n_nodes=9)
    assert with_hop < without - 0.01


def test_trapezoid_gate_is_exact_without_decoherence():
    trap = PulseEnvelope.trapezoid()
    assert layered_fidelity("X(pi/2)", TWO_PI * 152e6, DecoherenceLayers.NONE, envelope=trap) > 1 - 1e-6
    assert layered_fidelity("Y(pi/2)", TWO_PI * 600e6, DecoherenceLayers.NONE, envelope=trap) > 1 - 1e-6


def test_rectangular_gate_is_exact_in_omega_area_mode():
    rect = PulseEnvelope.rectangular(AreaMode.OMEGA)
    assert layered_fidelity("Y(pi/2)", TWO_PI * 600e6, DecoherenceLayers.NONE, envelope=rect) > 1 - 1e-6


def test_spec_input_takes_new_power(ideal_params):
    spec = named_gate_spec("H", TWO_PI * 100e6)
    moved = layered_fidelity(spec, OMEGA_168, DecoherenceLayers.NONE, params=ideal_params)
    assert moved > 1 - 1e-6


@pytest.mark.slow
def test_quadrature_converges():
    coarse = layered_fidelity("Y(pi/2)", OMEGA_168, DecoherenceLayers.FULL, n_nodes=15)
    fine = layered_fidelity("Y(pi/2)", OMEGA_168, DecoherenceLayers.FULL, n_nodes=31)
    assert abs(coarse - fine) < 1e-6


@pytest.mark.slow
def test_higher_power_helps_under_full_decoherence():
    low = layered_fidelity("X", TWO_PI * 60e6, DecoherenceLayers.FULL)
    high = layered_fidelity("X", TWO_PI * 252e6, DecoherenceLayers.FULL)
    assert high > low
