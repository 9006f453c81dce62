import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from quantum_model.drive import TWO_PI
from quantum_model.errors import GateRangeError
from quantum_model.holonomy import (
    NamedGate,
    compose,
    composite_fidelity,
    delta_for_phase,
    geometric_phase,
    ideal_for_spec,
    ideal_unitary,
    load_gate_catalog,
    named_gate_spec,
    phase_distance,
    rotation_unitary,
    solid_angle_check,
    synthesize,
)
from quantum_model.states import PAULI_X, PAULI_Y, is_unitary

OMEGA = TWO_PI * 168e6


def unitary_of(name, gamma=None):
    return ideal_for_spec(named_gate_spec(name, OMEGA, gamma=gamma)).unitary


@pytest.mark.parametrize("delta, gamma", [
    (0.0, math.pi),
    (1 / math.sqrt(3), math.pi / 2),
    (-1 / math.sqrt(3), 1.5 * math.pi),
])
def test_geometric_phase_values(delta, gamma):
    assert geometric_phase(delta) == pytest.approx(gamma, abs=1e-12)


def test_geometric_phase_is_monotone_in_open_interval():
    deltas = np.linspace(-50, 50, 401)
    phases = np.array([geometric_phase(d) for d in deltas])
    assert np.all(np.diff(phases) < 0)
    assert np.all((phases > 0) & (phases < TWO_PI))


@pytest.mark.parametrize("gamma", [0.1, 1.0, math.pi, 4.0, 6.0])
def test_delta_for_phase_inverts_law(gamma):
    assert geometric_phase(delta_for_phase(gamma)) == pytest.approx(gamma, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.0, TWO_PI, -1.0, 7.0])
def test_delta_for_phase_rejects_out_of_range(gamma):
    with pytest.raises(GateRangeError):
        delta_for_phase(gamma)


def test_catalog_gates():
    assert phase_distance(unitary_of("X"), PAULI_X) < 1e-12
    assert phase_distance(unitary_of("Y"), PAULI_Y) < 1e-12
    np.testing.assert_allclose(unitary_of("S"), np.diag([1, 1j]), atol=1e-12)
    np.testing.assert_allclose(unitary_of("T"), np.diag([1, np.exp(1j * math.pi / 4)]), atol=1e-12)
    hadamard = np.array([[-1, 1], [1, 1]]) / math.sqrt(2)
    assert phase_distance(unitary_of("H"), hadamard) < 1e-12


def test_catalog_matches_rotation_formula():
    for gate in NamedGate:
        if gate is NamedGate.Z:
            continue
        ideal = ideal_for_spec(named_gate_spec(gate, OMEGA))
        assert is_unitary(ideal.unitary)
        assert phase_distance(ideal.unitary, rotation_unitary(ideal.axis, ideal.gamma)) < 1e-12


def test_x_then_h_is_y_quarter_turn():
    sequence = compose(ideal_for_spec(named_gate_spec("X", OMEGA)), ideal_for_spec(named_gate_spec("H", OMEGA)))
    assert phase_distance(sequence, unitary_of("Y(pi/2)")) < 1e-12


def test_half_turns_compose_to_full():
    x90 = unitary_of("X(pi/2)")
    assert phase_distance(compose(x90, x90), PAULI_X) < 1e-12
    assert phase_distance(compose(x90, unitary_of("X(-pi/2)")), np.eye(2)) < 1e-12


def test_z_requires_gamma():
    with pytest.raises(GateRangeError):
        named_gate_spec("Z", OMEGA)
    spec = named_gate_spec("Z", OMEGA, gamma=0.3 * math.pi)
    assert spec.theta == 0.0
    np.testing.assert_allclose(unitary_of("Z", 0.3 * math.pi), np.diag([1, np.exp(0.3j * math.pi)]), atol=1e-12)


@pytest.mark.parametrize("text, gate", [
    ("X", NamedGate.X),
    ("h", NamedGate.H),
    ("Y(pi/2)", NamedGate.Y90),
    ("XM90", NamedGate.XM90),
])
def test_parse(text, gate):
    assert NamedGate.parse(text) is gate


def test_parse_unknown_gate():
    with pytest.raises(GateRangeError):
        NamedGate.parse("CNOT")


def test_catalog_has_every_gate():
    assert set(load_gate_catalog()) == set(NamedGate)


def test_synthesize_random_unitaries():
    for u in unitary_group.rvs(2, size=20, random_state=7):
        theta, phi, delta = synthesize(u)
        assert phase_distance(ideal_unitary(theta, phi, delta).unitary, u) < 1e-9


def test_synthesize_rejects_identity():
    with pytest.raises(GateRangeError):
        synthesize(np.eye(2) * np.exp(0.4j))


@pytest.mark.parametrize("delta", [-3.0, -0.5, 0.0, 0.5, 3.0])
def test_phase_equals_half_solid_angle(delta):
    from_law, from_cone = solid_angle_check(delta)
    assert from_law == pytest.approx(from_cone, abs=1e-12)


def test_phase_distance_ignores_global_phase():
    u = unitary_of("H")
    assert phase_distance(u, np.exp(1.1j) * u) < 1e-12
    assert phase_distance(u, PAULI_X) > 0.1


def test_composite_fidelity_is_product():
    assert composite_fidelity(0.74, 0.74) == pytest.approx(0.5476)
    assert composite_fidelity() == 1.0


@pytest.mark.parametrize("delta", [0.0, 0.3, 1 / math.sqrt(3), 2.0, 15.0])
def test_opposite_detunings_sum_to_full_turn(delta):
    assert geometric_phase(delta) + geometric_phase(-delta) == pytest.approx(TWO_PI, abs=1e-12)


def test_ideal_unitary_is_unitary():
    rng = np.random.default_rng(21)
    for theta, phi, delta in zip(rng.uniform(0, math.pi, 1000), rng.uniform(0, TWO_PI, 1000),
                                 rng.uniform(-3, 3, 1000)):
        u = ideal_unitary(theta, phi, delta).unitary
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("theta, phi", [(0.0, 0.0), (math.pi / 2, 0.0), (0.75 * math.pi, 0.0), (1.3, 4.1)])
def test_resonant_gates_swap_dark_and_bright(theta, phi):
    # shifting theta by pi exchanges |d> and |b>; a pi rotation does not notice
    u = ideal_unitary(theta, phi, 0.0).unitary
    assert phase_distance(u, ideal_unitary(theta + math.pi, phi, 0.0).unitary) < 1e-12
    assert phase_distance(u, -u) < 1e-12
