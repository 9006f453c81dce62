import numpy as np
import pytest

from quantum_model.errors import InvalidStateError, NormalizationError
from quantum_model.states import (
    Level,
    QuantumState,
    StandardState,
    bloch_of,
    embed_qubit_state,
    projection_probability,
    standard_state,
    state_fidelity,
)


def test_embed_z_populates_minus_one():
    state = embed_qubit_state(np.array([1, 0]))
    np.testing.assert_allclose(state.populations, [1, 0, 0, 0])
    state.validate()


def test_embed_rejects_unnormalized_vector():
    with pytest.raises(NormalizationError):
        embed_qubit_state(np.array([1.0, 1.0]))


@pytest.mark.parametrize("s, expected", [
    (StandardState.Z, (0, 0, 1)),
    (StandardState.MINUS_Z, (0, 0, -1)),
    (StandardState.X, (1, 0, 0)),
    (StandardState.MINUS_X, (-1, 0, 0)),
    (StandardState.Y, (0, 1, 0)),
    (StandardState.MINUS_Y, (0, -1, 0)),
])
def test_bloch_vectors_of_standard_states(s, expected):
    np.testing.assert_allclose(bloch_of(standard_state(s)).as_array(), expected, atol=1e-12)


def test_projections_of_x():
    state = standard_state(StandardState.X)
    assert projection_probability(state, StandardState.X) == pytest.approx(1.0)
    assert projection_probability(state, StandardState.MINUS_X) == pytest.approx(0.0, abs=1e-12)
    assert projection_probability(state, StandardState.Z) == pytest.approx(0.5)


def test_leaked_population_is_missing_from_projection_pairs():
    rho = 0.7 * standard_state(StandardState.Z).rho + 0.3 * QuantumState.basis(Level.ZERO).rho
    state = QuantumState(rho).validate()
    for plus, minus in StandardState.pairs():
        total = projection_probability(state, plus) + projection_probability(state, minus)
        assert total == pytest.approx(0.7)


def test_state_fidelity_with_itself_and_orthogonal():
    y = StandardState.Y
    assert state_fidelity(y.vector, standard_state(y)) == pytest.approx(1.0)
    assert state_fidelity(y.opposite.vector, standard_state(y)) == pytest.approx(0.0, abs=1e-12)


def test_opposite_and_axis():
    assert StandardState.MINUS_X.opposite is StandardState.X
    assert StandardState.Y.axis == "y"
    assert StandardState.MINUS_Z.sign == -1


def test_state_is_read_only():
    state = standard_state(StandardState.Z)
    with pytest.raises(ValueError):
        state.rho[0, 0] = 0.5


def test_validate_rejects_bad_trace_and_non_hermitian():
    with pytest.raises(InvalidStateError):
        QuantumState(2 * standard_state(StandardState.Z).rho).validate()
    rho = np.array(standard_state(StandardState.X).rho)
    rho[0, 1] += 0.1
    with pytest.raises(InvalidStateError):
        QuantumState(rho).validate()


def test_validate_rejects_negative_eigenvalue():
    rho = np.diag([1.2, -0.2, 0, 0]).astype(complex)
    with pytest.raises(InvalidStateError):
        QuantumState(rho).validate()


def test_wrong_shape_is_rejected():
    with pytest.raises(InvalidStateError):
        QuantumState(np.eye(2))
