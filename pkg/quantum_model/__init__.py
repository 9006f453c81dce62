"""
Quantum Model Module

Four-level NV Lambda-system state space, two-tone drive Hamiltonian and the
ideal holonomic gate algebra.
"""

from .drive import GateSpec, PulseEnvelope, dark_bright, hamiltonian_at, cycle_time, pulse_duration
from .holonomy import NamedGate, IdealGate, geometric_phase, ideal_unitary, named_gate_spec
from .states import QuantumState, StandardState, BlochVector, embed_qubit_state, bloch_of

__all__ = [
    'GateSpec',
    'PulseEnvelope',
    'dark_bright',
    'hamiltonian_at',
    'cycle_time',
    'pulse_duration',
    'NamedGate',
    'IdealGate',
    'geometric_phase',
    'ideal_unitary',
    'named_gate_spec',
    'QuantumState',
    'StandardState',
    'BlochVector',
    'embed_qubit_state',
    'bloch_of',
]
