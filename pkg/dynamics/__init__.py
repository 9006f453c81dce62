"""
Dynamics Module

Lindblad propagation of the driven four-level system and the spectral-hopping
ensemble average used for layered decoherence studies.
"""

from .lindblad import DecoherenceParams, propagate, relax_excited, excited_population_trace
from .ensemble import HopQuadrature, DecoherenceLayers, hop_average, layered_fidelity

__all__ = [
    'DecoherenceParams',
    'propagate',
    'relax_excited',
    'excited_population_trace',
    'HopQuadrature',
    'DecoherenceLayers',
    'hop_average',
    'layered_fidelity',
]
