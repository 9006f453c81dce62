"""
Tomography Module

Simulated state/process tomography, chi-matrix reconstruction and fidelities.
"""

from .process_tomography import (
    ProcessMatrix,
    chi_ideal,
    process_fidelity,
    psd_project,
    simulate_process,
    state_tomography,
)

__all__ = [
    'ProcessMatrix',
    'chi_ideal',
    'process_fidelity',
    'psd_project',
    'simulate_process',
    'state_tomography',
]
