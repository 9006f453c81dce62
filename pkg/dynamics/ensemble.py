"""
Spectral-hopping ensemble and layered decoherence

Initialization kicks the charge environment, shifting the |A2> transition by
a quasi-static Gaussian detuning error. The final density matrix is the
Gaussian average over that error, evaluated with Gauss-Hermite quadrature.
The pulse timing is solved once at the intended detuning: the hop is unknown
to whoever programs the pulse.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from quantum_model.drive import GateSpec, PulseEnvelope, pulse_timing
from quantum_model.states import QuantumState

from .lindblad import DEFAULT_STEPS_PER_CYCLE, DecoherenceParams, propagate_and_relax

logger = logging.getLogger(__name__)

DEFAULT_HOP_NODES = 15


@dataclass(frozen=True)
class HopQuadrature:
    """Detuning offsets (rad/s) and normalized weights of the hop average."""
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("Quadrature nodes and weights must be equal-length 1-D arrays")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"Quadrature weights must be positive and sum to 1 (sum = {weights.sum()!r})")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.size)

    @classmethod
    def gauss_hermite(cls, sigma: float, n_nodes: int = DEFAULT_HOP_NODES) -> "HopQuadrature":
        """Probabilists' Gauss-Hermite rule scaled to a Gaussian of std-dev sigma."""
        if n_nodes < 1:
            raise ValueError(f"Need at least one quadrature node, got {n_nodes}")
        x, w = hermegauss(n_nodes)
        return cls(nodes=sigma * x, weights=w / w.sum())

    def reversed(self) -> "HopQuadrature":
        return HopQuadrature(nodes=self.nodes[::-1].copy(), weights=self.weights[::-1].copy())


class DecoherenceLayers(Enum):
    """Decoherence effects switched on cumulatively."""
    NONE = "none"
    T1_ONLY = "t1"
    T1_AND_TPHI = "t1tphi"
    FULL = "full"

    @property
    def uses_hopping(self) -> bool:
        return self is DecoherenceLayers.FULL

    def apply(self, params: DecoherenceParams) -> DecoherenceParams:
        """Subset of params active for this layer."""
        if self is DecoherenceLayers.NONE:
            return DecoherenceParams(dephasing_mode=params.dephasing_mode)
        if self is DecoherenceLayers.T1_ONLY:
            return replace(params, gamma_phi=0.0, sigma_delta=0.0)
        if self is DecoherenceLayers.T1_AND_TPHI:
            return replace(params, sigma_delta=0.0)
        return params


def hop_average(rho0: QuantumState,
                spec: GateSpec,
                params: DecoherenceParams,
                quad: Optional[HopQuadrature] = None,
                dt_max: Optional[float] = None,
                steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE) -> QuantumState:
    """
    Gaussian average over the detuning hop of propagate-then-relax.

    Each node shifts the transition by a static offset; pulse timing stays
    the one solved for the intended detuning.

    Args:
        rho0: initial state
        spec: gate at the intended detuning Delta_0
        params: decoherence rates; sigma_delta sets the default quadrature width
        quad: explicit quadrature (nodes already in rad/s)

    Returns:
        Weighted mixture sum_k w_k rho(Delta_0 + node_k), summed in node order
    """
    if quad is None:
        if params.sigma_delta == 0:
            return propagate_and_relax(rho0, spec, params, dt_max, steps_per_cycle=steps_per_cycle)
        quad = HopQuadrature.gauss_hermite(params.sigma_delta)

    timing = pulse_timing(spec)
    mixture = np.zeros_like(rho0.rho)
    for node, weight in zip(quad.nodes, quad.weights):
        shifted = spec.with_offset(spec.offset + node)
        final = propagate_and_relax(rho0, shifted, params, dt_max, timing=timing, steps_per_cycle=steps_per_cycle)
        mixture = mixture + weight * final.rho
    logger.debug(f"Averaged {quad.n_nodes} hop nodes around {spec.detuning / (2 * np.pi * 1e6):.2f} MHz")
    return QuantumState(mixture)


def layered_fidelity(gate: Union[GateSpec, str],
                     omega: float,
                     layers: DecoherenceLayers,
                     params: Optional[DecoherenceParams] = None,
                     envelope: Optional[PulseEnvelope] = None,
                     gamma: Optional[float] = None,
                     n_nodes: int = DEFAULT_HOP_NODES,
                     steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE) -> float:
    """
    Process fidelity of a gate with a cumulative subset of decoherence effects.

    Args:
        gate: catalog gate name/NamedGate, or a GateSpec (its omega is replaced)
        omega: peak Rabi frequency (rad/s)
        layers: which effects are on
        params: full decoherence parameter set (measured NV rates by default)
        envelope: pulse envelope (rectangular by default)
        gamma: target angle for Z(gamma)

    Returns:
        Tr(chi_sim chi_ideal)
    """
    # local import: tomography depends on hop_average above
    from quantum_model.holonomy import ideal_for_spec, named_gate_spec
    from tomography.process_tomography import chi_ideal, process_fidelity, simulate_process

    if params is None:
        params = DecoherenceParams.from_mhz()
    if isinstance(gate, GateSpec):
        spec = replace(gate, omega=omega, envelope=envelope or gate.envelope)
    else:
        spec = named_gate_spec(gate, omega, envelope, gamma)

    active = layers.apply(params)
    quad = HopQuadrature.gauss_hermite(active.sigma_delta, n_nodes) if layers.uses_hopping and active.sigma_delta > 0 else None
    chi_sim = simulate_process(spec, active, hop=layers.uses_hopping, quad=quad, steps_per_cycle=steps_per_cycle)
    fidelity = process_fidelity(chi_sim, chi_ideal(ideal_for_spec(spec)))
    logger.debug(f"Layer {layers.value}: F = {fidelity:.6f} at Omega/2pi = {omega / (2 * np.pi * 1e6):.1f} MHz")
    return fidelity
