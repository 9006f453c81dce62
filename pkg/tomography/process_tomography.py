"""
Simulated state and process tomography

Pipeline for one gate:
1. prepare |z>, |-z>, |x>, |y>
2. propagate (optionally averaged over spectral hops) and relax |A2>
3. reconstruct each output's qubit block from its six projections
4. invert rho_out = sum_ij chi_ij E_i rho_in E_j^+ for chi
5. project chi onto the PSD cone (trace is not renormalized: leakage shows up
   as Tr(chi) < 1)

Operator basis: E1 = I, E2 = sigma_x, E3 = -i sigma_y, E4 = sigma_z.
"""

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from dynamics.ensemble import HopQuadrature, hop_average
from dynamics.lindblad import DEFAULT_STEPS_PER_CYCLE, DecoherenceParams, propagate_and_relax
from quantum_model.drive import GateSpec
from quantum_model.errors import DegenerateInputError
from quantum_model.holonomy import IdealGate
from quantum_model.states import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    QuantumState,
    StandardState,
    dagger,
    hermitize,
    projection_probability,
    standard_state,
)

logger = logging.getLogger(__name__)

BASIS_LABELS = ("I", "X", "-iY", "Z")
PROCESS_BASIS = (PAULI_I, PAULI_X, -1j * PAULI_Y, PAULI_Z)
TOMOGRAPHY_INPUTS = (StandardState.Z, StandardState.MINUS_Z, StandardState.X, StandardState.Y)
CONDITION_LIMIT = 1e10


@dataclass(frozen=True, eq=False)
class ProcessMatrix:
    """4x4 chi matrix in the (I, sigma_x, -i sigma_y, sigma_z) basis."""
    chi: np.ndarray

    def __post_init__(self):
        chi = np.array(self.chi, dtype=complex, copy=True)
        if chi.shape != (4, 4):
            raise ValueError(f"Process matrix must be 4x4, got {chi.shape}")
        chi.setflags(write=False)
        object.__setattr__(self, "chi", chi)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.chi)))

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(hermitize(self.chi))))

    def distance(self, other: "ProcessMatrix") -> float:
        return float(np.linalg.norm(self.chi - other.chi))

    def to_json_dict(self) -> Dict:
        return {
            "basis": list(BASIS_LABELS),
            "chi": [[[float(np.real(c)), float(np.imag(c))] for c in row] for row in self.chi],
        }

    @classmethod
    def from_json_dict(cls, data: Dict) -> "ProcessMatrix":
        if tuple(data.get("basis", ())) != BASIS_LABELS:
            raise ValueError(f"Unexpected operator basis {data.get('basis')}")
        return cls(np.array([[complex(re, im) for re, im in row] for row in data["chi"]]))


@dataclass(frozen=True)
class TomographyRecord:
    """Six projection probabilities of one output state."""
    input_state: StandardState
    projections: Dict[StandardState, float]


def measure_projections(state: QuantumState) -> Dict[StandardState, float]:
    """Projection probabilities on |+-x>, |+-y>, |+-z>."""
    return {s: projection_probability(state, s) for s in StandardState}


def state_tomography(state: Union[QuantumState, TomographyRecord]) -> np.ndarray:
    """
    Reconstruct the (possibly sub-normalized) qubit block from six projections.

    rho_q = (T*I + x*sigma_x + y*sigma_y + z*sigma_z)/2, where T is the
    qubit-subspace weight p(+s) + p(-s) averaged over the three axes.
    """
    probs = state.projections if isinstance(state, TomographyRecord) else measure_projections(state)
    components = []
    weight = 0.0
    for plus, minus in StandardState.pairs():
        components.append(probs[plus] - probs[minus])
        weight += probs[plus] + probs[minus]
    x, y, z = components
    return 0.5 * (weight / 3.0 * PAULI_I + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


@lru_cache(maxsize=1)
def _inversion_matrix() -> np.ndarray:
    """16x16 map from vec(chi) to the stacked outputs of the four inputs."""
    columns = []
    inputs = [standard_state(s).qubit_block for s in TOMOGRAPHY_INPUTS]
    for e_i in PROCESS_BASIS:
        for e_j in PROCESS_BASIS:
            columns.append(np.concatenate([(e_i @ rho @ dagger(e_j)).reshape(-1) for rho in inputs]))
    matrix = np.array(columns).T
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DegenerateInputError(f"Tomography inputs do not span the operator space (cond = {cond:.3e})")
    return matrix


def chi_from_outputs(outputs: Sequence[np.ndarray]) -> np.ndarray:
    """
    Invert the process relation for the four standard inputs.

    Args:
        outputs: qubit blocks for inputs |z>, |-z>, |x>, |y> in that order

    Returns:
        Raw (unprojected, Hermitized) chi
    """
    if len(outputs) != len(TOMOGRAPHY_INPUTS):
        raise DegenerateInputError(f"Need {len(TOMOGRAPHY_INPUTS)} outputs, got {len(outputs)}")
    stacked = np.concatenate([np.asarray(o, dtype=complex).reshape(-1) for o in outputs])
    chi = np.linalg.solve(_inversion_matrix(), stacked).reshape(4, 4)
    return hermitize(chi)


def psd_project(chi_raw: Union[np.ndarray, ProcessMatrix]) -> ProcessMatrix:
    """
    Nearest PSD matrix in Frobenius norm by clipping negative eigenvalues.

    The trace is left as is.
    """
    raw = chi_raw.chi if isinstance(chi_raw, ProcessMatrix) else np.asarray(chi_raw, dtype=complex)
    values, vectors = np.linalg.eigh(hermitize(raw))
    clipped = np.clip(values, 0.0, None)
    if np.any(values < 0):
        logger.debug(f"Clipped chi eigenvalues {values[values < 0]}")
    return ProcessMatrix(hermitize((vectors * clipped) @ dagger(vectors)))


def chi_ideal(gate: Union[IdealGate, np.ndarray]) -> ProcessMatrix:
    """Rank-1 chi = c c^+ with c the coefficients of U in the operator basis."""
    u = gate.unitary if isinstance(gate, IdealGate) else np.asarray(gate, dtype=complex)
    coeffs = np.array([np.trace(dagger(e) @ u) / 2.0 for e in PROCESS_BASIS])
    return ProcessMatrix(np.outer(coeffs, np.conj(coeffs)))


def process_fidelity(chi_a: ProcessMatrix, chi_b: ProcessMatrix) -> float:
    """Re Tr(chi_a chi_b); chi_b is the ideal (trace-1) side."""
    return float(np.real(np.trace(chi_a.chi @ chi_b.chi)))


def process_from_outputs(outputs: Sequence[np.ndarray]) -> ProcessMatrix:
    return psd_project(chi_from_outputs(outputs))


def identity_process() -> ProcessMatrix:
    """Process of the sequence without a pulse."""
    return process_from_outputs([standard_state(s).qubit_block for s in TOMOGRAPHY_INPUTS])


def simulate_records(gate: GateSpec,
                     params: DecoherenceParams,
                     hop: bool = False,
                     quad: Optional[HopQuadrature] = None,
                     dt_max: Optional[float] = None,
                     steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE) -> List[TomographyRecord]:
    """Run the gate on the four tomography inputs and record the projections."""
    records = []
    for s in TOMOGRAPHY_INPUTS:
        rho_in = standard_state(s)
        if hop:
            final = hop_average(rho_in, gate, params, quad, dt_max=dt_max, steps_per_cycle=steps_per_cycle)
        else:
            final = propagate_and_relax(rho_in, gate, params, dt_max, steps_per_cycle=steps_per_cycle)
        records.append(TomographyRecord(input_state=s, projections=measure_projections(final)))
    return records


def simulate_process(gate: GateSpec,
                     params: DecoherenceParams,
                     hop: bool = False,
                     quad: Optional[HopQuadrature] = None,
                     dt_max: Optional[float] = None,
                     steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE) -> ProcessMatrix:
    """
    Simulated process tomography of one gate.

    Args:
        gate: gate specification
        params: decoherence rates
        hop: average over the Gaussian spectral hop of width params.sigma_delta
        quad: hop quadrature (Gauss-Hermite with the default node count if omitted)
        dt_max: optional step bound passed to the integrator

    Returns:
        PSD-projected ProcessMatrix
    """
    records = simulate_records(gate, params, hop, quad, dt_max, steps_per_cycle)
    return process_from_outputs([state_tomography(r) for r in records])


def save_process_matrix(path: Union[str, Path], matrices: Dict[str, ProcessMatrix], extra: Optional[Dict] = None):
    """Write named chi matrices (and scalar extras such as the fidelity) as JSON."""
    payload = {name: pm.to_json_dict() for name, pm in matrices.items()}
    if extra:
        payload.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    logger.debug(f"Saved process matrices to {path}")


def load_process_matrix(path: Union[str, Path], name: str = "chi_sim") -> ProcessMatrix:
    with open(path, "r") as f:
        payload = json.load(f)
    return ProcessMatrix.from_json_dict(payload[name])
