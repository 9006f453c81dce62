"""
Four-level state space of the NV Lambda system

Basis order is fixed as (|-1>, |+1>, |A2>, |0>). The qubit lives in the
top-left 2x2 block with Bloch-sphere poles |z> = |-1> and |-z> = |+1>.

Provides:
- Small dense complex-matrix helpers (dagger, hermiticity/unitarity checks)
- QuantumState: immutable 4x4 density matrix with validation
- StandardState: the six tomography states |+-x>, |+-y>, |+-z>
- Bloch vectors, projection probabilities and state fidelities
"""

import logging
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Tuple

import numpy as np

from .errors import InvalidStateError, NormalizationError

logger = logging.getLogger(__name__)

DIM = 4
QUBIT_DIM = 2

# Construction vs post-integration tolerances
CONSTRUCTION_TOL = 1e-12
INTEGRATION_TOL = 1e-9
PSD_TOL = 1e-10


class Level(IntEnum):
    """Index of each level in the four-level basis."""
    MINUS_ONE = 0
    PLUS_ONE = 1
    A2 = 2
    ZERO = 3


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(m).T


def is_hermitian(m: np.ndarray, tol: float = CONSTRUCTION_TOL) -> bool:
    """True if max |M - M^dagger| <= tol."""
    return bool(np.max(np.abs(m - dagger(m))) <= tol)


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    """True if max |M^dagger M - I| <= tol."""
    identity = np.eye(m.shape[0], dtype=complex)
    return bool(np.max(np.abs(dagger(m) @ m - identity)) <= tol)


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return (M + M^dagger) / 2."""
    return 0.5 * (m + dagger(m))


def ket(level: Level) -> np.ndarray:
    """Unit vector of a basis level in the four-level space."""
    vec = np.zeros(DIM, dtype=complex)
    vec[int(level)] = 1.0
    return vec


def outer(bra_level: Level, ket_level: Level) -> np.ndarray:
    """|ket_level><bra_level| as a 4x4 matrix."""
    return np.outer(ket(ket_level), np.conj(ket(bra_level)))


def embed_qubit_vector(psi: np.ndarray) -> np.ndarray:
    """Pad a 2-component qubit vector to the four-level space."""
    vec = np.zeros(DIM, dtype=complex)
    vec[:QUBIT_DIM] = np.asarray(psi, dtype=complex)
    return vec


def embed_qubit_operator(op: np.ndarray) -> np.ndarray:
    """Place a 2x2 operator in the qubit block of a 4x4 zero matrix."""
    full = np.zeros((DIM, DIM), dtype=complex)
    full[:QUBIT_DIM, :QUBIT_DIM] = np.asarray(op, dtype=complex)
    return full


class StandardState(Enum):
    """The six tomography states on the |+-1> Bloch sphere."""
    Z = "z"
    MINUS_Z = "-z"
    X = "x"
    MINUS_X = "-x"
    Y = "y"
    MINUS_Y = "-y"

    @property
    def axis(self) -> str:
        return self.value.lstrip("-")

    @property
    def sign(self) -> int:
        return -1 if self.value.startswith("-") else 1

    @property
    def opposite(self) -> "StandardState":
        label = self.axis if self.sign < 0 else f"-{self.axis}"
        return StandardState(label)

    @property
    def vector(self) -> np.ndarray:
        """Qubit-subspace ket, |+-x> = (|z> +- |-z>)/sqrt2, |+-y> = (|z> +- i|-z>)/sqrt2."""
        s = float(self.sign)
        if self.axis == "z":
            return np.array([1, 0], dtype=complex) if s > 0 else np.array([0, 1], dtype=complex)
        if self.axis == "x":
            return np.array([1, s], dtype=complex) / np.sqrt(2)
        return np.array([1, 1j * s], dtype=complex) / np.sqrt(2)

    @classmethod
    def pairs(cls) -> Tuple[Tuple["StandardState", "StandardState"], ...]:
        """(+s, -s) pairs for the x, y, z axes, in that order."""
        return ((cls.X, cls.MINUS_X), (cls.Y, cls.MINUS_Y), (cls.Z, cls.MINUS_Z))


@dataclass(frozen=True)
class BlochVector:
    """Bloch vector projections of the qubit block (not renormalized by leakage)."""
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    @property
    def azimuth(self) -> float:
        """Equatorial phase atan2(Y_p, X_p) in [0, 2*pi)."""
        return float(np.mod(np.arctan2(self.y, self.x), 2 * np.pi))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """
    Density matrix of the four-level system.

    The stored array is a read-only copy, so instances can be shared freely
    between sweep workers.
    """
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex, copy=True)
        if rho.shape != (DIM, DIM):
            raise InvalidStateError(f"Density matrix must be {DIM}x{DIM}, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_ket(cls, psi: np.ndarray) -> "QuantumState":
        """Pure state from a four-component ket."""
        vec = np.asarray(psi, dtype=complex)
        return cls(np.outer(vec, np.conj(vec)))

    @classmethod
    def basis(cls, level: Level) -> "QuantumState":
        return cls.from_ket(ket(level))

    @property
    def qubit_block(self) -> np.ndarray:
        return np.array(self.rho[:QUBIT_DIM, :QUBIT_DIM])

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()

    def population(self, level: Level) -> float:
        return float(np.real(self.rho[int(level), int(level)]))

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    @property
    def qubit_trace(self) -> float:
        return float(np.real(np.trace(self.qubit_block)))

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(hermitize(self.rho))))

    def distance(self, other: "QuantumState") -> float:
        """Frobenius distance between density matrices."""
        return float(np.linalg.norm(self.rho - other.rho))

    def validate(self,
                 herm_tol: float = CONSTRUCTION_TOL,
                 trace_tol: float = INTEGRATION_TOL,
                 psd_tol: float = PSD_TOL) -> "QuantumState":
        """
        Check hermiticity, unit trace and positivity.

        Returns:
            self, for chaining

        Raises:
            InvalidStateError: if any bound is violated
        """
        herm_err = float(np.max(np.abs(self.rho - dagger(self.rho))))
        if herm_err > herm_tol:
            raise InvalidStateError(f"Density matrix not Hermitian (max deviation {herm_err:.3e})")
        if abs(self.trace - 1.0) > trace_tol:
            raise InvalidStateError(f"Trace {self.trace:.12f} outside 1 +- {trace_tol:.0e}")
        min_eig = self.min_eigenvalue()
        if min_eig < -psd_tol:
            raise InvalidStateError(f"Density matrix not positive (min eigenvalue {min_eig:.3e})")
        return self


def embed_qubit_state(psi: np.ndarray) -> QuantumState:
    """
    Embed a normalized qubit vector as a pure four-level state.

    Args:
        psi: 2-component complex vector over (|-1>, |+1>)

    Returns:
        QuantumState with qubit block |psi><psi| and empty |A2>, |0>

    Raises:
        NormalizationError: if ||psi|| deviates from 1 by more than 1e-12
    """
    vec = np.asarray(psi, dtype=complex).reshape(-1)
    if vec.shape != (QUBIT_DIM,):
        raise NormalizationError(f"Qubit vector must have 2 components, got {vec.shape[0]}")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > CONSTRUCTION_TOL:
        raise NormalizationError(f"Qubit vector not normalized (norm = {norm:.15f})")
    return QuantumState.from_ket(embed_qubit_vector(vec))


def standard_state(s: StandardState) -> QuantumState:
    """Embedded density matrix of one of the six tomography states."""
    return embed_qubit_state(s.vector)


def bloch_of(state: QuantumState) -> BlochVector:
    """
    Bloch vector of the qubit block.

    Uses the standard Pauli expectation values with |z> = |-1> as the north
    pole, so |x> maps to (1, 0, 0) and |y> to (0, 1, 0).
    """
    block = state.qubit_block
    rho01 = block[0, 1]
    return BlochVector(
        x=float(2.0 * np.real(rho01)),
        y=float(-2.0 * np.imag(rho01)),
        z=float(np.real(block[0, 0] - block[1, 1])),
    )


def projection_probability(state: QuantumState, s: StandardState) -> float:
    """Tr(rho |s><s|) with |s> embedded in the four-level space."""
    vec = embed_qubit_vector(s.vector)
    prob = float(np.real(np.conj(vec) @ state.rho @ vec))
    return float(np.clip(prob, 0.0, 1.0))


def state_fidelity(psi_target: np.ndarray, state: QuantumState) -> float:
    """
    Transfer fidelity Tr(|psi_f><psi_f| rho_f) for a qubit target vector.

    Population leaked out of the qubit subspace counts as loss.
    """
    vec = embed_qubit_vector(np.asarray(psi_target, dtype=complex) / np.linalg.norm(psi_target))
    return float(np.real(np.conj(vec) @ state.rho @ vec))
