"""
Ideal holonomic gate algebra

Decoherence-free single-loop gates: the geometric phase acquired by the
bright state, the evolution operator U = |d><d| + e^{i gamma}|b><b|, the
named gate catalog (config/gates.yaml) and geometric consistency checks.

Gate comparisons are made modulo global phase.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np
import yaml

from .drive import GateSpec, PulseEnvelope, dark_bright
from .errors import GateRangeError
from .states import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, dagger

logger = logging.getLogger(__name__)

DEFAULT_CATALOG_PATH = Path(__file__).parent.parent / "config" / "gates.yaml"


class NamedGate(Enum):
    """Gates of the catalog; values match the keys in config/gates.yaml."""
    X = "X"
    Y = "Y"
    Z = "Z"
    S = "S"
    T = "T"
    H = "H"
    X90 = "X(pi/2)"
    XM90 = "X(-pi/2)"
    Y90 = "Y(pi/2)"
    YM90 = "Y(-pi/2)"

    @classmethod
    def parse(cls, name: Union[str, "NamedGate"]) -> "NamedGate":
        """Accept the catalog key or the member name (case-insensitive)."""
        if isinstance(name, cls):
            return name
        key = str(name).strip()
        for gate in cls:
            if key == gate.value or key.upper() == gate.name:
                return gate
        raise GateRangeError(f"Unknown gate '{name}'. Known gates: {', '.join(g.value for g in cls)}")


@dataclass(frozen=True)
class GateEntry:
    """One catalog row: loop parameters and target rotation angle (None = caller supplies)."""
    gate: NamedGate
    theta: float
    phi: float
    gamma: Optional[float]
    description: str = ""


@dataclass(frozen=True)
class IdealGate:
    """
    Decoherence-free gate on the qubit subspace.

    Attributes:
        unitary: 2x2 matrix |d><d| + e^{i gamma}|b><b|
        axis: rotation axis n = (sin t cos p, sin t sin p, cos t)
        gamma: rotation angle in (0, 2*pi)
    """
    unitary: np.ndarray
    axis: Tuple[float, float, float]
    gamma: float


@lru_cache(maxsize=4)
def load_gate_catalog(path: Optional[str] = None) -> Dict[NamedGate, GateEntry]:
    """
    Load the named-gate table from YAML.

    Args:
        path: catalog file; defaults to config/gates.yaml

    Returns:
        Dictionary mapping NamedGate to GateEntry
    """
    catalog_path = Path(path) if path else DEFAULT_CATALOG_PATH
    try:
        with open(catalog_path, "r") as f:
            raw = yaml.safe_load(f)
    except Exception as e:
        logger.error(f"Error loading gate catalog: {e}")
        raise

    catalog = {}
    for key, row in raw["gates"].items():
        gate = NamedGate.parse(key)
        gamma = row.get("gamma_over_pi")
        catalog[gate] = GateEntry(
            gate=gate,
            theta=float(row["theta_over_pi"]) * math.pi,
            phi=float(row["phi_over_pi"]) * math.pi,
            gamma=None if gamma is None else float(gamma) * math.pi,
            description=row.get("description", ""),
        )
    logger.info(f"Loaded {len(catalog)} gates from {catalog_path}")
    return catalog


def geometric_phase(delta: float) -> float:
    """gamma = pi * (1 - delta / sqrt(1 + delta^2)), in (0, 2*pi)."""
    return math.pi * (1.0 - delta / math.sqrt(1.0 + delta * delta))


def delta_for_phase(gamma: float) -> float:
    """
    Invert the geometric-phase law for the detuning ratio.

    The law is monotone decreasing in delta, so the inverse is unique; its
    sign matches (1 - gamma/pi).

    Raises:
        GateRangeError: if gamma is not in the open interval (0, 2*pi)
    """
    if not (0.0 < gamma < 2.0 * math.pi):
        raise GateRangeError(f"Rotation angle must lie in (0, 2*pi), got {gamma}")
    x = 1.0 - gamma / math.pi
    return x / math.sqrt(1.0 - x * x)


def rotation_axis(theta: float, phi: float) -> Tuple[float, float, float]:
    return (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))


def rotation_unitary(axis: Iterable[float], gamma: float) -> np.ndarray:
    """e^{i gamma/2} e^{-i (gamma/2) n.sigma}."""
    nx, ny, nz = axis
    n_sigma = nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z
    half = gamma / 2.0
    return np.exp(1j * half) * (math.cos(half) * PAULI_I - 1j * math.sin(half) * n_sigma)


def ideal_unitary(theta: float, phi: float, delta: float) -> IdealGate:
    """Evolution operator of one decoherence-free square-pulse loop."""
    pair = dark_bright(theta, phi)
    gamma = geometric_phase(delta)
    unitary = (np.outer(pair.dark, np.conj(pair.dark))
               + np.exp(1j * gamma) * np.outer(pair.bright, np.conj(pair.bright)))
    return IdealGate(unitary=unitary, axis=rotation_axis(theta, phi), gamma=gamma)


def ideal_for_spec(spec: GateSpec) -> IdealGate:
    return ideal_unitary(spec.theta, spec.phi, spec.delta)


def named_gate_spec(gate: Union[NamedGate, str],
                    omega: float,
                    envelope: Optional[PulseEnvelope] = None,
                    gamma: Optional[float] = None,
                    catalog_path: Optional[str] = None) -> GateSpec:
    """
    Control parameters of a catalog gate.

    Args:
        gate: catalog gate
        omega: peak Rabi frequency (rad/s)
        envelope: pulse envelope (rectangular if omitted)
        gamma: target angle for the phase-shift family Z(gamma); ignored otherwise

    Raises:
        GateRangeError: Z(gamma) without gamma, or gamma outside (0, 2*pi)
    """
    entry = load_gate_catalog(catalog_path)[NamedGate.parse(gate)]
    target = entry.gamma
    if target is None:
        if gamma is None:
            raise GateRangeError(f"Gate {entry.gate.value} needs a rotation angle gamma")
        target = gamma
    return GateSpec(
        theta=entry.theta,
        phi=entry.phi,
        delta=delta_for_phase(target),
        omega=omega,
        envelope=envelope or PulseEnvelope.rectangular(),
    )


def solid_angle_check(delta: float) -> Tuple[float, float]:
    """
    Compare the phase law with half the solid angle of the bright-state cone.

    The bright state precesses on the |b>/|A2> sphere about an axis tilted by
    alpha with cos(alpha) = delta/sqrt(1 + delta^2); the enclosed solid angle
    is 2*pi*(1 - cos alpha). Sign conventions are not compared, only the
    magnitudes modulo 2*pi.

    Returns:
        (gamma_from_law, gamma_from_cone)
    """
    cos_alpha = delta / math.sqrt(1.0 + delta * delta)
    solid_angle = 2.0 * math.pi * (1.0 - cos_alpha)
    gamma_cone = math.fmod(solid_angle / 2.0, 2.0 * math.pi)
    return geometric_phase(delta), gamma_cone


def phase_distance(u1: np.ndarray, u2: np.ndarray) -> float:
    """min over phi of ||u1 - e^{i phi} u2||_F."""
    # aligning the phase first avoids cancellation between nearly equal norms
    overlap = np.trace(dagger(u2) @ u1)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u1 - phase * u2))


def synthesize(unitary: np.ndarray) -> Tuple[float, float, float]:
    """
    Loop parameters (theta, phi, delta) realizing a qubit unitary up to global phase.

    Raises:
        GateRangeError: for the identity (rotation angle 0 is not a single loop)
    """
    u = np.asarray(unitary, dtype=complex)
    su = u / np.sqrt(np.linalg.det(u))
    # su = cos(g/2) I - i sin(g/2) n.sigma
    cos_half = float(np.clip(np.real(np.trace(su)) / 2.0, -1.0, 1.0))
    gamma = 2.0 * math.acos(cos_half)
    sin_half = math.sin(gamma / 2.0)
    if sin_half < 1e-12 or gamma >= 2.0 * math.pi - 1e-12:
        raise GateRangeError("Identity cannot be realized by a single holonomic loop")
    n = np.array([
        -np.imag(np.trace(su @ PAULI_X)) / 2.0,
        -np.imag(np.trace(su @ PAULI_Y)) / 2.0,
        -np.imag(np.trace(su @ PAULI_Z)) / 2.0,
    ]) / sin_half
    n /= np.linalg.norm(n)
    theta = math.acos(float(np.clip(n[2], -1.0, 1.0)))
    phi = math.atan2(n[1], n[0]) % (2.0 * math.pi)
    return theta, phi, delta_for_phase(gamma)


def compose(*gates: Union[IdealGate, np.ndarray]) -> np.ndarray:
    """Unitary of a gate sequence applied in the given time order."""
    total = np.eye(2, dtype=complex)
    for gate in gates:
        u = gate.unitary if isinstance(gate, IdealGate) else np.asarray(gate, dtype=complex)
        total = u @ total
    return total


def composite_fidelity(*fidelities: float) -> float:
    """Product estimate for a sequence of independently characterized gates."""
    return float(np.prod(fidelities))
