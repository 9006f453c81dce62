"""
Two-tone optical drive of the Lambda system

Builds the rotating-frame Hamiltonian from the control triple
(theta, phi, delta = Delta/Omega), models the common pulse envelope
(rectangular or trapezoidal) and solves the pulse timing for a 2*pi area.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import GateRangeError, InfeasiblePulseError
from .states import Level, QuantumState, embed_qubit_vector, outer

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_RAMP_S = 1.2e-9


class EnvelopeKind(Enum):
    RECTANGULAR = "rect"
    TRAPEZOID = "trap"


class AreaMode(Enum):
    """How the 2*pi pulse-area condition is evaluated."""
    RABI = "rabi"    # integral of sqrt(Omega(t)^2 + Delta(t)^2) dt, Delta(t) = delta * Omega(t)
    OMEGA = "omega"  # integral of Omega(t) dt, Delta fixed


@dataclass(frozen=True)
class PulseEnvelope:
    """
    Shape of the envelope common to both tones.

    Ramps are linear in field amplitude. The plateau length is not stored
    here: it follows from the area condition (see pulse_timing).
    """
    kind: EnvelopeKind = EnvelopeKind.RECTANGULAR
    rise: float = 0.0
    fall: float = 0.0
    area_mode: AreaMode = AreaMode.RABI

    def __post_init__(self):
        if self.rise < 0 or self.fall < 0:
            raise ValueError(f"Ramp times must be non-negative (rise={self.rise}, fall={self.fall})")
        if self.kind is EnvelopeKind.RECTANGULAR and (self.rise or self.fall):
            raise ValueError("Rectangular envelope cannot have ramps")

    @classmethod
    def rectangular(cls, area_mode: AreaMode = AreaMode.RABI) -> "PulseEnvelope":
        return cls(EnvelopeKind.RECTANGULAR, 0.0, 0.0, area_mode)

    @classmethod
    def trapezoid(cls,
                  rise: float = DEFAULT_RAMP_S,
                  fall: float = DEFAULT_RAMP_S,
                  area_mode: AreaMode = AreaMode.RABI) -> "PulseEnvelope":
        return cls(EnvelopeKind.TRAPEZOID, rise, fall, area_mode)


@dataclass(frozen=True)
class PulseTiming:
    """Segment lengths of one pulse, starting at t = 0."""
    rise: float
    plateau: float
    fall: float

    @property
    def total(self) -> float:
        return self.rise + self.plateau + self.fall

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        """Segment boundaries (0, end of rise, end of plateau, end)."""
        return (0.0, self.rise, self.rise + self.plateau, self.total)


@dataclass(frozen=True)
class GateSpec:
    """
    Control parameters of one holonomic gate.

    Attributes:
        theta: polar loop parameter in [0, pi]
        phi: azimuthal loop parameter, reduced to [0, 2*pi)
        delta: detuning ratio Delta/Omega
        omega: peak Rabi frequency in rad/s
        envelope: pulse envelope
        offset: static detuning shift in rad/s (a spectral hop of the
                transition); unlike the programmed detuning it never
                follows the envelope
    """
    theta: float
    phi: float
    delta: float
    omega: float
    envelope: PulseEnvelope = field(default_factory=PulseEnvelope)
    offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise GateRangeError(f"Rabi frequency must be positive and finite, got {self.omega}")
        if not math.isfinite(self.delta * self.omega):
            raise GateRangeError(f"Detuning ratio gives non-finite detuning: {self.delta}")
        if not math.isfinite(self.offset):
            raise GateRangeError(f"Detuning offset must be finite, got {self.offset}")
        if not (-1e-12 <= self.theta <= math.pi + 1e-12):
            raise GateRangeError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(np.mod(self.phi, TWO_PI)))

    @property
    def detuning(self) -> float:
        """One-photon detuning Delta in rad/s."""
        return self.delta * self.omega

    @property
    def u(self) -> complex:
        return complex(math.sin(self.theta / 2))

    @property
    def v(self) -> complex:
        return -math.cos(self.theta / 2) * np.exp(-1j * self.phi)

    def with_detuning(self, detuning: float) -> "GateSpec":
        """Same gate with another programmed detuning (rad/s)."""
        return replace(self, delta=detuning / self.omega)

    def with_offset(self, offset: float) -> "GateSpec":
        return replace(self, offset=offset)

    def with_envelope(self, envelope: PulseEnvelope) -> "GateSpec":
        return replace(self, envelope=envelope)


@dataclass(frozen=True)
class DarkBrightPair:
    dark: np.ndarray
    bright: np.ndarray


def dark_bright(theta: float, phi: float) -> DarkBrightPair:
    """
    Dark and bright qubit states of the drive (theta, phi).

    |d> = cos(theta/2)|-1> + sin(theta/2) e^{i phi}|+1>
    |b> = sin(theta/2)|-1> - cos(theta/2) e^{i phi}|+1>
    """
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    phase = np.exp(1j * phi)
    dark = np.array([c, s * phase], dtype=complex)
    bright = np.array([s, -c * phase], dtype=complex)
    return DarkBrightPair(dark=dark, bright=bright)


def hamiltonian_parts(spec: GateSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split H(t) = Omega(t) * coupling + Delta * projector.

    Returns:
        (coupling, projector): coupling = (u|A2><-1| + v|A2><+1| + h.c.)/2,
        projector = |A2><A2|. Row and column of |0> are zero.
    """
    lower = spec.u * outer(Level.MINUS_ONE, Level.A2) + spec.v * outer(Level.PLUS_ONE, Level.A2)
    coupling = 0.5 * (lower + np.conj(lower).T)
    projector = outer(Level.A2, Level.A2)
    return coupling, projector


def cycle_time(omega: float, delta_abs: float) -> float:
    """T_2pi = 2*pi / sqrt(Omega^2 + Delta^2)."""
    if omega <= 0:
        raise GateRangeError(f"Rabi frequency must be positive, got {omega}")
    return TWO_PI / math.hypot(omega, delta_abs)


def follows_envelope(envelope: PulseEnvelope) -> bool:
    """True if the programmed detuning is scaled by the envelope on the ramps."""
    return envelope.area_mode is AreaMode.RABI


def pulse_timing(spec: GateSpec) -> PulseTiming:
    """
    Solve the plateau length so the pulse area equals 2*pi.

    Rectangular pulses always last T_2pi. In rabi mode the detuning rides
    the envelope, Delta(t) = delta * Omega(t), so each linear ramp carries
    half its length times sqrt(Omega^2 + Delta^2) of generalized area and
    the shaped pulse closes the same loop as the rectangle. In omega mode
    Delta stays fixed and the plateau is solved from the integral of
    Omega(t) alone.

    Args:
        spec: gate specification (envelope and area mode included)

    Returns:
        PulseTiming with closed-form plateau

    Raises:
        InfeasiblePulseError: if the ramps alone exceed 2*pi area
    """
    env = spec.envelope
    omega = spec.omega
    if env.kind is EnvelopeKind.RECTANGULAR:
        return PulseTiming(rise=0.0, plateau=cycle_time(omega, abs(spec.detuning)), fall=0.0)

    rate = math.hypot(omega, spec.detuning) if follows_envelope(env) else omega
    ramp_area = 0.5 * rate * (env.rise + env.fall)
    if ramp_area > TWO_PI:
        raise InfeasiblePulseError(
            f"Ramps (rise={env.rise:.3e} s, fall={env.fall:.3e} s) carry area "
            f"{ramp_area:.4f} > 2*pi at Omega/2pi = {omega / TWO_PI / 1e6:.1f} MHz"
        )
    plateau = (TWO_PI - ramp_area) / rate
    return PulseTiming(rise=env.rise, plateau=plateau, fall=env.fall)


def pulse_duration(spec: GateSpec) -> float:
    """Total pulse length in seconds (rectangular: exactly T_2pi)."""
    return pulse_timing(spec).total


def envelope_value(omega: float, timing: PulseTiming, t: float) -> float:
    """Omega(t): zero outside the pulse, omega on the plateau, linear on ramps."""
    if t < 0 or t > timing.total:
        return 0.0
    if t < timing.rise:
        return omega * t / timing.rise
    plateau_end = timing.rise + timing.plateau
    if t <= plateau_end:
        return omega
    return omega * (timing.total - t) / timing.fall


def drive_profile(spec: GateSpec, timing: PulseTiming, t: float) -> Tuple[float, float]:
    """
    (Omega(t), Delta(t)) applied at time t.

    Delta(t) is the programmed detuning, scaled by the envelope inside the
    pulse window when it follows the envelope, plus the static offset.
    """
    omega_t = envelope_value(spec.omega, timing, t)
    detuning_t = spec.detuning
    if follows_envelope(spec.envelope) and 0.0 <= t <= timing.total:
        detuning_t = spec.detuning * omega_t / spec.omega
    return omega_t, detuning_t + spec.offset


def hamiltonian_at(spec: GateSpec, t: float, timing: Optional[PulseTiming] = None) -> np.ndarray:
    """
    Rotating-frame Hamiltonian at time t (pulse starts at t = 0).

    H = (Omega(t)/2)(u|A2><-1| + v|A2><+1| + h.c.) + Delta(t)|A2><A2|
    """
    if timing is None:
        timing = pulse_timing(spec)
    coupling, projector = hamiltonian_parts(spec)
    omega_t, detuning_t = drive_profile(spec, timing, t)
    return omega_t * coupling + detuning_t * projector


def pulse_area(spec: GateSpec, timing: Optional[PulseTiming] = None) -> float:
    """
    Numerical pulse area over [0, total] by adaptive quadrature.

    Rabi mode integrates sqrt(Omega(t)^2 + Delta(t)^2), omega mode Omega(t).
    """
    if timing is None:
        timing = pulse_timing(spec)
    rabi = follows_envelope(spec.envelope)

    def integrand(t: float) -> float:
        omega_t, detuning_t = drive_profile(spec, timing, t)
        return math.hypot(omega_t, detuning_t) if rabi else omega_t

    area = 0.0
    bounds = timing.breakpoints
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi > lo:
            value, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
            area += value
    return area


def bright_state_population(state: QuantumState, theta: float, phi: float) -> float:
    """<b|rho|b> for the bright state of drive (theta, phi)."""
    vec = embed_qubit_vector(dark_bright(theta, phi).bright)
    return float(np.real(np.conj(vec) @ state.rho @ vec))


def drive_summary(spec: GateSpec) -> dict:
    """Flat description of a gate spec in lab units, for logs and metadata."""
    timing = pulse_timing(spec)
    return {
        "theta": spec.theta,
        "phi": spec.phi,
        "delta": spec.delta,
        "omega_mhz": spec.omega / TWO_PI / 1e6,
        "detuning_mhz": spec.detuning / TWO_PI / 1e6,
        "envelope": spec.envelope.kind.value,
        "duration_ns": timing.total * 1e9,
    }


