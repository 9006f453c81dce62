"""
Lindblad master-equation propagation of the driven four-level system

Propagation works on the row-major vectorized density matrix with a 16x16
Liouvillian L(t) = Omega(t) * L_coupling + Delta(t) * L_detuning + D, where D
collects the four jump channels:

- |A2> -> |0>   at Gamma_0
- |A2> -> |-1>  at Gamma_-1
- |A2> -> |+1>  at Gamma_+1
- orbital dephasing of |A2> with jump operator |A2><A2|

Integration is fixed-step classical RK4, one segment of the trapezoid at a
time so the envelope kinks fall on step boundaries.

Delta(t) comes from drive_profile: constant, or scaled by the envelope in
rabi area mode, plus the static spectral-hop offset.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import expm

from quantum_model.drive import (
    GateSpec,
    PulseTiming,
    cycle_time,
    drive_profile,
    hamiltonian_parts,
    pulse_timing,
)
from quantum_model.errors import IntegratorAccuracyError
from quantum_model.states import DIM, Level, QuantumState, outer

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
TRACE_BUDGET = 1e-9
DEFAULT_STEPS_PER_CYCLE = 400
MIN_STEPS_PER_CYCLE = 200
RAMP_STEP_DIVISOR = 20

_IDENTITY = np.eye(DIM, dtype=complex)


class DephasingMode(Enum):
    """Rate carried by the |A2><A2| jump operator."""
    DOUBLE = "double"  # 2 * Gamma_phi
    SINGLE = "single"  # Gamma_phi


@dataclass(frozen=True)
class DecoherenceParams:
    """
    Environment of the Lambda system. All rates are angular (rad/s).

    Attributes:
        gamma0: decay |A2> -> |0>
        gamma_m1: decay |A2> -> |-1>
        gamma_p1: decay |A2> -> |+1>
        gamma_phi: orbital dephasing parameter
        sigma_delta: std-dev of the quasi-static detuning hop
        dephasing_mode: whether the dephasing channel rate is 2*gamma_phi or gamma_phi
    """
    gamma0: float = 0.0
    gamma_m1: float = 0.0
    gamma_p1: float = 0.0
    gamma_phi: float = 0.0
    sigma_delta: float = 0.0
    dephasing_mode: DephasingMode = DephasingMode.DOUBLE

    def __post_init__(self):
        for name in ("gamma0", "gamma_m1", "gamma_p1", "gamma_phi", "sigma_delta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be a non-negative finite rate, got {value}")

    @classmethod
    def from_mhz(cls,
                 gamma0: float = 1.6,
                 gamma_m1: float = 8.5,
                 gamma_p1: float = 4.3,
                 gamma_orb: float = 8.8,
                 sigma: float = 15.0,
                 dephasing_mode: DephasingMode = DephasingMode.DOUBLE) -> "DecoherenceParams":
        """Build from rate/2pi values in MHz (defaults are the measured NV rates)."""
        scale = TWO_PI * 1e6
        return cls(
            gamma0=gamma0 * scale,
            gamma_m1=gamma_m1 * scale,
            gamma_p1=gamma_p1 * scale,
            gamma_phi=gamma_orb * scale,
            sigma_delta=sigma * scale,
            dephasing_mode=dephasing_mode,
        )

    @classmethod
    def ideal(cls) -> "DecoherenceParams":
        return cls()

    @property
    def decay_total(self) -> float:
        return self.gamma0 + self.gamma_m1 + self.gamma_p1

    @property
    def dephasing_rate(self) -> float:
        """Rate of the |A2><A2| jump channel."""
        factor = 2.0 if self.dephasing_mode is DephasingMode.DOUBLE else 1.0
        return factor * self.gamma_phi

    @property
    def is_dissipative(self) -> bool:
        return self.decay_total > 0 or self.gamma_phi > 0

    def without_hopping(self) -> "DecoherenceParams":
        return replace(self, sigma_delta=0.0)

    def to_mhz(self) -> dict:
        scale = TWO_PI * 1e6
        return {
            "gamma0_mhz": self.gamma0 / scale,
            "gamma_m1_mhz": self.gamma_m1 / scale,
            "gamma_p1_mhz": self.gamma_p1 / scale,
            "gamma_orb_mhz": self.gamma_phi / scale,
            "sigma_mhz": self.sigma_delta / scale,
            "dephasing_mode": self.dephasing_mode.value,
        }


@dataclass(frozen=True)
class PopulationTrace:
    """Level populations sampled during a continuous drive."""
    times: np.ndarray
    populations: np.ndarray  # shape (n_points, 4), columns in Level order

    @property
    def p_a2(self) -> np.ndarray:
        return self.populations[:, int(Level.A2)]


@dataclass(frozen=True)
class LifetimeReport:
    """Aggregate times derived from the rates; None means unbounded."""
    t1: Optional[float]
    t_phi: Optional[float]


def jump_operators(params: DecoherenceParams) -> List[np.ndarray]:
    """Rate-weighted jump operators; channels with zero rate are omitted."""
    channels = (
        (params.gamma0, outer(Level.A2, Level.ZERO)),
        (params.gamma_m1, outer(Level.A2, Level.MINUS_ONE)),
        (params.gamma_p1, outer(Level.A2, Level.PLUS_ONE)),
        (params.dephasing_rate, outer(Level.A2, Level.A2)),
    )
    return [math.sqrt(rate) * op for rate, op in channels if rate > 0]


def lindblad_rhs(rho: Union[QuantumState, np.ndarray],
                 hamiltonian: np.ndarray,
                 params: DecoherenceParams) -> np.ndarray:
    """
    d(rho)/dt = -i[H, rho] + sum_k (O_k rho O_k^+ - {O_k^+ O_k, rho}/2).

    Returns:
        4x4 complex matrix
    """
    r = rho.rho if isinstance(rho, QuantumState) else np.asarray(rho, dtype=complex)
    out = -1j * (hamiltonian @ r - r @ hamiltonian)
    for op in jump_operators(params):
        op_dag = np.conj(op).T
        n = op_dag @ op
        out += op @ r @ op_dag - 0.5 * (n @ r + r @ n)
    return out


def commutator_superoperator(h: np.ndarray) -> np.ndarray:
    """Superoperator of -i[h, .] on row-major vec."""
    return -1j * (np.kron(h, _IDENTITY) - np.kron(_IDENTITY, h.T))


def dissipator_superoperator(params: DecoherenceParams) -> np.ndarray:
    """Superoperator of the jump-channel sum on row-major vec."""
    d = np.zeros((DIM * DIM, DIM * DIM), dtype=complex)
    for op in jump_operators(params):
        n = np.conj(op).T @ op
        d += np.kron(op, np.conj(op)) - 0.5 * (np.kron(n, _IDENTITY) + np.kron(_IDENTITY, n.T))
    return d


def liouvillian(hamiltonian: np.ndarray, params: DecoherenceParams) -> np.ndarray:
    """Full 16x16 generator for a fixed Hamiltonian."""
    return commutator_superoperator(hamiltonian) + dissipator_superoperator(params)


class _Generator:
    """L(t) for one gate: Omega(t) * coupling + Delta(t) * detuning + dissipator."""

    def __init__(self, spec: GateSpec, params: DecoherenceParams, timing: PulseTiming):
        coupling, projector = hamiltonian_parts(spec)
        self.spec = spec
        self.timing = timing
        self.l_coupling = commutator_superoperator(coupling)
        self.l_detuning = commutator_superoperator(projector)
        self.l_dissipator = dissipator_superoperator(params)

    def at(self, t: float) -> np.ndarray:
        omega_t, detuning_t = drive_profile(self.spec, self.timing, t)
        return omega_t * self.l_coupling + detuning_t * self.l_detuning + self.l_dissipator

    def is_constant_on(self, a: float, b: float) -> bool:
        """True if the envelope does not ramp anywhere inside [a, b]."""
        rise_end = self.timing.rise
        plateau_end = self.timing.rise + self.timing.plateau
        return (a >= rise_end and b <= plateau_end) or b <= 0 or a >= self.timing.total


def _hermitize_vec(x: np.ndarray) -> np.ndarray:
    m = x.reshape(DIM, DIM)
    return (0.5 * (m + np.conj(m).T)).reshape(-1)


def _rk4_constant_step(generator: np.ndarray, h: float) -> np.ndarray:
    """RK4 update matrix for an autonomous linear system."""
    hl = h * generator
    hl2 = hl @ hl
    hl3 = hl2 @ hl
    return np.eye(generator.shape[0], dtype=complex) + hl + hl2 / 2 + hl3 / 6 + hl3 @ hl / 24


def _rk4_step(x: np.ndarray, t: float, h: float, gen: Callable[[float], np.ndarray]) -> np.ndarray:
    l_start, l_mid, l_end = gen(t), gen(t + 0.5 * h), gen(t + h)
    k1 = l_start @ x
    k2 = l_mid @ (x + 0.5 * h * k1)
    k3 = l_mid @ (x + 0.5 * h * k2)
    k4 = l_end @ (x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def step_limit(spec: GateSpec, timing: PulseTiming, dt_max: Optional[float] = None,
               steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE) -> float:
    """
    Largest admissible RK4 step: min(dt_max, T_2pi/steps_per_cycle, ramp/20).

    T_2pi is evaluated at the actual detuning of the spec, so detuned
    spectral-hop nodes get proportionally finer steps.
    """
    steps = max(int(steps_per_cycle), MIN_STEPS_PER_CYCLE)
    h = cycle_time(spec.omega, abs(spec.detuning + spec.offset)) / steps
    if dt_max is not None:
        if dt_max <= 0:
            raise ValueError(f"dt_max must be positive, got {dt_max}")
        h = min(h, dt_max)
    for ramp in (timing.rise, timing.fall):
        if ramp > 0:
            h = min(h, ramp / RAMP_STEP_DIVISOR)
    return h


def _evolve(x: np.ndarray, t0: float, t1: float, generator: _Generator, h_max: float) -> np.ndarray:
    """Advance vec(rho) from t0 to t1, splitting at envelope breakpoints."""
    cuts = sorted({t0, t1, *(b for b in generator.timing.breakpoints if t0 < b < t1)})
    for a, b in zip(cuts[:-1], cuts[1:]):
        length = b - a
        if length <= 0:
            continue
        n_steps = max(1, int(math.ceil(length / h_max - 1e-9)))
        h = length / n_steps
        if generator.is_constant_on(a, b):
            update = _rk4_constant_step(generator.at(0.5 * (a + b)), h)
            for _ in range(n_steps):
                x = _hermitize_vec(update @ x)
        else:
            t = a
            for _ in range(n_steps):
                x = _hermitize_vec(_rk4_step(x, t, h, generator.at))
                t += h
    return x


def _finalize(x: np.ndarray, trace0: float, context: str) -> QuantumState:
    rho = x.reshape(DIM, DIM)
    if not np.all(np.isfinite(rho)):
        raise IntegratorAccuracyError(f"Non-finite density matrix after {context}")
    trace = float(np.real(np.trace(rho)))
    drift = abs(trace - trace0)
    if drift > TRACE_BUDGET:
        raise IntegratorAccuracyError(
            f"Trace drift {drift:.3e} after {context} exceeds {TRACE_BUDGET:.0e}; reduce dt_max"
        )
    if trace != 0:
        rho = rho * (trace0 / trace)
    return QuantumState(rho)


def propagate(rho0: QuantumState,
              spec: GateSpec,
              params: DecoherenceParams,
              dt_max: Optional[float] = None,
              *,
              timing: Optional[PulseTiming] = None,
              steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE) -> QuantumState:
    """
    Integrate the master equation over one gate pulse.

    Args:
        rho0: initial state
        spec: gate (its detuning is the one applied during the pulse)
        params: decoherence rates (sigma_delta is ignored here)
        dt_max: optional upper bound on the step in seconds
        timing: pulse timing; defaults to pulse_timing(spec). Spectral-hop
                averaging passes the timing solved at the intended detuning.
        steps_per_cycle: RK4 steps per T_2pi (at least 200)

    Returns:
        Final QuantumState, re-Hermitized and trace-renormalized

    Raises:
        IntegratorAccuracyError: if the trace drifts by more than 1e-9
    """
    if timing is None:
        timing = pulse_timing(spec)
    h_max = step_limit(spec, timing, dt_max, steps_per_cycle)
    generator = _Generator(spec, params, timing)
    x = rho0.rho.reshape(-1).astype(complex)
    x = _evolve(x, 0.0, timing.total, generator, h_max)
    logger.debug(f"Propagated {timing.total * 1e9:.3f} ns pulse with step <= {h_max * 1e12:.2f} ps")
    return _finalize(x, rho0.trace, "pulse propagation")


def relax_excited(rho: QuantumState,
                  params: DecoherenceParams,
                  threshold: float = 1e-9,
                  max_lifetimes: float = 20.0) -> QuantumState:
    """
    Let residual |A2> population decay with the drive off.

    Propagates in chunks of one excited-state lifetime with the exact
    chunk propagator until p_A2 < threshold or max_lifetimes have elapsed.
    Branching into |0>, |-1>, |+1> follows the rate ratios.
    """
    if rho.population(Level.A2) < threshold:
        return rho
    if params.decay_total <= 0:
        logger.debug("No decay channels; residual excited population is kept")
        return rho

    t1 = 1.0 / params.decay_total
    chunk = expm(dissipator_superoperator(params) * t1)
    x = rho.rho.reshape(-1).astype(complex)
    elapsed = 0
    while elapsed < max_lifetimes:
        x = _hermitize_vec(chunk @ x)
        elapsed += 1
        if np.real(x[int(Level.A2) * DIM + int(Level.A2)]) < threshold:
            break
    logger.debug(f"Relaxed excited state over {elapsed} lifetimes")
    return _finalize(x, rho.trace, "relaxation")


def propagate_and_relax(rho0: QuantumState,
                        spec: GateSpec,
                        params: DecoherenceParams,
                        dt_max: Optional[float] = None,
                        *,
                        timing: Optional[PulseTiming] = None,
                        steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE) -> QuantumState:
    """Pulse followed by excited-state relaxation (one shot of the experiment)."""
    final = propagate(rho0, spec, params, dt_max, timing=timing, steps_per_cycle=steps_per_cycle)
    return relax_excited(final, params)


def excited_population_trace(rho0: QuantumState,
                             spec: GateSpec,
                             params: DecoherenceParams,
                             t_end: float,
                             n_points: int,
                             dt_max: Optional[float] = None,
                             steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE) -> PopulationTrace:
    """
    Sample level populations during a continuous drive.

    The envelope rises as configured and then stays at Omega until t_end.
    """
    if t_end <= 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if n_points < 2:
        raise ValueError(f"n_points must be at least 2, got {n_points}")

    # plateau overshoots t_end so the drive never switches off inside the window
    timing = PulseTiming(rise=spec.envelope.rise, plateau=t_end, fall=0.0)
    h_max = step_limit(spec, timing, dt_max, steps_per_cycle)
    generator = _Generator(spec, params, timing)

    times = np.linspace(0.0, t_end, n_points)
    populations = np.empty((n_points, DIM))
    x = rho0.rho.reshape(-1).astype(complex)
    populations[0] = np.real(np.diag(rho0.rho))
    for i in range(1, n_points):
        x = _evolve(x, times[i - 1], times[i], generator, h_max)
        populations[i] = np.real(np.diag(x.reshape(DIM, DIM)))

    drift = abs(float(np.sum(populations[-1])) - rho0.trace)
    if drift > TRACE_BUDGET:
        raise IntegratorAccuracyError(f"Trace drift {drift:.3e} during population trace")
    return PopulationTrace(times=times, populations=populations)


def lifetime_consistency(params: DecoherenceParams) -> LifetimeReport:
    """
    Excited-state lifetime T1 = 1/(Gamma_0 + Gamma_-1 + Gamma_+1) and the
    optical dephasing time T_phi of the |A2>-ground coherence.

    The |A2><A2| channel at rate r damps that coherence at r/2, so
    T_phi = 2/r (= 1/Gamma_phi in the double mode).
    """
    t1 = 1.0 / params.decay_total if params.decay_total > 0 else None
    rate = params.dephasing_rate
    t_phi = 2.0 / rate if rate > 0 else None
    return LifetimeReport(t1=t1, t_phi=t_phi)


def calibrate_dephasing_mode(params: DecoherenceParams,
                             target_t_phi: float = 18e-9) -> Tuple[DephasingMode, float]:
    """
    Pick the dephasing channel mode whose T_phi best matches the measured value.

    Returns:
        (mode, relative_error)
    """
    best: Optional[Tuple[DephasingMode, float]] = None
    for mode in DephasingMode:
        report = lifetime_consistency(replace(params, dephasing_mode=mode))
        if report.t_phi is None:
            continue
        error = abs(report.t_phi - target_t_phi) / target_t_phi
        logger.debug(f"Dephasing mode {mode.value}: T_phi = {report.t_phi * 1e9:.2f} ns ({error:.2%} off)")
        if best is None or error < best[1]:
            best = (mode, error)
    if best is None:
        return params.dephasing_mode, float("inf")
    return best

