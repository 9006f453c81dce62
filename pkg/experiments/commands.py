"""
Experiment commands

Each command turns a RunConfig into a SweepResult (or, for tomography, a
TomographyResult). Rows are produced in axis order and contain no wall-clock
data, so identical configs give identical tables.
"""

import logging
import math
from dataclasses import replace
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from dynamics.ensemble import DecoherenceLayers, HopQuadrature, hop_average, layered_fidelity
from dynamics.lindblad import (
    DecoherenceParams,
    excited_population_trace,
    propagate_and_relax,
)
from quantum_model.drive import EnvelopeKind, GateSpec, bright_state_population, pulse_duration
from quantum_model.errors import ConfigError, InfeasiblePulseError
from quantum_model.holonomy import (
    NamedGate,
    compose,
    composite_fidelity,
    geometric_phase,
    ideal_for_spec,
    phase_distance,
)
from quantum_model.states import Level, QuantumState, StandardState, bloch_of, standard_state, state_fidelity
from tomography.process_tomography import chi_ideal, process_fidelity, simulate_process

from . import __version__
from .result_store import SweepResult, TomographyResult
from .run_config import RunConfig
from .sweep_scheduler import SweepScheduler

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
AXIS_COLUMNS = {
    "detuning": "delta",
    "power": "omega_mhz",
    "theta": "theta_over_pi",
    "phi": "phi_over_pi",
}
LAYER_ORDER = (
    DecoherenceLayers.NONE,
    DecoherenceLayers.T1_ONLY,
    DecoherenceLayers.T1_AND_TPHI,
    DecoherenceLayers.FULL,
)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _metadata(command: str, config: RunConfig, started_at: str, notes: Optional[List[str]] = None) -> Dict:
    return {
        "command": command,
        "config": config.to_dict(),
        "gate": config.gate_label,
        "version": __version__,
        "started_at": started_at,
        "finished_at": _now(),
        "notes": notes or [],
    }


def _require_axis(command: str, config: RunConfig, allowed: tuple):
    if config.axis not in allowed:
        raise ConfigError(f"{command} sweeps {' or '.join(allowed)}, got axis '{config.axis}'")


def _scheduler(config: RunConfig, scheduler: Optional[SweepScheduler]) -> SweepScheduler:
    return scheduler or SweepScheduler(config.workers)


def _final_state(rho_in: QuantumState, spec: GateSpec, config: RunConfig, layers: DecoherenceLayers) -> QuantumState:
    """One shot (or hop-averaged shot) with the decoherence subset of `layers`."""
    params = layers.apply(config.decoherence_params())
    if layers.uses_hopping and params.sigma_delta > 0:
        quad = HopQuadrature.gauss_hermite(params.sigma_delta, config.hop_nodes)
        return hop_average(rho_in, spec, params, quad, dt_max=config.dt_max, steps_per_cycle=config.steps_per_cycle)
    return propagate_and_relax(rho_in, spec, params, config.dt_max, steps_per_cycle=config.steps_per_cycle)


def _fidelity(spec: GateSpec, config: RunConfig, layers: DecoherenceLayers) -> float:
    return layered_fidelity(
        spec,
        spec.omega,
        layers,
        params=config.decoherence_params(),
        n_nodes=config.hop_nodes,
        steps_per_cycle=config.steps_per_cycle,
    )


def _spec_at(spec0: GateSpec, config: RunConfig, value: float) -> GateSpec:
    """Base gate moved to one axis value."""
    if config.axis == "detuning":
        return replace(spec0, delta=float(value))
    if config.axis == "power":
        return replace(spec0, omega=TWO_PI * 1e6 * float(value))
    if config.axis == "theta":
        return replace(spec0, theta=float(value) * math.pi)
    if config.axis == "phi":
        return replace(spec0, phi=float(value) * math.pi)
    return spec0


def cmd_phase_sweep(config: RunConfig, scheduler: Optional[SweepScheduler] = None) -> SweepResult:
    """
    Phase shift of the Z(gamma) family versus detuning.

    For each point |x> and |y> are propagated, the output azimuth
    atan2(Y_p, X_p) is compared with the input azimuth and the two shifts are
    averaged on the circle. The analytic law is reported next to it.
    Several powers (omegas_mhz) are stacked power-major.
    """
    started_at = _now()
    _require_axis("phase-sweep", config, ("detuning",))
    spec0 = config.gate_spec()
    if spec0.theta > 1e-12:
        raise ConfigError(f"phase-sweep needs a theta = 0 gate, {config.gate_label} has theta = {spec0.theta:.4f}")

    layers = config.layers_enum
    points = [(w, d) for w in config.power_list() for d in config.axis_values()]
    inputs = ((StandardState.X, 0.0), (StandardState.Y, math.pi / 2))

    def run_point(point):
        omega_mhz, delta = point
        spec = replace(config.gate_spec(omega_mhz=omega_mhz), delta=float(delta))
        shifts = []
        radius = []
        for s, azimuth_in in inputs:
            bloch = bloch_of(_final_state(standard_state(s), spec, config, layers))
            shifts.append((bloch.azimuth - azimuth_in) % TWO_PI)
            radius.append(math.hypot(bloch.x, bloch.y))
        gamma = float(np.angle(np.exp(1j * shifts[0]) + np.exp(1j * shifts[1])) % TWO_PI)
        return {
            "omega_mhz": omega_mhz,
            "delta": float(delta),
            "detuning_mhz": spec.detuning / TWO_PI / 1e6,
            "gamma_sim": gamma,
            "gamma_analytic": geometric_phase(spec.delta),
            "gamma_x": shifts[0],
            "gamma_y": shifts[1],
            "equator_radius": float(np.mean(radius)),
        }

    rows = _scheduler(config, scheduler).map(run_point, points)
    table = pd.DataFrame(rows)
    wrapped = np.mod(table["gamma_sim"] - table["gamma_analytic"] + math.pi, TWO_PI) - math.pi
    table["gamma_error"] = np.abs(wrapped)
    return SweepResult(command="phase-sweep", axis="delta", table=table,
                       metadata=_metadata("phase-sweep", config, started_at))


def cmd_fidelity_sweep(config: RunConfig, scheduler: Optional[SweepScheduler] = None) -> SweepResult:
    """
    Process fidelity versus detuning or power.

    With layers = full, every cumulative layer gets its own column. With
    composite = true, each point also reports F(X), F(H), their product and
    the single-loop F(Y(pi/2)) at the same power.
    """
    started_at = _now()
    _require_axis("fidelity-sweep", config, ("detuning", "power"))
    spec0 = config.gate_spec()
    layers = config.layers_enum
    emitted = LAYER_ORDER if layers is DecoherenceLayers.FULL else (layers,)
    axis_column = AXIS_COLUMNS[config.axis]

    def run_point(value):
        spec = _spec_at(spec0, config, value)
        row = {
            axis_column: float(value),
            "omega_mhz": spec.omega / TWO_PI / 1e6,
            "delta": spec.delta,
            "gamma_target": geometric_phase(spec.delta),
        }
        for layer in emitted:
            row[f"fidelity_{layer.value}"] = _fidelity(spec, config, layer)
        row["fidelity"] = row[f"fidelity_{layers.value}"]
        if config.composite:
            omega_mhz = row["omega_mhz"]
            f_x = _fidelity(config.gate_spec(omega_mhz=omega_mhz, gate=NamedGate.X.value), config, layers)
            f_h = _fidelity(config.gate_spec(omega_mhz=omega_mhz, gate=NamedGate.H.value), config, layers)
            f_y90 = _fidelity(config.gate_spec(omega_mhz=omega_mhz, gate=NamedGate.Y90.value), config, layers)
            row.update({
                "fidelity_x": f_x,
                "fidelity_h": f_h,
                "fidelity_composite": composite_fidelity(f_x, f_h),
                "fidelity_y90": f_y90,
            })
        return row

    rows = _scheduler(config, scheduler).map(run_point, config.axis_values())
    notes = []
    if config.composite:
        omega = config.omega
        ideal = [ideal_for_spec(config.gate_spec(gate=g.value)) for g in (NamedGate.X, NamedGate.H, NamedGate.Y90)]
        distance = phase_distance(compose(ideal[0], ideal[1]), ideal[2].unitary)
        notes.append(f"ideal X then H vs Y(pi/2): phase distance {distance:.3e} at {omega / TWO_PI / 1e6:.1f} MHz")
    return SweepResult(command="fidelity-sweep", axis=axis_column, table=pd.DataFrame(rows),
                       metadata=_metadata("fidelity-sweep", config, started_at, notes))


def cmd_rabi_scan(config: RunConfig, scheduler: Optional[SweepScheduler] = None) -> SweepResult:
    """
    Output-state populations and projections versus theta, phi or detuning,
    with the decoherence-free run as reference.
    """
    started_at = _now()
    _require_axis("rabi-scan", config, ("theta", "phi", "detuning"))
    spec0 = config.gate_spec()
    layers = config.layers_enum
    axis_column = AXIS_COLUMNS[config.axis]
    source = config.input
    rho_in = standard_state(source)

    def run_point(value):
        spec = _spec_at(spec0, config, value)
        final = _final_state(rho_in, spec, config, layers)
        ideal = propagate_and_relax(rho_in, spec, DecoherenceParams.ideal(), config.dt_max,
                                    steps_per_cycle=config.steps_per_cycle)
        target = ideal_for_spec(spec).unitary @ source.vector
        bloch = bloch_of(final)
        ideal_bloch = bloch_of(ideal)
        return {
            axis_column: float(value),
            "p_z": final.population(Level.MINUS_ONE),
            "p_mz": final.population(Level.PLUS_ONE),
            "x_p": bloch.x,
            "y_p": bloch.y,
            "z_p": bloch.z,
            "p_leak": final.population(Level.ZERO),
            "p_bright_in": bright_state_population(rho_in, spec.theta, spec.phi),
            "ideal_p_z": ideal.population(Level.MINUS_ONE),
            "ideal_p_mz": ideal.population(Level.PLUS_ONE),
            "ideal_x_p": ideal_bloch.x,
            "ideal_y_p": ideal_bloch.y,
            "fidelity_to_ideal": state_fidelity(target, final),
        }

    rows = _scheduler(config, scheduler).map(run_point, config.axis_values())
    return SweepResult(command="rabi-scan", axis=axis_column, table=pd.DataFrame(rows),
                       metadata=_metadata("rabi-scan", config, started_at))


def cmd_pulse_compare(config: RunConfig, scheduler: Optional[SweepScheduler] = None) -> SweepResult:
    """
    Rectangular versus trapezoidal envelope fidelity over power.

    Powers where the ramps alone exceed the 2*pi area cannot be realized
    with a trapezoid: those rows carry NaN and trap_feasible = False.
    """
    started_at = _now()
    _require_axis("pulse-compare", config, ("power",))
    layers = config.layers_enum
    rect = config.pulse_envelope(EnvelopeKind.RECTANGULAR)
    trap = config.pulse_envelope(EnvelopeKind.TRAPEZOID)

    def run_point(omega_mhz):
        spec_rect = config.gate_spec(omega_mhz=float(omega_mhz), envelope=rect)
        spec_trap = spec_rect.with_envelope(trap)
        f_rect = _fidelity(spec_rect, config, layers)
        try:
            duration_trap = pulse_duration(spec_trap) * 1e9
            f_trap = _fidelity(spec_trap, config, layers)
            feasible = True
        except InfeasiblePulseError as e:
            logger.warning(f"Trapezoid infeasible at {float(omega_mhz):.1f} MHz: {e}")
            duration_trap, f_trap, feasible = float("nan"), float("nan"), False
        return {
            "omega_mhz": float(omega_mhz),
            "fidelity_rect": f_rect,
            "fidelity_trap": f_trap,
            "rect_minus_trap": f_rect - f_trap,
            "trap_feasible": feasible,
            "duration_rect_ns": pulse_duration(spec_rect) * 1e9,
            "duration_trap_ns": duration_trap,
        }

    rows = _scheduler(config, scheduler).map(run_point, config.axis_values())
    infeasible = [r["omega_mhz"] for r in rows if not r["trap_feasible"]]
    notes = [f"trapezoid infeasible at {w:.1f} MHz" for w in infeasible]
    return SweepResult(command="pulse-compare", axis="omega_mhz", table=pd.DataFrame(rows),
                       metadata=_metadata("pulse-compare", config, started_at, notes))


def cmd_tomography(config: RunConfig, scheduler: Optional[SweepScheduler] = None) -> TomographyResult:
    """Simulated process tomography of the configured gate."""
    started_at = _now()
    spec = config.gate_spec()
    layers = config.layers_enum
    params = layers.apply(config.decoherence_params())
    quad = None
    if layers.uses_hopping and params.sigma_delta > 0:
        quad = HopQuadrature.gauss_hermite(params.sigma_delta, config.hop_nodes)
    chi_sim = simulate_process(spec, params, hop=layers.uses_hopping, quad=quad,
                               dt_max=config.dt_max, steps_per_cycle=config.steps_per_cycle)
    chi_ref = chi_ideal(ideal_for_spec(spec))
    fidelity = process_fidelity(chi_sim, chi_ref)
    logger.info(f"Process fidelity of {config.gate_label}: {fidelity:.4f}")
    return TomographyResult(
        gate=config.gate_label,
        chi_sim=chi_sim,
        chi_ideal=chi_ref,
        fidelity=fidelity,
        metadata=_metadata("tomography", config, started_at),
    )


def cmd_excitation_trace(config: RunConfig, scheduler: Optional[SweepScheduler] = None) -> SweepResult:
    """
    Level populations during a continuous drive of the configured gate.

    The window defaults to three pulse durations. Spectral hopping is a
    shot-to-shot effect and is not applied to traces.
    """
    started_at = _now()
    spec = config.gate_spec()
    layers = config.layers_enum
    params = layers.apply(config.decoherence_params()).without_hopping()
    t_end = config.t_end_ns * 1e-9 if config.t_end_ns else 3.0 * pulse_duration(spec)
    trace = excited_population_trace(standard_state(config.input), spec, params, t_end,
                                     config.trace_points, config.dt_max, config.steps_per_cycle)
    table = pd.DataFrame({
        "t_ns": trace.times * 1e9,
        "p_minus1": trace.populations[:, Level.MINUS_ONE],
        "p_plus1": trace.populations[:, Level.PLUS_ONE],
        "p_a2": trace.p_a2,
        "p_0": trace.populations[:, Level.ZERO],
    })
    notes = ["spectral hopping not applied"] if layers.uses_hopping else []
    return SweepResult(command="excitation-trace", axis="t_ns", table=table,
                       metadata=_metadata("excitation-trace", config, started_at, notes))


CommandFunction = Callable[[RunConfig, Optional[SweepScheduler]], Union[SweepResult, TomographyResult]]

COMMANDS: Dict[str, CommandFunction] = {
    "phase-sweep": cmd_phase_sweep,
    "fidelity-sweep": cmd_fidelity_sweep,
    "rabi-scan": cmd_rabi_scan,
    "pulse-compare": cmd_pulse_compare,
    "tomography": cmd_tomography,
    "excitation-trace": cmd_excitation_trace,
}
