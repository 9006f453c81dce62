"""
Run configuration for the experiment commands.

A RunConfig is assembled from (lowest to highest precedence) the dataclass
defaults, the `physics`/`execution` sections of the application config,
per-command defaults, environment variables, a run file and CLI flags.
`to_dict()` is the config echo written to result metadata; feeding it back
through `from_mapping` reproduces the run.

Axis units: detuning in Delta/Omega, power in MHz (Omega/2pi), theta and phi
in multiples of pi.
"""

import logging
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import yaml

from dynamics.ensemble import DecoherenceLayers
from dynamics.lindblad import DecoherenceParams, DephasingMode, MIN_STEPS_PER_CYCLE
from quantum_model.drive import AreaMode, EnvelopeKind, GateSpec, PulseEnvelope
from quantum_model.errors import ConfigError, GateRangeError
from quantum_model.holonomy import NamedGate, named_gate_spec
from quantum_model.states import StandardState

try:
    from dotenv import load_dotenv
    _HAS_DOTENV = True
except Exception:
    _HAS_DOTENV = False

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
AXES = ("none", "detuning", "power", "theta", "phi")

# Per-command defaults, applied above the app config and below env/file/CLI
COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "phase-sweep": {"gate": "Z", "axis": "detuning", "axis_min": -2.0, "axis_max": 2.0, "points": 21,
                    "omega_mhz": 168.0, "layers": "none"},
    "fidelity-sweep": {"gate": "Z", "axis": "detuning", "axis_min": -2.0, "axis_max": 2.0, "points": 9,
                       "omega_mhz": 252.0, "layers": "full"},
    "rabi-scan": {"gate": "X", "axis": "theta", "axis_min": 0.0, "axis_max": 1.0, "points": 21,
                  "omega_mhz": 168.0, "layers": "t1tphi", "input_state": "z"},
    "pulse-compare": {"gate": "Y(pi/2)", "axis": "power", "axis_min": 100.0, "axis_max": 1000.0, "points": 10,
                      "layers": "full"},
    "tomography": {"gate": "X", "axis": "none", "omega_mhz": 168.0, "layers": "full"},
    "excitation-trace": {"gate": "Z", "axis": "none", "omega_mhz": 60.0, "layers": "none", "input_state": "-z"},
}


@dataclass
class EnvSettings:
    config_path: Optional[str]
    log_level: Optional[str]
    output_dir: Optional[str]
    workers: Optional[int]


def _load_env_near_project_root():
    """Load .env from the working directory or the project root (never overriding the shell)."""
    if not _HAS_DOTENV:
        return
    here = Path(__file__).resolve()
    for p in (Path.cwd() / '.env', here.parents[1] / '.env'):
        if p.exists():
            load_dotenv(dotenv_path=p, override=False)
            break


def load_env_settings() -> EnvSettings:
    """Read HOLOSIM_CONFIG, HOLOSIM_LOG_LEVEL, HOLOSIM_OUTPUT_DIR and HOLOSIM_WORKERS."""
    _load_env_near_project_root()
    workers = os.getenv('HOLOSIM_WORKERS')
    try:
        workers_value = int(workers) if workers else None
    except ValueError:
        raise ConfigError(f"HOLOSIM_WORKERS must be an integer, got '{workers}'")
    return EnvSettings(
        config_path=os.getenv('HOLOSIM_CONFIG'),
        log_level=os.getenv('HOLOSIM_LOG_LEVEL'),
        output_dir=os.getenv('HOLOSIM_OUTPUT_DIR'),
        workers=workers_value,
    )


def load_run_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON or YAML run file into a plain mapping."""
    run_file = Path(path)
    if not run_file.exists():
        raise ConfigError(f"Run configuration not found: {path}")
    try:
        with open(run_file, 'r') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse run configuration {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Run configuration {path} must hold a mapping, got {type(data).__name__}")
    return data


@dataclass
class RunConfig:
    """
    Everything one experiment command needs.

    Either `gate` names a catalog entry, or theta_over_pi/phi_over_pi/delta
    define a custom loop (all three required). gamma_over_pi is the target
    angle for the Z(gamma) family.
    """
    gate: Optional[str] = "Z"
    gamma_over_pi: Optional[float] = None
    theta_over_pi: Optional[float] = None
    phi_over_pi: Optional[float] = None
    delta: Optional[float] = None
    omega_mhz: float = 150.0
    omegas_mhz: Optional[List[float]] = None

    envelope: str = "rect"
    rise_ns: float = 1.2
    fall_ns: float = 1.2
    area_mode: str = "rabi"

    gamma0_mhz: float = 1.6
    gamma_m1_mhz: float = 8.5
    gamma_p1_mhz: float = 4.3
    gamma_orb_mhz: float = 8.8
    sigma_mhz: float = 15.0
    dephasing_mode: str = "double"
    layers: str = "full"
    hop_nodes: int = 15

    axis: str = "none"
    axis_min: float = 0.0
    axis_max: float = 1.0
    points: int = 1

    input_state: str = "z"
    composite: bool = False
    t_end_ns: Optional[float] = None
    trace_points: int = 201

    steps_per_cycle: int = 400
    dt_max_ns: Optional[float] = None
    workers: int = 1
    output: Optional[str] = None
    seed: Optional[int] = None

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], base: Optional["RunConfig"] = None) -> "RunConfig":
        """
        Build (or update `base`) from a mapping, rejecting unknown keys.

        Raises:
            ConfigError: unknown keys or invalid values
        """
        unknown = sorted(set(data) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"Unknown run configuration keys: {', '.join(unknown)}")
        config = replace(base or cls(), **dict(data))
        config.validate()
        return config

    def merged(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """Apply overrides whose value is not None."""
        return self.from_mapping({k: v for k, v in overrides.items() if v is not None}, base=self)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.omegas_mhz is not None:
            data["omegas_mhz"] = [float(w) for w in self.omegas_mhz]
        return data

    def validate(self):
        """Check ranges and enumerations; raises ConfigError with the offending field."""
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got '{self.axis}'")
        if self.points < 1:
            raise ConfigError(f"points must be at least 1, got {self.points}")
        if self.axis != "none" and self.axis_min > self.axis_max:
            raise ConfigError(f"Empty sweep range [{self.axis_min}, {self.axis_max}]")
        if self.axis == "power" and self.axis_min <= 0:
            raise ConfigError(f"Power axis must be positive, got min {self.axis_min}")
        if not self.omega_mhz > 0:
            raise ConfigError(f"omega_mhz must be positive, got {self.omega_mhz}")
        for name in ("rise_ns", "fall_ns"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be non-negative, got {value}")
        if self.omegas_mhz is not None and (not self.omegas_mhz or min(self.omegas_mhz) <= 0):
            raise ConfigError(f"omegas_mhz must be a non-empty list of positive values, got {self.omegas_mhz}")
        for name in ("gamma0_mhz", "gamma_m1_mhz", "gamma_p1_mhz", "gamma_orb_mhz", "sigma_mhz"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.hop_nodes < 1:
            raise ConfigError(f"hop_nodes must be at least 1, got {self.hop_nodes}")
        if self.steps_per_cycle < MIN_STEPS_PER_CYCLE:
            raise ConfigError(f"steps_per_cycle must be at least {MIN_STEPS_PER_CYCLE}, got {self.steps_per_cycle}")
        if self.dt_max_ns is not None and self.dt_max_ns <= 0:
            raise ConfigError(f"dt_max_ns must be positive, got {self.dt_max_ns}")
        if self.t_end_ns is not None and self.t_end_ns <= 0:
            raise ConfigError(f"t_end_ns must be positive, got {self.t_end_ns}")
        if self.trace_points < 2:
            raise ConfigError(f"trace_points must be at least 2, got {self.trace_points}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")

        custom = (self.theta_over_pi, self.phi_over_pi, self.delta)
        if any(v is not None for v in custom) and any(v is None for v in custom):
            raise ConfigError("A custom gate needs theta_over_pi, phi_over_pi and delta together")
        if self.theta_over_pi is None:
            if self.gate is None:
                raise ConfigError("Either gate or a (theta_over_pi, phi_over_pi, delta) triple is required")
            try:
                NamedGate.parse(self.gate)
            except GateRangeError as e:
                raise ConfigError(str(e)) from e
        elif not 0.0 <= self.theta_over_pi <= 1.0:
            raise ConfigError(f"theta_over_pi must lie in [0, 1], got {self.theta_over_pi}")

        # enum lookups raise ValueError naming the bad value
        try:
            DecoherenceLayers(self.layers)
            EnvelopeKind(self.envelope)
            StandardState(self.input_state)
            AreaMode(self.area_mode)
            DephasingMode(self.dephasing_mode)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    @property
    def layers_enum(self) -> DecoherenceLayers:
        return DecoherenceLayers(self.layers)

    @property
    def envelope_kind(self) -> EnvelopeKind:
        return EnvelopeKind(self.envelope)

    @property
    def omega(self) -> float:
        return TWO_PI * 1e6 * self.omega_mhz

    @property
    def dt_max(self) -> Optional[float]:
        return None if self.dt_max_ns is None else self.dt_max_ns * 1e-9

    @property
    def input(self) -> StandardState:
        return StandardState(self.input_state)

    @property
    def gate_label(self) -> str:
        if self.theta_over_pi is not None:
            return f"custom(theta={self.theta_over_pi}pi,phi={self.phi_over_pi}pi,delta={self.delta})"
        return NamedGate.parse(self.gate).value

    def power_list(self) -> List[float]:
        """Powers (MHz) for commands that overlay several drive strengths."""
        return [float(w) for w in self.omegas_mhz] if self.omegas_mhz else [float(self.omega_mhz)]

    def axis_values(self) -> np.ndarray:
        if self.axis == "none":
            return np.array([np.nan])
        return np.linspace(self.axis_min, self.axis_max, self.points)

    def decoherence_params(self) -> DecoherenceParams:
        return DecoherenceParams.from_mhz(
            gamma0=self.gamma0_mhz,
            gamma_m1=self.gamma_m1_mhz,
            gamma_p1=self.gamma_p1_mhz,
            gamma_orb=self.gamma_orb_mhz,
            sigma=self.sigma_mhz,
            dephasing_mode=DephasingMode(self.dephasing_mode),
        )

    def pulse_envelope(self, kind: Optional[EnvelopeKind] = None) -> PulseEnvelope:
        kind = kind or self.envelope_kind
        area_mode = AreaMode(self.area_mode)
        if kind is EnvelopeKind.RECTANGULAR:
            return PulseEnvelope.rectangular(area_mode)
        return PulseEnvelope.trapezoid(self.rise_ns * 1e-9, self.fall_ns * 1e-9, area_mode)

    def gate_spec(self,
                  omega_mhz: Optional[float] = None,
                  envelope: Optional[PulseEnvelope] = None,
                  gate: Optional[str] = None) -> GateSpec:
        """
        GateSpec of the configured gate (or of `gate`, a catalog override).

        Raises:
            ConfigError: when the catalog cannot realize the request (e.g. Z without gamma)
        """
        omega = TWO_PI * 1e6 * (self.omega_mhz if omega_mhz is None else omega_mhz)
        envelope = envelope or self.pulse_envelope()
        try:
            if gate is None and self.theta_over_pi is not None:
                return GateSpec(theta=self.theta_over_pi * math.pi, phi=self.phi_over_pi * math.pi,
                                delta=self.delta, omega=omega, envelope=envelope)
            gamma = None if self.gamma_over_pi is None else self.gamma_over_pi * math.pi
            # Z without an explicit angle is the resonant Z(pi)
            return named_gate_spec(gate or self.gate, omega, envelope, math.pi if gamma is None else gamma)
        except GateRangeError as e:
            raise ConfigError(str(e)) from e


def build_run_config(command: str,
                     app_physics: Optional[Mapping[str, Any]] = None,
                     env: Optional[EnvSettings] = None,
                     run_file: Optional[Union[str, Path]] = None,
                     cli_overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Assemble the RunConfig of one command invocation.

    Precedence: CLI > run file > environment > command defaults > app config.
    """
    config = RunConfig.from_mapping(dict(app_physics or {}))
    config = config.merged(COMMAND_DEFAULTS.get(command, {}))
    if env is not None:
        config = config.merged({"workers": env.workers})
    if run_file:
        config = config.merged(load_run_file(run_file))
    if cli_overrides:
        config = config.merged(cli_overrides)
    logger.debug(f"Run configuration for {command}: {config.to_dict()}")
    return config
