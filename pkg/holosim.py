"""
Holonomic Gate Simulator - Main Entry Point

Simulates single-loop holonomic gates on the NV-center Lambda system with
excited-state decoherence and spectral hopping, and reproduces the phase,
fidelity, Rabi, pulse-shape, tomography and excitation experiments as CSV/JSON
tables.

Usage:
    python holosim.py phase-sweep --omega-mhz 168
    python holosim.py fidelity-sweep --gate "X(pi/2)" --axis power --min 60 --max 400 --points 8
    python holosim.py tomography --gate H --omega-mhz 168 --out h_168.json
"""

import argparse
import logging
import re
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import yaml

from experiments import (
    COMMANDS,
    ReportFormatter,
    ResultStore,
    SweepResult,
    SweepScheduler,
    TomographyResult,
    build_run_config,
    load_env_settings,
)
from experiments.run_config import EnvSettings, RunConfig
from quantum_model.errors import (
    ConfigError,
    GateRangeError,
    InfeasiblePulseError,
    NormalizationError,
    NumericalError,
)

DEFAULT_APP_CONFIG = Path(__file__).parent / "config" / "simulation_config.yaml"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# Invalid requests that surface below RunConfig validation
REQUEST_ERRORS = (ConfigError, GateRangeError, InfeasiblePulseError, NormalizationError)


class HolonomySimulator:
    """
    Main orchestrator for the simulator.

    Loads the application config, sets up logging, builds the run
    configuration of a command and writes its result.
    """

    def __init__(self,
                 config_path: Optional[Union[str, Path]] = None,
                 log_level: Optional[str] = None,
                 env: Optional[EnvSettings] = None):
        """Initialize simulator with configuration."""
        self.env = env or load_env_settings()
        self.config = self._load_config(config_path or self.env.config_path or DEFAULT_APP_CONFIG)
        self._setup_logging(log_level or self.env.log_level)
        self.logger = logging.getLogger(__name__)
        self._initialize_components()
        self.logger.info("=" * 70)
        self.logger.info("Holonomic Gate Simulator Initialized")
        self.logger.info("=" * 70)

    def _load_config(self, config_path: Union[str, Path]) -> Dict:
        """Load configuration from YAML file."""
        config_file = Path(config_path)
        if not config_file.exists():
            raise ConfigError(f"Configuration file not found: {config_path}")
        try:
            with open(config_file, 'r') as f:
                return yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse configuration {config_path}: {e}") from e

    def _setup_logging(self, level_override: Optional[str] = None):
        """Setup logging configuration."""
        log_config = self.config.get('logging', {})
        level_name = (level_override or log_config.get('level', 'INFO')).upper()
        log_level = getattr(logging, level_name, None)
        if not isinstance(log_level, int):
            raise ConfigError(f"Unknown log level '{level_name}'")

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(log_level)
        handlers: List[logging.Handler] = [console_handler]

        log_file_config = log_config.get('file', {})
        if log_file_config.get('enabled', True):
            log_path = Path(log_file_config.get('path', 'logs/holosim.log'))
            log_path.parent.mkdir(parents=True, exist_ok=True)

            # Setup file handler with rotation
            from logging.handlers import RotatingFileHandler
            file_handler = RotatingFileHandler(
                log_path,
                maxBytes=log_file_config.get('max_size_mb', 10) * 1024 * 1024,
                backupCount=log_file_config.get('backup_count', 5)
            )
            file_handler.setLevel(log_level)
            handlers.append(file_handler)

        logging.basicConfig(
            level=log_level,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=handlers
        )
        logging.getLogger().setLevel(log_level)

    def _initialize_components(self):
        """Initialize result store, scheduler and formatter."""
        output_dir = self.env.output_dir or self.config.get('output', {}).get('directory', 'data/results')
        self.result_store = ResultStore(output_dir)
        self.report_formatter = ReportFormatter()

    def app_defaults(self) -> Dict:
        """RunConfig keys contributed by the application config."""
        defaults = dict(self.config.get('physics', {}) or {})
        workers = self.config.get('execution', {}).get('workers')
        if workers is not None:
            defaults['workers'] = workers
        return defaults

    def build_config(self,
                     command: str,
                     run_file: Optional[str] = None,
                     cli_overrides: Optional[Dict] = None) -> RunConfig:
        return build_run_config(command, self.app_defaults(), self.env, run_file, cli_overrides)

    @staticmethod
    def default_output_name(command: str, config: RunConfig) -> str:
        slug = re.sub(r"[^A-Za-z0-9]+", "_", config.gate_label).strip("_").lower()
        suffix = "json" if command == "tomography" else "csv"
        return f"{command.replace('-', '_')}_{slug}.{suffix}"

    def run(self,
            command: str,
            run_file: Optional[str] = None,
            cli_overrides: Optional[Dict] = None,
            out: Optional[str] = None) -> Tuple[Union[SweepResult, TomographyResult], Path]:
        """
        Execute one command and persist its result.

        Returns:
            (result, path of the written table or matrix file)
        """
        if command not in COMMANDS:
            raise ConfigError(f"Unknown command '{command}'. Known commands: {', '.join(COMMANDS)}")
        config = self.build_config(command, run_file, cli_overrides)
        self._show_configuration(command, config)

        scheduler = SweepScheduler(config.workers)
        result = COMMANDS[command](config, scheduler)

        target = out or config.output or self.default_output_name(command, config)
        if isinstance(result, TomographyResult):
            path = self.result_store.save_tomography(result, target)
            print(self.report_formatter.format_tomography(result, config.omega_mhz))
        else:
            path = self.result_store.save_sweep(result, target)
            print(self.report_formatter.format_sweep(result))
        self.logger.info(f"{command} completed, result written to {path}")
        self.logger.info("-" * 70)
        return result, path

    def _show_configuration(self, command: str, config: RunConfig):
        """Display current configuration."""
        self.logger.info(f"Command: {command}")
        self.logger.info(f"  Gate: {config.gate_label}")
        self.logger.info(f"  Omega/2pi: {config.omega_mhz:.1f} MHz, envelope: {config.envelope}")
        self.logger.info(f"  Layers: {config.layers} (sigma/2pi = {config.sigma_mhz} MHz, {config.hop_nodes} nodes)")
        if config.axis != "none":
            self.logger.info(f"  Axis: {config.axis} [{config.axis_min}, {config.axis_max}] x {config.points}")
        self.logger.info(f"  Workers: {config.workers}")
        self.logger.info("-" * 70)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Run configuration file (JSON or YAML)')
    common.add_argument('--app-config', help='Application config (default: config/simulation_config.yaml)')
    common.add_argument('--out', help='Output path (relative paths go below the output directory)')
    common.add_argument('--gate', help='Catalog gate, e.g. X, H, "X(pi/2)", Z')
    common.add_argument('--gamma-over-pi', type=float, dest='gamma_over_pi', help='Rotation angle of Z(gamma) in units of pi')
    common.add_argument('--omega-mhz', type=float, dest='omega_mhz', help='Peak Rabi frequency Omega/2pi in MHz')
    common.add_argument('--omegas-mhz', type=float, nargs='+', dest='omegas_mhz', help='Several powers (phase-sweep)')
    common.add_argument('--layers', choices=['none', 't1', 't1tphi', 'full'])
    common.add_argument('--envelope', choices=['rect', 'trap'])
    common.add_argument('--axis', choices=['none', 'detuning', 'power', 'theta', 'phi'])
    common.add_argument('--min', type=float, dest='axis_min', help='Axis start (delta, MHz, or units of pi)')
    common.add_argument('--max', type=float, dest='axis_max', help='Axis end')
    common.add_argument('--points', type=int)
    common.add_argument('--input-state', dest='input_state', choices=['z', '-z', 'x', '-x', 'y', '-y'])
    common.add_argument('--composite', action='store_true', default=None, help='Add F(X)*F(H) vs F(Y(pi/2)) columns')
    common.add_argument('--t-end-ns', type=float, dest='t_end_ns', help='Trace window (excitation-trace)')
    common.add_argument('--workers', type=int)
    common.add_argument('--log-level', dest='log_level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])

    parser = argparse.ArgumentParser(description='Holonomic Lambda-system gate simulator')
    sub = parser.add_subparsers(dest='command', required=True)
    descriptions = {
        'phase-sweep': 'Geometric phase of Z(gamma) versus detuning',
        'fidelity-sweep': 'Process fidelity versus detuning or power, per decoherence layer',
        'rabi-scan': 'Output populations versus theta, phi or detuning',
        'pulse-compare': 'Rectangular versus trapezoidal envelope over power',
        'tomography': 'Process matrix and fidelity of one gate',
        'excitation-trace': 'Time-resolved level populations during the drive',
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=descriptions[name])
    return parser


OVERRIDE_KEYS = ('gate', 'gamma_over_pi', 'omega_mhz', 'omegas_mhz', 'layers', 'envelope', 'axis',
                 'axis_min', 'axis_max', 'points', 'input_state', 'composite', 't_end_ns', 'workers')


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    overrides = {key: getattr(args, key) for key in OVERRIDE_KEYS}
    logger = logging.getLogger(__name__)
    try:
        simulator = HolonomySimulator(args.app_config, args.log_level)
        simulator.run(args.command, args.config, overrides, args.out)
        return EXIT_OK
    except REQUEST_ERRORS as e:
        logger.error(f"Configuration error: {e}")
        print(f"\n✗ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}", exc_info=True)
        print(f"\n✗ Numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except KeyboardInterrupt:
        print("\n✓ Simulation stopped by user")
        return EXIT_FAILURE
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        print(f"\n✗ Fatal error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
