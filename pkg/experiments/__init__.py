"""
Experiments Module

Run configuration, ordered sweep execution, result persistence and the
command implementations behind the holosim CLI.
"""

__version__ = "0.3.0"

from .run_config import RunConfig, build_run_config, load_env_settings
from .sweep_scheduler import SweepScheduler
from .result_store import ResultStore, SweepResult, TomographyResult
from .commands import (
    COMMANDS,
    cmd_excitation_trace,
    cmd_fidelity_sweep,
    cmd_phase_sweep,
    cmd_pulse_compare,
    cmd_rabi_scan,
    cmd_tomography,
)
from .report_formatter import ReportFormatter

__all__ = [
    '__version__',
    'RunConfig',
    'build_run_config',
    'load_env_settings',
    'SweepScheduler',
    'ResultStore',
    'SweepResult',
    'TomographyResult',
    'COMMANDS',
    'cmd_phase_sweep',
    'cmd_fidelity_sweep',
    'cmd_rabi_scan',
    'cmd_pulse_compare',
    'cmd_tomography',
    'cmd_excitation_trace',
    'ReportFormatter',
]
