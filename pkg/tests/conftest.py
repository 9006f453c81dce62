"""Shared fixtures for the simulator test suite."""

import pytest
import yaml

from dynamics.lindblad import DecoherenceParams


@pytest.fixture
def measured_params():
    """Measured NV rates including the 15 MHz spectral hop."""
    return DecoherenceParams.from_mhz()


@pytest.fixture
def ideal_params():
    return DecoherenceParams.ideal()


@pytest.fixture
def output_dir(tmp_path):
    path = tmp_path / "results"
    path.mkdir()
    return path


@pytest.fixture
def app_config(tmp_path, output_dir, monkeypatch):
    """Application config writing into tmp_path, without a log file."""
    for name in ("HOLOSIM_CONFIG", "HOLOSIM_LOG_LEVEL", "HOLOSIM_OUTPUT_DIR", "HOLOSIM_WORKERS"):
        monkeypatch.delenv(name, raising=False)
    config = {
        "logging": {"level": "WARNING", "file": {"enabled": False}},
        "output": {"directory": str(output_dir)},
        "execution": {"workers": 1},
        "physics": {"steps_per_cycle": 400},
    }
    path = tmp_path / "simulation_config.yaml"
    with open(path, "w") as f:
        yaml.safe_dump(config, f)
    return path
