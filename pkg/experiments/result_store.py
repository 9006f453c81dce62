"""
Result Store for Experiment Commands

Persists sweep tables as CSV (fixed column order, no wall-clock data) with a
`<stem>.meta.json` sidecar holding the config echo, code version and run
timestamps, and process matrices as JSON.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from tomography.process_tomography import ProcessMatrix, save_process_matrix

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


@dataclass
class SweepResult:
    """
    One command's table.

    Attributes:
        command: CLI subcommand that produced it
        axis: name of the swept column ("none" for single-point runs)
        table: one row per axis value, columns in emission order
        metadata: config echo, code version, timestamps, notes
    """
    command: str
    axis: str
    table: pd.DataFrame
    metadata: Dict = field(default_factory=dict)

    @property
    def columns(self) -> List[str]:
        return list(self.table.columns)

    def column(self, name: str):
        return self.table[name].to_numpy()


@dataclass
class TomographyResult:
    """Simulated and ideal process matrices of one gate with the fidelity between them."""
    gate: str
    chi_sim: ProcessMatrix
    chi_ideal: ProcessMatrix
    fidelity: float
    metadata: Dict = field(default_factory=dict)


class ResultStore:
    """
    Writes and reads command results below one output directory.

    Relative paths are resolved against the output directory; absolute paths
    are used as given.
    """

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        """
        Initialize result store.

        Args:
            output_dir: directory for results; defaults to data/results
        """
        if output_dir is None:
            output_dir = Path(__file__).parent.parent / 'data' / 'results'
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        logger.info(f"Initialized ResultStore with output dir: {self.output_dir}")

    def resolve(self, path: Union[str, Path]) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.output_dir / p

    @staticmethod
    def meta_path(csv_path: Union[str, Path]) -> Path:
        p = Path(csv_path)
        return p.with_name(f"{p.stem}.meta.json")

    def _save_json(self, path: Path, payload: Dict):
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=str)
        logger.debug(f"Saved {path}")

    def save_sweep(self, result: SweepResult, path: Union[str, Path]) -> Path:
        """
        Write the table as CSV and the metadata as a sidecar JSON.

        Returns:
            Path of the CSV file
        """
        csv_path = self.resolve(path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        result.table.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
        meta = dict(result.metadata)
        meta.update({"command": result.command, "axis": result.axis, "columns": result.columns})
        self._save_json(self.meta_path(csv_path), meta)
        logger.info(f"Saved {len(result.table)} rows to {csv_path}")
        return csv_path

    def load_sweep(self, path: Union[str, Path]) -> SweepResult:
        """Inverse of save_sweep (metadata is read from the sidecar when present)."""
        csv_path = self.resolve(path)
        table = pd.read_csv(csv_path)
        meta_file = self.meta_path(csv_path)
        metadata = {}
        if meta_file.exists():
            with open(meta_file, 'r') as f:
                metadata = json.load(f)
        command = metadata.pop("command", "unknown")
        axis = metadata.pop("axis", "none")
        metadata.pop("columns", None)
        return SweepResult(command=command, axis=axis, table=table, metadata=metadata)

    def save_tomography(self, result: TomographyResult, path: Union[str, Path]) -> Path:
        """Write chi_sim, chi_ideal and the fidelity to one JSON file, metadata to the sidecar."""
        json_path = self.resolve(path)
        save_process_matrix(
            json_path,
            {"chi_sim": result.chi_sim, "chi_ideal": result.chi_ideal},
            extra={"gate": result.gate, "fidelity": result.fidelity},
        )
        self._save_json(self.meta_path(json_path), dict(result.metadata))
        logger.info(f"Saved process matrices for {result.gate} to {json_path}")
        return json_path

    def load_tomography(self, path: Union[str, Path]) -> TomographyResult:
        json_path = self.resolve(path)
        with open(json_path, 'r') as f:
            payload = json.load(f)
        metadata = {}
        meta_file = self.meta_path(json_path)
        if meta_file.exists():
            with open(meta_file, 'r') as f:
                metadata = json.load(f)
        return TomographyResult(
            gate=payload["gate"],
            chi_sim=ProcessMatrix.from_json_dict(payload["chi_sim"]),
            chi_ideal=ProcessMatrix.from_json_dict(payload["chi_ideal"]),
            fidelity=float(payload["fidelity"]),
            metadata=metadata,
        )
