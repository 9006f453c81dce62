"""
Report Formatter

Console summaries of command results. Measured fidelities from the NV
experiment are printed next to simulated ones as reference annotations only:
the model leaves out crosstalk with nearby levels and laser leakage, so the
numbers are not expected to agree.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from quantum_model.holonomy import NamedGate

from .result_store import SweepResult, TomographyResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentalReference:
    gate: NamedGate
    omega_mhz: float
    fidelity: float
    note: str = ""


EXPERIMENTAL_REFERENCES = (
    ExperimentalReference(NamedGate.X, 150.0, 0.74, "resonant gate"),
    ExperimentalReference(NamedGate.Y, 150.0, 0.74, "resonant gate"),
    ExperimentalReference(NamedGate.H, 150.0, 0.74, "resonant gate"),
    ExperimentalReference(NamedGate.X90, 152.0, 0.83),
    ExperimentalReference(NamedGate.XM90, 152.0, 0.80),
    ExperimentalReference(NamedGate.Y90, 152.0, 0.82),
    ExperimentalReference(NamedGate.YM90, 152.0, 0.80),
    ExperimentalReference(NamedGate.Z, 252.0, 0.86, "saturation above this power"),
)
COMPOSITE_REFERENCE = 0.55  # X then H at 150 MHz, product of single-gate values
POWER_TOLERANCE_MHZ = 5.0


class ReportFormatter:
    """Formats SweepResult and TomographyResult objects as plain-text reports."""

    def __init__(self, show_references: bool = True, max_rows: int = 25):
        """
        Initialize report formatter.

        Args:
            show_references: append measured fidelities where gate and power match
            max_rows: rows of the table echoed in full before eliding the middle
        """
        self.show_references = show_references
        self.max_rows = max_rows
        logger.info(f"Initialized ReportFormatter (references {'on' if show_references else 'off'})")

    @staticmethod
    def references_for(gate: str, omega_mhz: float) -> List[ExperimentalReference]:
        """Measured values recorded for this gate near this power."""
        try:
            named = NamedGate.parse(gate)
        except ValueError:
            return []
        return [r for r in EXPERIMENTAL_REFERENCES
                if r.gate is named and abs(r.omega_mhz - omega_mhz) <= POWER_TOLERANCE_MHZ]

    def _reference_lines(self, gate: str, omega_values: np.ndarray) -> List[str]:
        if not self.show_references:
            return []
        lines = []
        seen = set()
        for omega in np.unique(omega_values):
            for ref in self.references_for(gate, float(omega)):
                if ref in seen:
                    continue
                seen.add(ref)
                note = f" ({ref.note})" if ref.note else ""
                lines.append(f"  measured F({ref.gate.value}) = {ref.fidelity:.2f} at {ref.omega_mhz:.0f} MHz{note}")
        return lines

    def format_sweep(self, result: SweepResult) -> str:
        """Header, table (elided when long) and per-column ranges of the fidelity columns."""
        meta = result.metadata
        gate = meta.get("gate", "?")
        lines = [
            "=" * 70,
            f"{result.command}: {gate}, {len(result.table)} point(s) along {result.axis}",
            "-" * 70,
        ]
        table = result.table
        if len(table) > self.max_rows:
            half = self.max_rows // 2
            lines.append(table.head(half).to_string(index=False, float_format=lambda v: f"{v:.6g}"))
            lines.append(f"  ... {len(table) - 2 * half} rows ...")
            lines.append(table.tail(half).to_string(index=False, header=False, float_format=lambda v: f"{v:.6g}"))
        else:
            lines.append(table.to_string(index=False, float_format=lambda v: f"{v:.6g}"))

        fidelity_columns = [c for c in table.columns if c.startswith("fidelity")]
        if fidelity_columns:
            lines.append("-" * 70)
            for c in fidelity_columns:
                values = table[c].to_numpy(dtype=float)
                finite = values[np.isfinite(values)]
                if finite.size:
                    lines.append(f"  {c}: min {finite.min():.4f}, max {finite.max():.4f}")
        if "omega_mhz" in table.columns:
            refs = self._reference_lines(gate, table["omega_mhz"].to_numpy(dtype=float))
            if "fidelity_composite" in table.columns and self.show_references:
                refs.append(f"  measured composite estimate {COMPOSITE_REFERENCE:.2f} at 150 MHz")
            if refs:
                lines.append("Reference (measured, includes effects outside the model):")
                lines.extend(refs)
        for note in meta.get("notes", []):
            lines.append(f"  note: {note}")
        lines.append("=" * 70)
        return "\n".join(lines)

    def format_tomography(self, result: TomographyResult, omega_mhz: Optional[float] = None) -> str:
        """Real and imaginary parts of chi_sim next to chi_ideal, and the fidelity."""
        labels = ("I", "X", "-iY", "Z")

        def block(title: str, matrix: np.ndarray) -> List[str]:
            rows = [title, "        " + "".join(f"{l:>9}" for l in labels)]
            for label, row in zip(labels, matrix):
                rows.append(f"  {label:>4}  " + "".join(f"{v:9.4f}" for v in row))
            return rows

        lines = ["=" * 70, f"tomography: {result.gate}", "-" * 70]
        lines += block("Re chi_sim", np.real(result.chi_sim.chi))
        lines += block("Im chi_sim", np.imag(result.chi_sim.chi))
        lines += block("Re chi_ideal", np.real(result.chi_ideal.chi))
        lines.append("-" * 70)
        lines.append(f"Process fidelity Tr(chi_sim chi_ideal) = {result.fidelity:.6f}")
        lines.append(f"Tr(chi_sim) = {result.chi_sim.trace:.6f} (below 1 by the leaked population)")
        if omega_mhz is not None and math.isfinite(omega_mhz):
            refs = self._reference_lines(result.gate, np.array([omega_mhz]))
            if refs:
                lines.append("Reference (measured, includes effects outside the model):")
                lines.extend(refs)
        lines.append("=" * 70)
        return "\n".join(lines)
