"""
Exception hierarchy for the holonomic gate simulator.

The CLI maps ConfigError to exit code 2 and NumericalError to exit code 3.
"""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class NormalizationError(SimulationError, ValueError):
    """A state vector that should be unit-norm is not."""


class InfeasiblePulseError(SimulationError, ValueError):
    """The pulse ramps alone already exceed the 2*pi pulse area."""


class GateRangeError(SimulationError, ValueError):
    """Gate parameters outside the admissible range (e.g. Z(gamma) with gamma not in (0, 2*pi))."""


class ConfigError(SimulationError, ValueError):
    """Invalid run configuration."""


class NumericalError(SimulationError):
    """Base class for numerical failures (integrator, quadrature, inversion)."""


class IntegratorAccuracyError(NumericalError):
    """Trace drift exceeded the allowed budget; reduce the step size."""


class DegenerateInputError(NumericalError):
    """The process-tomography linear system is singular."""


class InvalidStateError(SimulationError, ValueError):
    """A density matrix violates hermiticity, trace or positivity bounds."""
