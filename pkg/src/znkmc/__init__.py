"""Kinetic Monte Carlo for Z_N quantum memories with defect-line grids."""

from .lattice import (
    DefectLine,
    DegeneracyError,
    DegeneracyReport,
    ErrorState,
    Lattice,
    LatticeSpec,
    apply_event,
    build_lattice,
    logical_class,
    logical_functionals,
    syndrome,
    validate_degeneracy,
)
from .energy import MassVector, delta_energy, energy
from .engine import Trajectory, davies_rate, init, observables, run_until, step
from .decoder import DecodeOutcome, Recovery, attempt_recovery, decode, transport

__version__ = "0.1.0"

__all__ = [
    "DefectLine",
    "DegeneracyError",
    "DegeneracyReport",
    "ErrorState",
    "Lattice",
    "LatticeSpec",
    "MassVector",
    "Trajectory",
    "DecodeOutcome",
    "Recovery",
    "apply_event",
    "attempt_recovery",
    "build_lattice",
    "davies_rate",
    "decode",
    "delta_energy",
    "energy",
    "init",
    "logical_class",
    "logical_functionals",
    "observables",
    "run_until",
    "step",
    "syndrome",
    "transport",
    "validate_degeneracy",
    "__version__",
]
