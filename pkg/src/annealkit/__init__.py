"""Desk-scale toolkit for quantum annealing: Ising/QUBO models, encodings,
quadratization, minor embedding, schedules, exact state-vector dynamics,
classical baselines and benchmark metrics."""

from .errors import AnnealkitError, CapacityError, DimensionError, FormatError, ParameterError, ValidationError
from .model import (
    IsingModel,
    QuboModel,
    SampleEntry,
    SampleSet,
    SpinConfig,
    all_energies,
    brute_force_ground,
    ising_energy,
    ising_to_qubo,
    qubo_energy,
    qubo_to_ising,
    random_spin_glass,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealkitError",
    "CapacityError",
    "DimensionError",
    "FormatError",
    "ParameterError",
    "ValidationError",
    "IsingModel",
    "QuboModel",
    "SampleEntry",
    "SampleSet",
    "SpinConfig",
    "all_energies",
    "brute_force_ground",
    "ising_energy",
    "ising_to_qubo",
    "qubo_energy",
    "qubo_to_ising",
    "random_spin_glass",
]
