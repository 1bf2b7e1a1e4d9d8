"""Statevector simulation substrate: Pauli algebra, circuits, evolution, noise."""
from .pauli import PauliError, PauliString, PauliSum, pauli_decompose
from .sim import (
    Circuit,
    Gate,
    NoiseModel,
    SimulationError,
    StateVector,
    apply_circuit,
    evolution_operator,
    evolve,
    measure_and_collapse,
    measure_probs,
    run_noisy,
    sample,
)

__all__ = [
    "PauliError",
    "PauliString",
    "PauliSum",
    "pauli_decompose",
    "Circuit",
    "Gate",
    "NoiseModel",
    "SimulationError",
    "StateVector",
    "apply_circuit",
    "evolution_operator",
    "evolve",
    "measure_and_collapse",
    "measure_probs",
    "run_noisy",
    "sample",
]
