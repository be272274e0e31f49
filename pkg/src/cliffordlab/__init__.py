"""Monitored Clifford circuits with noise and swap-in ancilla operations:
coherent-information transitions, a replay-based success-fraction probe,
and finite-size-scaling collapse tools."""

__version__ = "0.1.0"

from .circuit import CircuitConfig, EventRecord, SimState, run_trajectory
from .collapse import CollapseOutput, CollapseParams, DataPoint, collapse
from .observables import coherent_information, conditional_entropy, convergence_time
from .paulis import CliffordGate, PauliOperator, commutes, pauli_product
from .stabilizer import GeneratorSet, MeasurementContradiction, MeasurementResult

__all__ = [
    "CircuitConfig", "CliffordGate", "CollapseOutput", "CollapseParams",
    "DataPoint", "EventRecord", "GeneratorSet", "MeasurementContradiction",
    "MeasurementResult", "PauliOperator", "SimState", "coherent_information",
    "collapse", "commutes", "conditional_entropy", "convergence_time",
    "pauli_product", "run_trajectory", "__version__",
]
