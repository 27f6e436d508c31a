"""Effective-size (macroscopicity) measures for multi-qubit states."""
from .config import TOL, CapacityError, max_qubits
from .core import (DensityOperator, HermitianOperator, SpectralDecomposition, StateVector,
                   eigh, fidelity, overlap, partial_trace, tensor, trace_distance, trace_norm)
from .fisher import (OptimizerConfig, QfiResult, check_producible_bound, maximize_qfi, neff_f,
                     producibility_bound, qfi, qfi_pure, variance_additivity_check)
from .library import build_state, build_superposition
from .measures import (MeasureResult, MeasureUndefined, SingularMeasure, Superposition,
                       bjork_mana_approx, bjork_mana_exact, index_p, index_q, index_q_scan,
                       korsbakken, korsbakken_delta_bound, marquardt, relative_fisher,
                       relative_fisher_noisy)
from .observables import Grouping, LocalOperator, assemble, collective_pauli, default_groupings
from .scaling import MeasureConfig, ScalingReport, classify_scaling
from .states import StateSpec

__version__ = "0.1.0"
