"""Polyatomic ellipsoidal BGK solver with numerical verification of its a priori estimates."""
from .diagnostics import check_h_monotonicity, check_lemma_suite, entropy
from .gaussian import conservation_defect, conservative_correction, evaluate_gaussian
from .grid import GridConfig, PhaseSpaceGrid, build_grid, weighted_sup_norm
from .initial import InitSpec, init_distribution
from .moments import MacroFields, compute_moments, relaxation_fields
from .params import LemmaConstants, RelaxationParams, collision_frequency, lambda_delta, lemma_constants
from .solver import SolverConfig, picard_iterate, relaxation_step, run_simulation, transport_step

__version__ = "0.1.0"

__all__ = [
    "GridConfig", "InitSpec", "LemmaConstants", "MacroFields", "PhaseSpaceGrid",
    "RelaxationParams", "SolverConfig", "build_grid", "check_h_monotonicity",
    "check_lemma_suite", "collision_frequency", "compute_moments", "conservation_defect",
    "conservative_correction", "entropy", "evaluate_gaussian", "init_distribution",
    "lambda_delta", "lemma_constants", "picard_iterate", "relaxation_fields",
    "relaxation_step", "run_simulation", "transport_step", "weighted_sup_norm",
]
