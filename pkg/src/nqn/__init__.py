"""Bound-constrained nonsmooth optimization with L-BFGS, active-set
prediction and correction, and a projected weak Wolfe line search."""
__version__ = "0.1.0"

from ._accel import backend_name
from .bench import RunMatrixSpec, build_profiles, classify, emit, run_matrix
from .correction import CorrectionOutcome, correct, lemma1_check
from .geometry import (ActiveSet, Bounds, ContractViolation, binding_set, is_stationary, project,
                       stationarity_residual, t_operator, tight_set)
from .lbfgs import LBFGSMemory, NumericalBreakdown, dense_materialize, subspace_solve, theta_init
from .linesearch import LineSearchConfig, LineSearchOutcome, LSStatus, max_breakpoint, \
    modified_wolfe
from .problems import (ProblemConfigError, ProblemInstance, StartSpec, evaluate, fd_check,
                       get_problem, make_bounds, make_start, make_starts, problem_names)
from .solver import RunRecord, SolverConfig, Termination, nqn_solve, select_active_set
from .subgradient import (GradientHistory, QPNotConverged, min_norm_combination,
                          min_norm_simplex, predict_active_set)

__all__ = [
    "ActiveSet", "Bounds", "ContractViolation", "CorrectionOutcome", "GradientHistory",
    "LBFGSMemory", "LSStatus", "LineSearchConfig", "LineSearchOutcome", "NumericalBreakdown",
    "ProblemConfigError", "ProblemInstance", "QPNotConverged", "RunMatrixSpec", "RunRecord",
    "SolverConfig", "StartSpec", "Termination", "backend_name", "binding_set", "build_profiles",
    "classify", "correct", "dense_materialize", "emit", "evaluate", "fd_check", "get_problem",
    "is_stationary", "lemma1_check", "make_bounds", "make_start", "make_starts", "max_breakpoint",
    "min_norm_combination", "min_norm_simplex", "modified_wolfe", "nqn_solve",
    "predict_active_set", "problem_names", "project", "run_matrix", "select_active_set",
    "stationarity_residual", "subspace_solve", "t_operator", "theta_init", "tight_set",
]
