"""Recursive-estimation graphics for outlier detection in linear regression."""

__version__ = "0.1.0"

from .cusum import Boundary, CusumPath, cusum_path, detect_crossing, solve_boundary_constant
from .diagnostics import DiagnosticsReport, classical_diagnostics
from .engine import (
    Method,
    RecursiveTrace,
    TraceEnsemble,
    recursive_residual,
    recursive_trace_resolve,
    recursive_trace_update,
    trace_ensemble,
)
from .linalg import Dataset, OlsFit, fit_ols, hat_matrix_diag, solve_spd
from .permute import PermutationSchedule, ScheduleKind, schedule_permutations, suggest_schedule
from .simgen import ScenarioSpec, generate, generate_clean, inject_outliers

__all__ = [
    "Boundary", "CusumPath", "cusum_path", "detect_crossing", "solve_boundary_constant",
    "DiagnosticsReport", "classical_diagnostics",
    "Method", "RecursiveTrace", "TraceEnsemble", "recursive_residual",
    "recursive_trace_resolve", "recursive_trace_update", "trace_ensemble",
    "Dataset", "OlsFit", "fit_ols", "hat_matrix_diag", "solve_spd",
    "PermutationSchedule", "ScheduleKind", "schedule_permutations", "suggest_schedule",
    "ScenarioSpec", "generate", "generate_clean", "inject_outliers",
]
