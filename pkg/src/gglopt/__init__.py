"""Sparse and sparse-minus-low-rank precision matrix estimation (single, group and fused graphical lasso)."""

__version__ = "0.1.0"

from .core import (
    CovInput,
    DomainError,
    Family,
    PenaltySpec,
    Solution,
    SolveDiagnostics,
    SolverConfig,
    ValidationError,
    objective,
    validate_input,
)
from .admm import kkt_residual, solve, solve_latent_sgl, solve_multi, solve_sgl
from .blocks import connected_components, solve_sgl_blockwise, threshold_graph
from .selection import ParameterGrid, SelectionReport, default_lambda_grid, ebic, grid_search, scale_to_correlation
from .synth import generate_latent_precision, generate_precision, recovery_metrics, sample_covariance

__all__ = [
    "CovInput",
    "DomainError",
    "Family",
    "PenaltySpec",
    "Solution",
    "SolveDiagnostics",
    "SolverConfig",
    "ValidationError",
    "objective",
    "validate_input",
    "kkt_residual",
    "solve",
    "solve_latent_sgl",
    "solve_multi",
    "solve_sgl",
    "connected_components",
    "solve_sgl_blockwise",
    "threshold_graph",
    "ParameterGrid",
    "SelectionReport",
    "default_lambda_grid",
    "ebic",
    "grid_search",
    "scale_to_correlation",
    "generate_latent_precision",
    "generate_precision",
    "recovery_metrics",
    "sample_covariance",
]
