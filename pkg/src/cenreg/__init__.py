"""Centered and scaled weighted least squares on sparse design matrices.

The dense centered design is never materialized: the normal equations are
expanded into a sparse-optimized Gram product plus cheap rank-one
corrections built from weighted column sums and means.  A naive dense
reference solver, a deterministic data generator, and a benchmark harness
ship alongside the solver.
"""

from .bench import BenchRecord, memory_model, run_benchmark
from .covariance import cov_hc, cov_homoskedastic
from .datagen import SimulationSpec, simulate
from .errors import CenregError, ParseError, PipelineError
from .gram import (
    NormalEquations,
    build_normal_equations,
    cross_correction,
    outer_correction,
    scaled_colsums,
)
from .mmio import read_matrix_market, write_matrix_market
from .model_io import ModelFile, model_from_fit, read_model, write_model
from .moments import StandardizationPlan, compute_plan, weight_aggregates
from .oracle import materialize_centered, naive_fit
from .solver import (
    FitResult,
    fit,
    predict,
    residual_variance,
    solve_transformed,
    to_original,
)
from .sparse import (
    SparseDesign,
    SymmetricDenseMatrix,
    from_triplets,
    transpose_apply,
    weighted_column_sums,
    weighted_gram_upper,
)

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "CenregError",
    "FitResult",
    "ModelFile",
    "NormalEquations",
    "ParseError",
    "PipelineError",
    "SimulationSpec",
    "SparseDesign",
    "StandardizationPlan",
    "SymmetricDenseMatrix",
    "build_normal_equations",
    "compute_plan",
    "cov_hc",
    "cov_homoskedastic",
    "cross_correction",
    "fit",
    "from_triplets",
    "materialize_centered",
    "memory_model",
    "model_from_fit",
    "naive_fit",
    "outer_correction",
    "predict",
    "read_matrix_market",
    "read_model",
    "residual_variance",
    "run_benchmark",
    "scaled_colsums",
    "simulate",
    "solve_transformed",
    "to_original",
    "transpose_apply",
    "weight_aggregates",
    "weighted_column_sums",
    "weighted_gram_upper",
    "write_matrix_market",
    "write_model",
]
