"""Sparse polynomial chaos recovery via weighted l1-minimization.

Orthonormal Hermite/Legendre tensor bases, coherence-aware sampling
(standard, asymptotic, coherence-optimal Markov chain), basis pursuit
denoising, cross-validated noise tolerances, and reproducible experiment
drivers.
"""

from .backends import BACKEND
from .index_set import MultiIndexSet, basis_count, build_index_set
from .poly_basis import (
    BasisSpec,
    QuadratureRule,
    envelope_b,
    eta_k,
    eval_1d,
    eval_row,
    gauss_rule,
    hermite_function,
)
from .sampler import (
    McmcConfig,
    SampleBatch,
    Strategy,
    make_rng,
    read_sample_csv,
    sample,
    weight_of,
    write_sample_csv,
)
from .coherence import (
    CoherenceEstimate,
    TruncationReport,
    check_truncation,
    estimate_mu,
    lambda_rule,
    sample_count_advisory,
    theoretical_mu_bound,
)
from .l1_solver import (
    MeasurementSystem,
    RecoveryResult,
    SolverOptions,
    assemble_system,
    solve_bpdn,
    solve_lasso_regularized,
)
from .model_problems import (
    ExternalSampleSet,
    ManufacturedSignal,
    load_external_samples,
    manufacture_signal,
    reference_coefficients,
    surface_reaction_qoi,
)
from .crossval import CrossValResult, cross_validate_delta, delta_grid, final_recovery

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BasisSpec",
    "CoherenceEstimate",
    "CrossValResult",
    "ExternalSampleSet",
    "ManufacturedSignal",
    "McmcConfig",
    "MeasurementSystem",
    "MultiIndexSet",
    "QuadratureRule",
    "RecoveryResult",
    "SampleBatch",
    "SolverOptions",
    "Strategy",
    "assemble_system",
    "basis_count",
    "build_index_set",
    "check_truncation",
    "cross_validate_delta",
    "delta_grid",
    "envelope_b",
    "estimate_mu",
    "eta_k",
    "eval_1d",
    "eval_row",
    "final_recovery",
    "gauss_rule",
    "hermite_function",
    "lambda_rule",
    "load_external_samples",
    "make_rng",
    "manufacture_signal",
    "read_sample_csv",
    "reference_coefficients",
    "sample",
    "sample_count_advisory",
    "solve_bpdn",
    "solve_lasso_regularized",
    "surface_reaction_qoi",
    "theoretical_mu_bound",
    "weight_of",
    "write_sample_csv",
]
