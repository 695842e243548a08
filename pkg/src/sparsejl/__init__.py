"""Sparse Johnson-Lindenstrauss projections with certified dimensions.

Build sparse sign projections, plan embedding dimensions from a
sub-Poissonian tail bound, and verify the supporting concentration
machinery (moment bounds, selector majorization, envelope inequalities,
Chernoff optimization) with exact small-instance oracles and Monte Carlo
experiments.
"""

from .concentration import (
    DEFAULT_ENVELOPE_SCALE,
    MAX_SPARSITY,
    PsiDomain,
    TailEnvelope,
    bennet_h,
    chernoff_optimum_check,
    mgf_envelope_bound,
    poisson_tail_bound,
    psi,
    sub_poisson_tail,
)
from .errors import (
    BudgetError,
    ConstraintViolation,
    DimensionMismatch,
    DomainError,
    FormatVersionError,
    MatrixInvariantError,
    SparseJLError,
    TruncatedStreamError,
)
from .oracle import (
    MajorizationSpec,
    MomentSpec,
    MultinomialCheckReport,
    PsiEnvelopeReport,
    TrialReport,
    check_majorization,
    check_multinomial_inequality,
    check_psi_envelope,
    chernoff_residual_grid,
    clopper_pearson,
    estimate_failure_prob,
    exact_moment_Z,
    moment_bound_rhs,
    squared_norm_samples,
)
from .planner import (
    BENNET_ROW,
    BoundsRow,
    PlanRequest,
    PlanResult,
    bounds_table,
    bounds_to_csv,
    min_dimension,
    sparsity_tradeoff,
)
from .transform import (
    SparseJLMatrix,
    apply,
    apply_batch,
    build_matrix,
    deserialize,
    deserialize_json,
    read_matrix,
    serialize,
    serialize_json,
    write_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BENNET_ROW",
    "BoundsRow",
    "BudgetError",
    "ConstraintViolation",
    "DEFAULT_ENVELOPE_SCALE",
    "DimensionMismatch",
    "DomainError",
    "FormatVersionError",
    "MajorizationSpec",
    "MatrixInvariantError",
    "MAX_SPARSITY",
    "MomentSpec",
    "MultinomialCheckReport",
    "PlanRequest",
    "PlanResult",
    "PsiDomain",
    "PsiEnvelopeReport",
    "SparseJLError",
    "SparseJLMatrix",
    "TailEnvelope",
    "TrialReport",
    "TruncatedStreamError",
    "apply",
    "apply_batch",
    "bennet_h",
    "bounds_table",
    "bounds_to_csv",
    "build_matrix",
    "check_majorization",
    "check_multinomial_inequality",
    "check_psi_envelope",
    "chernoff_optimum_check",
    "chernoff_residual_grid",
    "clopper_pearson",
    "deserialize",
    "deserialize_json",
    "estimate_failure_prob",
    "exact_moment_Z",
    "mgf_envelope_bound",
    "min_dimension",
    "moment_bound_rhs",
    "poisson_tail_bound",
    "psi",
    "read_matrix",
    "serialize",
    "serialize_json",
    "sparsity_tradeoff",
    "squared_norm_samples",
    "sub_poisson_tail",
    "write_matrix",
]
