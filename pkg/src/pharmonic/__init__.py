"""Eigenfunctions and proper p-harmonic functions on rotation-group
quotients, with exact symbolic and jet-based numerical verification."""

from .expressions import (
    Const,
    EigenMatrix,
    Entry,
    FlagSpec,
    Log,
    Pow,
    Product,
    Sum,
    block_columns,
    default_flag_spec,
    dual_matrix,
    evaluate,
    flag_sum_expr,
    p_harmonic_expr,
    projector_entry,
    projector_form,
    rank_one_from_isotropic,
    rank_one_from_vector,
    validate_eigen_matrix,
    window_quadratic,
)
from .group import (
    BasisVector,
    GroupPoint,
    curve_jets,
    curve_point,
    gram_matrix,
    k_basis,
    m_basis,
    minkowski_form,
    sample_block_diagonal,
    sample_so,
    sample_so_mn,
    so_basis,
    validate_group_point,
)
from .jets import (
    BranchCutError,
    JetError,
    JetScalar,
    NonFiniteError,
    ShapeMismatch,
    ipow,
    jexp,
    jlog,
    jpow,
    jsqrt,
    lift,
    reciprocal,
    scalar_value,
    variable,
)
from .operators import (
    OperatorContext,
    SamplingExhausted,
    check_eigenfamily,
    check_eigenfunction,
    check_invariance,
    check_product_rule,
    conditioned_sample,
    dual_context,
    fd_laplacian,
    full_context,
    gradient_product,
    iterated_laplacian,
    k_context,
    laplacian,
    non_descent_witness,
    quotient_context,
)
from .reports import ARTIFACT_VERSION, REPORT_SCHEMA, VerificationReport
from .symcalc import (
    EigenParams,
    GaussianRational,
    SymExpr,
    apply_laplacian,
    as_expr_node,
    evaluate_sym,
    iterate_laplacian,
    p_harmonic_combination,
    verify_p_harmonic,
)

__version__ = ARTIFACT_VERSION
