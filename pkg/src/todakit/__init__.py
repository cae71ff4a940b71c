"""Block gradations of classical Lie algebras and nonabelian Toda systems."""

from .cartan import CartanMatrix, cartan_inverse_closed_form, cartan_matrix
from .exact import (
    Rational,
    ShapeError,
    SingularMatrixError,
    rat_to_float,
    rational,
    rational_matrix,
    ridentity,
    rmat_equal,
    rmat_inverse,
    rmat_mul,
    rmat_to_complex,
    rmat_to_float,
    rzeros,
)
from .grading import (
    BlockStructure,
    DynkinLabels,
    GradationError,
    GradedDecomposition,
    GradingOperator,
    LeviType,
    block_degree,
    block_structure_to_labels,
    canonical_block_operator,
    exact_span_contains,
    graded_decomposition,
    labels_to_block_structure,
    levi_type,
    operator_from_labels,
    operator_matrix_from_labels,
)
from .liealg import (
    Membership,
    SeriesTag,
    algebra_basis,
    algebra_membership,
    antidiag_unit,
    basis_unit,
    cartan_generators,
    commutator,
    dr_automorphism,
    dr_conjugate,
    group_membership,
    symplectic_form,
    t_transpose,
)
from .solver import (
    BlowUpError,
    CharacteristicData,
    ConvergenceError,
    ConvergenceStudy,
    SolveResult,
    convergence_study,
    liouville_boundary,
    liouville_closure,
    liouville_field,
    liouville_system,
    march,
)
from .toda import (
    CBlocks,
    ConstraintError,
    DomainError,
    GridField,
    GridSpec,
    ResidualReport,
    TodaSystem,
    assemble_c,
    assemble_gamma,
    block_residuals,
    build_system,
    complete_betas,
    conformal_transform,
    connection,
    curvature_residual,
    emit_equations,
    field_from_closure,
    gamma_grid,
    gauge_transform,
    make_c_blocks,
    residual_full,
)

__version__ = "0.1.0"
