"""Index-targeted alternating solver for right-definite two-parameter
eigenvalue problems, with an exact dense Kronecker-operator baseline."""

from .alternating import (
    QuadraticForms,
    Solution,
    SolveOptions,
    TraceEntry,
    mu_from,
    quadratic_forms,
    solve_index,
    step_u,
    step_v,
)
from .exceptions import (
    DegenerateForm,
    IndexOutOfRange,
    InvalidMatrix,
    InvalidMetric,
    InvalidVector,
    NotEnoughData,
    NotPositiveDefinite,
    NotRightDefinite,
    TooLarge,
    TwoParamError,
)
from .generators import (
    Discretization,
    SeparableMetric,
    builtin_metric,
    diagonal_variant,
    random_definite_problem,
    separable_helmholtz,
)
from .linalg import (
    EigenDecomposition,
    as_symmetric,
    sym_definite_gep_full,
    sym_definite_gep_kth,
    sym_eig,
)
from .metrics import (
    IndexErrorResult,
    convergence_order,
    index_error,
    rayleigh,
    tangent_slope,
)
from .oracle import (
    KroneckerOperators,
    OracleRecord,
    OracleSpectrum,
    build_operators,
    index_of,
    index_range,
    oracle_solve_all,
    rank_one_factor,
)
from .problem import (
    AssumptionReport,
    RecoveryMap,
    TwoParamProblem,
    check_assumptions,
    load_problem,
    make_definite,
    recover_eigenvalue,
    save_problem,
)
from .sweep import SweepRow, solve_all_indices

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "Discretization",
    "DegenerateForm",
    "EigenDecomposition",
    "IndexErrorResult",
    "IndexOutOfRange",
    "InvalidMatrix",
    "InvalidMetric",
    "InvalidVector",
    "KroneckerOperators",
    "NotEnoughData",
    "NotPositiveDefinite",
    "NotRightDefinite",
    "OracleRecord",
    "OracleSpectrum",
    "QuadraticForms",
    "RecoveryMap",
    "SeparableMetric",
    "Solution",
    "SolveOptions",
    "SweepRow",
    "TooLarge",
    "TraceEntry",
    "TwoParamError",
    "TwoParamProblem",
    "as_symmetric",
    "build_operators",
    "builtin_metric",
    "check_assumptions",
    "convergence_order",
    "diagonal_variant",
    "index_error",
    "index_of",
    "index_range",
    "load_problem",
    "make_definite",
    "mu_from",
    "oracle_solve_all",
    "quadratic_forms",
    "random_definite_problem",
    "rank_one_factor",
    "rayleigh",
    "recover_eigenvalue",
    "save_problem",
    "separable_helmholtz",
    "solve_all_indices",
    "solve_index",
    "step_u",
    "step_v",
    "sym_definite_gep_full",
    "sym_definite_gep_kth",
    "sym_eig",
    "tangent_slope",
]
