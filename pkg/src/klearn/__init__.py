"""One-shot parameter estimation for weighted k-SAT Gibbs distributions."""

from .conditions import (
    ConditionReport,
    alpha_condition,
    alpha_of_beta,
    f_alpha,
    f_alpha_of_beta,
    impossibility_thm12,
    impossibility_thm13,
    impossibility_thm37,
    learnable_condition,
    lll_condition_check,
    taylor_identity_check,
)
from .distribution import (
    GibbsTable,
    ProductMeasure,
    SampleReport,
    enumerate_gibbs,
    min_false,
    sample_exact,
    sample_rejection,
    total_variation,
    verify_gap,
)
from .errors import (
    BudgetExhaustedError,
    CapExceededError,
    DimacsError,
    InvalidParameterError,
    KlearnError,
    UnsatisfiableError,
    UnsatisfiedError,
)
from .estimator import (
    Classification,
    EstimateResult,
    EstimatorConfig,
    Status,
    classify,
    estimate,
    estimate_closed_form,
    log_pseudo_likelihood,
    pseudo_derivative,
    pseudo_derivative_direct,
    second_derivative,
    second_moment_diagnostic,
)
from .formula import (
    Assignment,
    Clause,
    Formula,
    Literal,
    count_true,
    negate_all,
    parse_dimacs,
    random_bounded_formula,
    satisfies,
    validate,
    write_dimacs,
)
from .gadgets import (
    GadgetSpec,
    ReplicaSpec,
    batch_indices,
    build_psi0,
    build_psi1,
    build_psi2,
    build_psi3,
    jstar,
    miss_probability,
)

__version__ = "0.1.0"
