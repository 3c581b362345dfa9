"""hypercalc: exact infinitesimal arithmetic and the calculus built on it.

The package models a computable fragment of a non-Archimedean ordered
field: rational functions (and geometric growth terms) of one canonical
infinite element. On top of it sit engines for sequence convergence via
values at infinite indices, derivatives as standard parts of increment
quotients, and integrals as standard parts of hyperfinite lower/upper sums,
plus the `hypercalc` command line.
"""

from .errors import (
    DependenceError,
    DivisionByZeroError,
    DomainError,
    HypercalcError,
    InfiniteArgumentError,
    KinkError,
    NoClosedFormError,
    NotIndeterminateError,
    OrderExhaustedError,
    ParseError,
    PoleError,
    SingularError,
    UnsupportedFormError,
)
from .filters import (
    CofiniteSet,
    FiniteFamily,
    cofinite_contains,
    extend_to_ultrafilter,
    generate_from_base,
    is_filter,
    is_ultrafilter,
    principal_filter,
)
from .hyperfield import (
    EPSILON,
    OMEGA,
    Classification,
    HyperExp,
    HyperRat,
    arith,
    classify,
    compare,
    compose_rational,
    eval_at_index,
    growth_arith,
    growth_classify_st,
    infinitely_close,
    same_galaxy,
    standard_part,
)
from .integration import (
    AdditiveFn,
    IntegrandClass,
    SimplePartition,
    FinePartitionSymbolic,
    accumulation_check,
    admissibility_check,
    build_partition,
    classify_integrand,
    finite_modification_check,
    general_integrand,
    integrate,
    lower_upper_sums,
    monotone_integrand,
    polynomial_integrand,
    symbolic_integral_polynomial,
)
from .jets import (
    Jet,
    derivative,
    differential,
    jet_lift,
    lhospital,
    microcontinuity_probe,
    nth_derivative_via_increments,
)
from .parser import FUNCTION, HYPER_TERM, SEQUENCE, ParsedInput, parse
from .sequences import (
    ConvergenceReport,
    FrechetVerdict,
    NormalForm,
    analyze,
    cauchy_product_check,
    frechet_compare,
    normalize,
    series_analyze,
    series_partial_sum,
    to_hyper,
)

__version__ = "0.1.0"
