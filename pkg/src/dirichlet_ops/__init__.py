"""Dirichlet-series symbols, composition operators and their semigroups."""
from ._accel import BACKEND
from .composition import (
    DEFAULT_CLOSURE,
    ContractionReport,
    PullbackResult,
    compose,
    compose_symbols,
    monomial_pullback,
    verify_contraction,
)
from .diophantine import (
    VALUE_GAP_BOUND,
    KroneckerQuery,
    kronecker_search,
    nonseparability_demo,
    prop_algebrab_witnesses,
    recurrence_sequence,
    verify_kronecker,
)
from .errors import BudgetExhausted, FlowError, NewtonError, NotFoundError, PreconditionError
from .semigroups import (
    FlowResult,
    GeneratorSpec,
    KoenigsSpec,
    Semigroup,
    SpirallikeSpec,
    compact_transition_scan,
    flow_koenigs,
    flow_ode,
    generator_recovery_check,
    identity_convergence_scan,
    koenigs_from_generator,
    named_generator,
    semigroup_law_check,
    spirallike_koenigs,
    validate_generator,
)
from .series import (
    AbscissaeReport,
    EvaluationResult,
    GrowthModel,
    TailBound,
    TruncatedDirichletSeries,
    add,
    coefficient_stream,
    estimate_abscissae,
    evaluate,
    exp_series,
    multiply,
    sup_norm_estimate,
)
from .symbols import (
    ClassReport,
    ContinuityProbe,
    RegionSpec,
    Symbol,
    WitnessPair,
    builtin_symbol,
    classify,
    classify_G,
    classify_G_infty,
    compactness_diagnostic,
    probe_G_A,
)

__version__ = "0.1.0"
