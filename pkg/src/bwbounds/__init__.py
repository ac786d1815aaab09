"""Certified bounds for polydisk-vs-curve extremal constants of exponential curves."""

from .curve import (
    ExponentVector,
    FrequencySet,
    bw_check,
    eval_curve,
    frequencies,
    k_norm,
    named_fixture,
    parse_exponents,
)
from .diophantine import (
    DiophantineProfile,
    ResonanceRecord,
    liouville_fixture,
    nearest_int_dist,
    scan,
    w_statistic,
)
from .errors import (
    BudgetExceeded,
    BwBoundsError,
    IndependenceViolation,
    PrecisionExhausted,
    SingularSystem,
    TowerOverflow,
)
from .lower_bounds import (
    BoundReport,
    OptimizerConfig,
    compute_bound_report,
    lower_from_poly,
    main_term,
    optimizer_lower,
    resonance_lower,
    resonance_poly,
    universal_lower,
    vanishing_poly,
    vanishing_residuals,
)
from .numerics import (
    ComplexBox,
    DEFAULT_CONTEXT,
    IntervalField,
    LogMagnitude,
    PrecisionContext,
    RealInterval,
    interval_field,
    log_sum,
)
from .polynomials import (
    MultiIndex,
    Poly,
    dim_pn,
    eval_poly,
    iter_simplex,
    polydisk_lower,
    polydisk_upper,
)
from .upper_bounds import (
    BetaTable,
    beta_log,
    beta_table,
    cert_upper,
    lemma_dist_rhs,
    prop_beta_rhs,
)
from .asymptotics import (
    LemmaCheckResult,
    check_estimate_chain,
    check_integral_lemma,
    check_sum_vs_integral,
    integral_I,
    simplex_count,
)

__version__ = "0.1.0"

__all__ = [
    "BetaTable",
    "BoundReport",
    "BudgetExceeded",
    "BwBoundsError",
    "ComplexBox",
    "DEFAULT_CONTEXT",
    "DiophantineProfile",
    "ExponentVector",
    "FrequencySet",
    "IndependenceViolation",
    "IntervalField",
    "LemmaCheckResult",
    "LogMagnitude",
    "MultiIndex",
    "OptimizerConfig",
    "Poly",
    "PrecisionContext",
    "PrecisionExhausted",
    "RealInterval",
    "ResonanceRecord",
    "SingularSystem",
    "TowerOverflow",
    "beta_log",
    "beta_table",
    "bw_check",
    "cert_upper",
    "check_estimate_chain",
    "check_integral_lemma",
    "check_sum_vs_integral",
    "compute_bound_report",
    "dim_pn",
    "eval_curve",
    "eval_poly",
    "frequencies",
    "integral_I",
    "interval_field",
    "iter_simplex",
    "k_norm",
    "lemma_dist_rhs",
    "liouville_fixture",
    "log_sum",
    "lower_from_poly",
    "main_term",
    "named_fixture",
    "nearest_int_dist",
    "optimizer_lower",
    "parse_exponents",
    "polydisk_lower",
    "polydisk_upper",
    "prop_beta_rhs",
    "resonance_lower",
    "resonance_poly",
    "scan",
    "simplex_count",
    "universal_lower",
    "vanishing_poly",
    "vanishing_residuals",
    "w_statistic",
]
