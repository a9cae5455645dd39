"""Minimax predictive density estimation in the Gaussian sequence model.

Exact KL risks of Gaussian predictive rules, least-favorable priors on
ellipsoids by waterfilling, asymptotic minimax constants over L2 balls and
Sobolev classes, and Monte Carlo validation utilities.
"""

__version__ = "0.1.0"

from .asymptotics import (
    SobolevConstants,
    check_prior_condition,
    gamma_shrink,
    gaussian_quadratic_tail_bound,
    kl_lower_bound,
    l2ball_limit_constant,
    lower_bound_remainder,
    rate_constant_extract,
    sobolev_K,
    sobolev_M,
    sobolev_constants,
    sobolev_series_term,
)
from .core import (
    DesignSizes,
    EllipsoidSpec,
    design_matrix,
    ellipsoid_contains,
    sample_grid,
    sequence_transform,
    synthesize_function,
    trig_basis,
    truncation_bias,
)
from .montecarlo import (
    EquivalenceResult,
    McEstimate,
    individual_vs_simultaneous_plugin,
    mc_equivalence_check,
    mc_linear_risk,
    mc_prior_tail,
    mc_rule_risk,
    simulate_pair,
)
from .risks import (
    PredictiveGaussian,
    gaussian_prior_bayes_risk,
    kl_true_vs_predictive,
    linear_risk,
    oracle_risk,
    plugin_risk,
    predictive_params,
    uniform_prior_risk,
)
from .waterfill import (
    SolverError,
    WaterfillSolution,
    least_favorable,
    minimax_predictive,
    pinsker_estimation_baseline,
    solve_lambda,
    waterfill_lhs,
)

__all__ = [
    "DesignSizes",
    "EllipsoidSpec",
    "EquivalenceResult",
    "McEstimate",
    "PredictiveGaussian",
    "SobolevConstants",
    "SolverError",
    "WaterfillSolution",
    "check_prior_condition",
    "design_matrix",
    "ellipsoid_contains",
    "gamma_shrink",
    "gaussian_prior_bayes_risk",
    "gaussian_quadratic_tail_bound",
    "individual_vs_simultaneous_plugin",
    "kl_lower_bound",
    "kl_true_vs_predictive",
    "l2ball_limit_constant",
    "least_favorable",
    "linear_risk",
    "lower_bound_remainder",
    "mc_equivalence_check",
    "mc_linear_risk",
    "mc_prior_tail",
    "mc_rule_risk",
    "minimax_predictive",
    "oracle_risk",
    "pinsker_estimation_baseline",
    "plugin_risk",
    "predictive_params",
    "rate_constant_extract",
    "sample_grid",
    "sequence_transform",
    "simulate_pair",
    "sobolev_K",
    "sobolev_M",
    "sobolev_constants",
    "sobolev_series_term",
    "solve_lambda",
    "synthesize_function",
    "trig_basis",
    "truncation_bias",
    "uniform_prior_risk",
    "waterfill_lhs",
]
