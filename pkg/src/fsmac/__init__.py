"""Capacity bounds and block-coding experiments for state-dependent
multiple-access channels whose senders see noisy causal state observations.

The package models two senders that each observe a degraded version of an
i.i.d. channel state one step before transmitting, while the receiver knows
the state exactly.  Everything is built on the reduction to per-letter
strategies (maps from an observation symbol to a channel input), which turns
the problem into a memoryless MAC over strategy alphabets.
"""

from .errors import (
    FsmacError,
    GuardError,
    InternalInvariantError,
    SpecFormatError,
    ValidationError,
)
from .rng import stream
from .strategy import StrategySpace, decode_id, encode_table, enumerate_strategies
from .model import (
    DEFAULT_STRATEGY_CAP,
    FsMacSpec,
    StrategyChannel,
    induced_strategy_channel,
    load_spec,
    spec_from_dict,
    validate_spec,
)
from .rates import (
    JointLaw,
    RatePentagon,
    TeamPolicy,
    conditional_mutual_information,
    entropy,
    joint_law,
    load_policy,
    pentagon,
)
from .optimize import (
    OptimizerConfig,
    RateRegion,
    SumRateResult,
    convex_hull_2d,
    grid_oracle_sum_rate,
    inner_bound_region,
    maximize_sum_rate,
    pentagon_support,
)
from .converse import (
    ConverseAudit,
    EncoderMaps,
    alpha_sigma_weights,
    brute_force_conditional,
    factorized_conditional,
    induced_sigma_policy,
    random_encoders,
    sigma_average_pentagon,
    sigma_digits,
    sigma_string,
    verify_factorization,
)
from .mcsim import (
    Codebooks,
    SimConfig,
    SimReport,
    TrialOutcome,
    estimate_error,
    generate_codebooks,
    run_trial,
    typicality_check,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "FsmacError", "GuardError", "InternalInvariantError", "SpecFormatError",
    "ValidationError",
    "stream",
    "StrategySpace", "decode_id", "encode_table", "enumerate_strategies",
    "DEFAULT_STRATEGY_CAP", "FsMacSpec", "StrategyChannel",
    "induced_strategy_channel", "load_spec", "spec_from_dict", "validate_spec",
    "JointLaw", "RatePentagon", "TeamPolicy", "conditional_mutual_information",
    "entropy", "joint_law", "load_policy", "pentagon",
    "OptimizerConfig", "RateRegion", "SumRateResult", "convex_hull_2d",
    "grid_oracle_sum_rate", "inner_bound_region", "maximize_sum_rate",
    "pentagon_support",
    "ConverseAudit", "EncoderMaps", "alpha_sigma_weights",
    "brute_force_conditional", "factorized_conditional", "induced_sigma_policy",
    "random_encoders", "sigma_average_pentagon", "sigma_digits", "sigma_string",
    "verify_factorization",
    "Codebooks", "SimConfig", "SimReport", "TrialOutcome", "estimate_error",
    "generate_codebooks", "run_trial", "typicality_check", "wilson_interval",
    "__version__",
]
