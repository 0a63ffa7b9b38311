"""Simulator for second-price vs hidden-cost-adjusted ad auctions.

Implements the two single-slot mechanisms, the effectiveness-nuisance
generative model with its closed-form dispersion and market-depth
conditions, seeded Monte Carlo experiments, and statistical oracles for
the mechanism-comparison claims.
"""

__version__ = "0.1.0"

from .core import (AdvertiserDraw, AuctionOutcome, advertiser_profit_pair,
                   as_auction, as_auction_arrays, sp_auction, sp_auction_arrays)
from .model import (AdjustedParams, DispersionCondition, ParameterError,
                    TradeoffParams, adjusted_params, costs_identically_zero,
                    dispersion_condition, market_depth, market_depth_from_z,
                    sample_advertisers, sample_value_cost)
from .sim import (ExperimentConfig, SimSummary, SUMMARY_FIELDS,
                  collect_paired_outcomes, collect_replications,
                  run_experiment, run_replication, summarize, sweep)
from .stats import (RngSpec, derive_seed, ks_critical_value, ks_distance,
                    make_generator, normal_cdf, normal_inverse_cdf, normal_pdf,
                    uniform_order_stat_mean)
from .verify import (TheoremId, TheoremReport, check_beta_u2,
                     check_counterexample, check_pit_equivalence,
                     check_theorem1, check_theorem2, check_theorem3,
                     check_truthfulness, truthfulness_suite)

__all__ = [
    "__version__",
    "AdvertiserDraw", "AuctionOutcome", "advertiser_profit_pair",
    "as_auction", "as_auction_arrays", "sp_auction", "sp_auction_arrays",
    "AdjustedParams", "DispersionCondition", "ParameterError",
    "TradeoffParams", "adjusted_params", "costs_identically_zero",
    "dispersion_condition", "market_depth", "market_depth_from_z",
    "sample_advertisers", "sample_value_cost",
    "ExperimentConfig", "SimSummary", "SUMMARY_FIELDS",
    "collect_paired_outcomes", "collect_replications",
    "run_experiment", "run_replication", "summarize", "sweep",
    "RngSpec", "derive_seed", "ks_critical_value", "ks_distance",
    "make_generator", "normal_cdf", "normal_inverse_cdf", "normal_pdf",
    "uniform_order_stat_mean",
    "TheoremId", "TheoremReport", "check_beta_u2", "check_counterexample",
    "check_pit_equivalence", "check_theorem1", "check_theorem2",
    "check_theorem3", "check_truthfulness", "truthfulness_suite",
]
