"""Backup selection and placement for service function chains at the edge.

A time-slotted simulator plus three per-slot policies: a learned
latency-aware scheme (rtsd), a learned first-fit baseline (bandit), and an
uninformed random baseline, with exhaustive oracles for small instances.
"""

from .model import (CLOUD_LATENCY, Catalog, EdgeNetwork, cheapest_link_anchor,
                    fresh_residual, neighbors_by_latency, validate_instance)
from .workload import (GroundTruth, SlotObservation, make_ground_truth,
                       sample_slot, slot_stream, true_popularity)
from .learning import (FailureLearner, PopularityLearner, chain_failure_rate,
                       failure_estimate, failure_update, init_learners,
                       popularity_estimate, popularity_update)
from .placement import PlacementPlan, get_consumption, plan_all
from .policy import (InvariantViolation, RewardWeights, SlotDecision,
                     bandit_scheme_slot, expected_slot_value, pre_reward,
                     random_scheme_slot, realized_reward, rtsd_slot,
                     verify_decision)
from .oracle import (OracleResult, SearchSpaceTooLarge, optimal_chain_latency,
                     optimal_slot_value, shortest_path_matrix)
from .harness import (ConfigError, ExperimentConfig, RunResult, Row,
                      apply_overrides, default_config_path, emit, load_config,
                      run, simulate_run)

__version__ = "0.1.0"

__all__ = [
    "CLOUD_LATENCY", "Catalog", "EdgeNetwork", "cheapest_link_anchor",
    "fresh_residual", "neighbors_by_latency", "validate_instance",
    "GroundTruth", "SlotObservation", "make_ground_truth", "sample_slot",
    "slot_stream", "true_popularity",
    "FailureLearner", "PopularityLearner", "chain_failure_rate",
    "failure_estimate", "failure_update", "init_learners",
    "popularity_estimate", "popularity_update",
    "PlacementPlan", "get_consumption", "plan_all",
    "InvariantViolation", "RewardWeights", "SlotDecision",
    "bandit_scheme_slot", "expected_slot_value", "pre_reward",
    "random_scheme_slot", "realized_reward", "rtsd_slot", "verify_decision",
    "OracleResult", "SearchSpaceTooLarge", "optimal_chain_latency",
    "optimal_slot_value", "shortest_path_matrix",
    "ConfigError", "ExperimentConfig", "RunResult", "Row", "apply_overrides",
    "default_config_path", "emit", "load_config", "run", "simulate_run",
    "__version__",
]
