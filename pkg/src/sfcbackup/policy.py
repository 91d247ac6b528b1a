"""Per-slot backup policies and reward accounting.

All three policies work on a fresh residual (capacity is reclaimed between
slots) and never commit a plan with non-positive score (the learned ones) or
an infinite latency (all of them). Learner updates happen inside the slot
call, after deployment, using that slot's observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .learning import (FailureLearner, PopularityLearner, chain_failure_rate,
                       failure_estimate, failure_update, popularity_estimate,
                       popularity_update)
from .model import Catalog, EdgeNetwork
from .placement import PlacementPlan
from .workload import GroundTruth, SlotObservation, true_popularity


class InvariantViolation(RuntimeError):
    """A committed decision broke capacity safety or bookkeeping coupling."""


@dataclass(frozen=True)
class RewardWeights:
    omega: float = 1.0   # weight on served request count
    mu: float = 1.0      # weight on chain latency

    def __post_init__(self):
        if not (self.omega > 0.0) or not (self.mu >= 0.0):
            raise ValueError("need omega > 0 and mu >= 0")


@dataclass(eq=False)
class SlotDecision:
    """One slot's committed backups.

    deployed lists (sfc, plan) in commit order; x is the per-SFC backup
    vector; placed_counts[i] totals deployed copies of VNF i across all
    committed chains this slot.
    """

    t: int
    deployed: list[tuple[int, PlacementPlan]]
    x: np.ndarray
    placed_counts: np.ndarray
    residual_after: np.ndarray


def pre_reward(weights: RewardWeights, popularity: float, latency: float,
               failure_rate: float) -> float:
    """Selection score for one candidate plan.

    A failure estimate of 1 annihilates the score outright, which also keeps
    the +inf exploration sentinel from producing inf * 0.
    """
    gate = 1.0 - failure_rate
    if gate <= 0.0:
        return 0.0
    return (weights.omega * popularity - weights.mu * latency) * gate


def _decide(network: EdgeNetwork, catalog: Catalog, q_est: np.ndarray,
            v_est: np.ndarray, weights: RewardWeights, mode: int,
            t: int) -> SlotDecision:
    """Run the greedy selection kernel and wrap its output, verifying invariants."""
    n_sfcs = catalog.n_sfcs
    chain_vnf, chain_start = catalog.chain_arrays
    nbr_ids, nbr_count = network.neighbor_table
    link_u, link_v = network.cheapest_link
    max_len = max(1, catalog.max_chain_len)

    x = np.zeros(n_sfcs, dtype=np.uint8)
    order = np.full(n_sfcs, -1, dtype=np.int64)
    lat_out = np.full(n_sfcs, math.inf, dtype=np.float64)
    assign = np.full((n_sfcs, max_len), -1, dtype=np.int64)
    residual = np.zeros(network.n_servers, dtype=np.int64)

    n_committed = kernels.slot_decide(
        mode, network.caps_array, catalog.demand_array, chain_vnf, chain_start,
        nbr_ids, nbr_count, network.latency_matrix, link_u, link_v,
        q_est, v_est, weights.omega, weights.mu,
        x, order, lat_out, assign, residual,
    )

    deployed: list[tuple[int, PlacementPlan]] = []
    placed = np.zeros(catalog.n_vnfs, dtype=np.int64)
    for idx in range(n_committed):
        f = int(order[idx])
        chain = catalog.sfc_chain[f]
        plan = PlacementPlan(sfc=f,
                             assignment=tuple(int(s) for s in assign[f, :len(chain)]),
                             latency=float(lat_out[f]), at_edge=True)
        deployed.append((f, plan))
        for i in chain:
            placed[i] += 1

    decision = SlotDecision(t=int(t), deployed=deployed, x=x,
                            placed_counts=placed, residual_after=residual)
    verify_decision(network, catalog, decision)
    return decision


def rtsd_slot(network: EdgeNetwork, catalog: Catalog,
              learners: tuple[PopularityLearner, FailureLearner], t: int,
              obs: SlotObservation,
              weights: RewardWeights = RewardWeights()) -> SlotDecision:
    """Learned greedy selection with latency-aware placement.

    Scores every remaining chain's greedy plan with the current optimistic
    estimates, commits the best positive score, re-plans, repeats; then folds
    the slot's observation back into the learners for the deployed arms.
    """
    pop, fail = learners
    q_est = popularity_estimate(pop, t)
    v_est = failure_estimate(fail, t)
    decision = _decide(network, catalog, q_est, v_est, weights, kernels.GREEDY, t)
    pop.request_ucb = q_est
    fail.failure_ucb = v_est
    popularity_update(pop, obs, decision.x)
    failure_update(fail, obs, decision.placed_counts)
    return decision


def bandit_scheme_slot(network: EdgeNetwork, catalog: Catalog,
                       learners: tuple[PopularityLearner, FailureLearner], t: int,
                       obs: SlotObservation,
                       weights: RewardWeights = RewardWeights()) -> SlotDecision:
    """Same learners and greedy selection as rtsd_slot, but first-fit placement."""
    pop, fail = learners
    q_est = popularity_estimate(pop, t)
    v_est = failure_estimate(fail, t)
    decision = _decide(network, catalog, q_est, v_est, weights, kernels.FIRST_FIT, t)
    pop.request_ucb = q_est
    fail.failure_ucb = v_est
    popularity_update(pop, obs, decision.x)
    failure_update(fail, obs, decision.placed_counts)
    return decision


def random_scheme_slot(network: EdgeNetwork, catalog: Catalog, t: int,
                       obs: SlotObservation,
                       rng: np.random.Generator) -> SlotDecision:
    """No learning: random SFC order, first fit onto randomly ordered servers.

    Each not-yet-deployed SFC is attempted once per slot; an attempt places
    every occurrence on the first qualified server of a fresh random scan and
    commits only if the whole chain fits at the edge.
    """
    n = network.n_servers
    caps = network.caps_array
    lat = network.latency_matrix
    demands = catalog.demand_array
    residual = caps.copy()
    x = np.zeros(catalog.n_sfcs, dtype=np.uint8)
    placed = np.zeros(catalog.n_vnfs, dtype=np.int64)
    deployed: list[tuple[int, PlacementPlan]] = []

    candidates = list(range(catalog.n_sfcs))
    while candidates:
        f = candidates.pop(int(rng.integers(len(candidates))))
        chain = catalog.sfc_chain[f]
        tent = np.zeros(n, dtype=np.int64)
        assign: list[int] = []
        latency = 0.0
        feasible = len(chain) > 0
        for i in chain:
            need = demands[i]
            spot = -1
            for s in rng.permutation(n):
                if residual[s] - tent[s] >= need:
                    spot = int(s)
                    break
            if spot < 0:
                feasible = False
                break
            if assign:
                latency += lat[assign[-1], spot]
            assign.append(spot)
            tent[spot] += need
        if not feasible or math.isinf(latency):
            continue
        residual -= tent
        x[f] = 1
        for i in chain:
            placed[i] += 1
        deployed.append((f, PlacementPlan(sfc=f, assignment=tuple(assign),
                                          latency=float(latency), at_edge=True)))

    decision = SlotDecision(t=int(t), deployed=deployed, x=x,
                            placed_counts=placed, residual_after=residual)
    verify_decision(network, catalog, decision)
    return decision


def realized_reward(weights: RewardWeights, obs: SlotObservation,
                    decision: SlotDecision,
                    catalog: Catalog) -> tuple[np.ndarray, float]:
    """What the slot actually earned, per SFC and in total.

    A deployed chain pays off only if none of its constituent VNFs failed
    this slot (copies of the same VNF share one failure outcome); the payoff
    uses the realized request count. Cloud chains earn 0.
    """
    per_sfc = np.zeros(catalog.n_sfcs, dtype=np.float64)
    for f, plan in decision.deployed:
        chain = catalog.sfc_chain[f]
        if any(obs.vnf_failed[i] for i in set(chain)):
            continue
        per_sfc[f] = weights.omega * obs.requests[f] - weights.mu * plan.latency
    return per_sfc, float(per_sfc.sum())


def expected_slot_value(weights: RewardWeights, gt: GroundTruth,
                        decision: SlotDecision, catalog: Catalog) -> float:
    """Decision value under the true parameters (the selection objective)."""
    q = true_popularity(gt)
    total = 0.0
    for f, plan in decision.deployed:
        u_true = chain_failure_rate(catalog, gt.failure_mean, f)
        total += (weights.omega * q[f] - weights.mu * plan.latency) * (1.0 - u_true)
    return float(total)


def verify_decision(network: EdgeNetwork, catalog: Catalog,
                    decision: SlotDecision) -> None:
    """Always-on safety net: capacity, coupling, and bookkeeping must agree.

    Raises InvariantViolation on the first inconsistency. Cheap enough to run
    on every slot of every experiment.
    """
    load = np.zeros(network.n_servers, dtype=np.int64)
    placed = np.zeros(catalog.n_vnfs, dtype=np.int64)
    seen: set[int] = set()
    for f, plan in decision.deployed:
        chain = catalog.sfc_chain[f]
        if f in seen:
            raise InvariantViolation(f"slot {decision.t}: SFC {f} committed twice")
        seen.add(f)
        if not plan.at_edge or len(plan.assignment) != len(chain):
            raise InvariantViolation(f"slot {decision.t}: SFC {f} committed a partial plan")
        if math.isinf(plan.latency):
            raise InvariantViolation(f"slot {decision.t}: SFC {f} committed at infinite latency")
        for pos, server in enumerate(plan.assignment):
            if not (0 <= server < network.n_servers):
                raise InvariantViolation(f"slot {decision.t}: SFC {f} assigned to unknown server {server}")
            load[server] += catalog.vnf_demand[chain[pos]]
            placed[chain[pos]] += 1
    caps = network.caps_array
    if np.any(load > caps):
        raise InvariantViolation(f"slot {decision.t}: server load exceeds capacity")
    if np.any(decision.residual_after != caps - load):
        raise InvariantViolation(f"slot {decision.t}: residual bookkeeping mismatch")
    x_expect = np.zeros(catalog.n_sfcs, dtype=np.uint8)
    for f in seen:
        x_expect[f] = 1
    if np.any(decision.x != x_expect):
        raise InvariantViolation(f"slot {decision.t}: backup vector out of sync with plans")
    if np.any(decision.placed_counts != placed):
        raise InvariantViolation(f"slot {decision.t}: placement counts out of sync with plans")
