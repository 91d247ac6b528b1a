"""Exhaustive reference optima for small instances.

The oracle knows the true popularity and failure parameters and may route a
chain link over multiple physical hops, so its assignments are evaluated with
all-pairs shortest-path latencies. Search is plain DFS with pruning and a
hard state budget; anything bigger than a few servers and a few short chains
should stay out of here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .learning import chain_failure_rate
from .model import Catalog, EdgeNetwork
from .policy import RewardWeights
from .workload import GroundTruth, true_popularity

DEFAULT_STATE_BUDGET = 10_000_000


class SearchSpaceTooLarge(RuntimeError):
    """The requested enumeration would exceed the state budget."""


@dataclass(eq=False)
class OracleResult:
    best_latency: dict[int, float]      # per-SFC standalone optimum (inf if unplaceable)
    best_selection: tuple[int, ...]     # value-maximizing SFC subset
    best_value: float                   # its objective value (>= 0, empty subset allowed)


def shortest_path_matrix(network: EdgeNetwork) -> np.ndarray:
    """All-pairs shortest-path latencies (Floyd-Warshall on the link matrix)."""
    sp = network.latency_matrix.copy()
    for k in range(network.n_servers):
        np.minimum(sp, sp[:, k][:, None] + sp[k, :][None, :], out=sp)
    return sp


def optimal_chain_latency(network: EdgeNetwork, catalog: Catalog, residual,
                          f: int, node_budget: int = DEFAULT_STATE_BUDGET) -> float:
    """Exact minimum latency for SFC f against ``residual``; +inf when nothing fits.

    Enumerates every capacity-feasible assignment of the chain's occurrences
    to servers (branch-and-bound), charging consecutive occurrences the
    shortest-path distance between their servers.
    """
    chain = catalog.sfc_chain[f]
    n = network.n_servers
    if len(chain) == 0:
        return math.inf
    if n ** len(chain) > node_budget:
        raise SearchSpaceTooLarge(
            f"{n}^{len(chain)} assignments exceed the budget of {node_budget}")
    sp = shortest_path_matrix(network)
    demands = catalog.vnf_demand
    res = np.array(residual, dtype=np.int64)
    best = math.inf

    def walk(j: int, prev: int, acc: float) -> None:
        nonlocal best
        if j == len(chain):
            best = acc
            return
        need = demands[chain[j]]
        for s in range(n):
            if res[s] >= need:
                step = 0.0 if j == 0 else sp[prev, s]
                if acc + step < best:
                    res[s] -= need
                    walk(j + 1, s, acc + step)
                    res[s] += need

    walk(0, -1, 0.0)
    return float(best)


def _joint_min_weighted_latency(network: EdgeNetwork, catalog: Catalog,
                                subset: list[int], weights_per_sfc: list[float],
                                sp: np.ndarray) -> float:
    """Min over joint capacity-feasible placements of sum_f w_f * L_f; inf if none."""
    res = network.caps_array.copy()
    demands = catalog.vnf_demand
    chains = [catalog.sfc_chain[f] for f in subset]
    best = math.inf

    def walk(ci: int, j: int, prev: int, acc: float) -> None:
        nonlocal best
        if ci == len(chains):
            best = acc
            return
        chain = chains[ci]
        if j == len(chain):
            walk(ci + 1, 0, -1, acc)
            return
        need = demands[chain[j]]
        w = weights_per_sfc[ci]
        for s in range(network.n_servers):
            if res[s] >= need:
                step = 0.0 if j == 0 else w * sp[prev, s]
                if acc + step < best:
                    res[s] -= need
                    walk(ci, j + 1, s, acc + step)
                    res[s] += need

    walk(0, 0, -1, 0.0)
    return best


def optimal_slot_value(network: EdgeNetwork, catalog: Catalog, gt: GroundTruth,
                       weights: RewardWeights = RewardWeights(),
                       node_budget: int = DEFAULT_STATE_BUDGET) -> OracleResult:
    """Best achievable slot value under the true parameters.

    Maximizes sum_f (omega * q_f - mu * L_f) * (1 - U_f) over SFC subsets with
    jointly feasible placement, minimizing the weighted latency sum within
    each subset. Deterministic: the first maximal subset in bitmask order
    wins ties.
    """
    n_sfcs = catalog.n_sfcs
    if n_sfcs > 16:
        raise SearchSpaceTooLarge(f"{n_sfcs} SFCs is past the subset budget")
    total_len = sum(len(c) for c in catalog.sfc_chain)
    if network.n_servers ** max(1, total_len) > node_budget:
        raise SearchSpaceTooLarge(
            f"{network.n_servers}^{total_len} joint assignments exceed the budget")

    sp = shortest_path_matrix(network)
    q = true_popularity(gt)
    u_true = [chain_failure_rate(catalog, gt.failure_mean, f) for f in range(n_sfcs)]
    gate = [1.0 - u for u in u_true]

    best_value = 0.0
    best_sel: tuple[int, ...] = ()
    for mask in range(1, 1 << n_sfcs):
        subset = [f for f in range(n_sfcs) if mask >> f & 1]
        base = sum(weights.omega * q[f] * gate[f] for f in subset)
        lat_weights = [weights.mu * gate[f] for f in subset]
        penalty = _joint_min_weighted_latency(network, catalog, subset, lat_weights, sp)
        if math.isinf(penalty):
            continue
        value = base - penalty
        if value > best_value:
            best_value = value
            best_sel = tuple(subset)

    standalone = {f: optimal_chain_latency(network, catalog, network.caps_array, f,
                                           node_budget)
                  for f in range(n_sfcs)}
    return OracleResult(best_latency=standalone, best_selection=best_sel,
                        best_value=float(best_value))
