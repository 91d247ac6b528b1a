"""Online estimators for SFC popularity and VNF failure rates.

Both learners keep exact integer-valued running totals next to the derived
means, so an offline replay of a trace reproduces the state bit-for-bit.
Estimates carry UCB-style exploration bonuses scaled by sqrt(3 ln t / (2 n)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .workload import SlotObservation


@dataclass(eq=False)
class PopularityLearner:
    """Per-SFC request-count estimator.

    selected[f] counts the slots where SFC f was backed up, request_mean[f]
    averages the observed request counts over exactly those slots, and
    request_ucb holds the estimate vector most recently used for selection.
    """

    users: int
    selected: np.ndarray
    request_total: np.ndarray
    request_mean: np.ndarray
    request_ucb: np.ndarray


@dataclass(eq=False)
class FailureLearner:
    """Per-VNF failure-rate estimator.

    placements[i] counts deployed copies of VNF i (a slot placing several
    copies adds all of them); failure_mean[i] divides the once-per-slot
    failure flags by that count. The exploration bonus direction and scale
    are configurable: sign +1 with scale = number of users is the default,
    sign -1 treats unexplored VNFs optimistically.
    """

    placements: np.ndarray
    failure_total: np.ndarray
    failure_mean: np.ndarray
    failure_ucb: np.ndarray
    bonus_scale: float
    bonus_sign: int


def init_learners(obs0: SlotObservation, users: int, *,
                  failure_bonus_scale: float | None = None,
                  failure_bonus_sign: int = 1) -> tuple[PopularityLearner, FailureLearner]:
    """Slot-0 initialization: zero counts, estimate snapshots seeded from obs0."""
    n_sfcs = obs0.requests.shape[0]
    n_vnfs = obs0.vnf_failed.shape[0]
    if failure_bonus_scale is None:
        failure_bonus_scale = float(users)
    pop = PopularityLearner(
        users=int(users),
        selected=np.zeros(n_sfcs, dtype=np.int64),
        request_total=np.zeros(n_sfcs, dtype=np.float64),
        request_mean=np.zeros(n_sfcs, dtype=np.float64),
        request_ucb=obs0.requests.astype(np.float64),
    )
    fail = FailureLearner(
        placements=np.zeros(n_vnfs, dtype=np.int64),
        failure_total=np.zeros(n_vnfs, dtype=np.float64),
        failure_mean=np.zeros(n_vnfs, dtype=np.float64),
        failure_ucb=obs0.vnf_failed.astype(np.float64),
        bonus_scale=float(failure_bonus_scale),
        bonus_sign=int(failure_bonus_sign),
    )
    return pop, fail


def popularity_update(learner: PopularityLearner, obs: SlotObservation,
                      deployed) -> None:
    """Fold obs into every arm flagged in ``deployed`` (the slot's backup vector)."""
    sel = np.asarray(deployed).astype(bool)
    learner.selected[sel] += 1
    learner.request_total[sel] += obs.requests[sel]
    learner.request_mean[sel] = learner.request_total[sel] / learner.selected[sel]


def popularity_estimate(learner: PopularityLearner, t: int) -> np.ndarray:
    """Optimistic request-count estimates at slot t; +inf forces a first pull."""
    if t < 1:
        raise ValueError("estimates are defined for t >= 1")
    est = np.full(learner.selected.shape, math.inf, dtype=np.float64)
    explored = learner.selected > 0
    c = learner.selected[explored]
    bonus = learner.users * np.sqrt(3.0 * math.log(t) / (2.0 * c))
    est[explored] = learner.request_mean[explored] + bonus
    return est


def failure_update(learner: FailureLearner, obs: SlotObservation,
                   placed) -> None:
    """Fold obs into every VNF with placed copies this slot.

    placed[i] is the copy count (may exceed 1); the observed failure flag is
    added once per slot regardless of how many copies went out.
    """
    placed = np.asarray(placed, dtype=np.int64)
    m = placed > 0
    learner.placements[m] += placed[m]
    learner.failure_total[m] += obs.vnf_failed[m]
    learner.failure_mean[m] = learner.failure_total[m] / learner.placements[m]


def failure_estimate(learner: FailureLearner, t: int) -> np.ndarray:
    """Failure-rate estimates at slot t, clamped to [0, 1]; unexplored VNFs report 0."""
    if t < 1:
        raise ValueError("estimates are defined for t >= 1")
    est = np.zeros(learner.placements.shape, dtype=np.float64)
    explored = learner.placements > 0
    h = learner.placements[explored]
    bonus = learner.bonus_scale * np.sqrt(3.0 * math.log(t) / (2.0 * h))
    est[explored] = np.clip(learner.failure_mean[explored] + learner.bonus_sign * bonus,
                            0.0, 1.0)
    return est


def chain_failure_rate(catalog, rates, f: int) -> float:
    """A chain is only as reliable as its worst VNF: max rate over f's occurrences."""
    rates = np.asarray(rates, dtype=np.float64)
    chain = catalog.sfc_chain[f]
    return float(max(rates[i] for i in chain))
