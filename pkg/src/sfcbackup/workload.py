"""Stationary request and failure processes.

Each slot draws from its own counter-based RNG stream (Philox keyed by the
run seed, counter set from the slot index), so the observation at slot t
depends only on (seed, t). Policies never consume environment randomness;
policy-side draws use a separate key domain. A given seed therefore produces
the identical observation sequence no matter which or how many policies run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Key domains keep environment draws and policy draws on disjoint streams.
ENV_DOMAIN = 0
POLICY_DOMAIN = 1


@dataclass(eq=False)
class GroundTruth:
    """Hidden stationary parameters the learners estimate.

    request_prob[k, f] is user k's per-slot probability of requesting SFC f;
    failure_mean[i] is VNF i's per-slot failure probability.
    """

    request_prob: np.ndarray
    failure_mean: np.ndarray
    rng_seed: int

    def __init__(self, request_prob, failure_mean, rng_seed: int) -> None:
        self.request_prob = np.atleast_2d(np.asarray(request_prob, dtype=np.float64))
        self.failure_mean = np.asarray(failure_mean, dtype=np.float64)
        self.rng_seed = int(rng_seed)
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be nonnegative")
        for name, arr in (("request_prob", self.request_prob), ("failure_mean", self.failure_mean)):
            if arr.size and (np.min(arr) < 0.0 or np.max(arr) > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")

    @property
    def n_users(self) -> int:
        return self.request_prob.shape[0]

    @property
    def n_sfcs(self) -> int:
        return self.request_prob.shape[1]

    @property
    def n_vnfs(self) -> int:
        return self.failure_mean.shape[0]


@dataclass(eq=False)
class SlotObservation:
    """What slot t actually produced: request counts per SFC, failure flags per VNF."""

    t: int
    requests: np.ndarray      # (F,) int64, each in [0, K]
    vnf_failed: np.ndarray    # (I,) uint8


def make_ground_truth(request_prob, failure_mean, users: int, n_sfcs: int,
                      rng_seed: int) -> GroundTruth:
    """Build a GroundTruth from a scalar, per-SFC vector, or full (K, F) matrix.

    A scalar applies to every (user, SFC) pair; a length-F vector gives every
    user the same per-SFC probability; a matrix is taken as-is and must match
    (users, n_sfcs).
    """
    p = np.asarray(request_prob, dtype=np.float64)
    if p.ndim == 0:
        p = np.full((users, n_sfcs), float(p))
    elif p.ndim == 1:
        if p.shape[0] != n_sfcs:
            raise ValueError(f"per-SFC request_prob needs {n_sfcs} entries, got {p.shape[0]}")
        p = np.tile(p, (users, 1))
    elif p.ndim == 2:
        if p.shape != (users, n_sfcs):
            raise ValueError(f"request_prob matrix must be ({users}, {n_sfcs}), got {p.shape}")
    else:
        raise ValueError("request_prob must be scalar, vector, or matrix")
    return GroundTruth(p, failure_mean, rng_seed)


def slot_stream(seed: int, t: int, domain: int = ENV_DOMAIN) -> np.random.Generator:
    """Independent generator for (seed, t, domain); construction order never matters."""
    bitgen = np.random.Philox(key=[np.uint64(seed), np.uint64(domain)],
                              counter=[np.uint64(t), 0, 0, 0])
    return np.random.Generator(bitgen)


def sample_slot(gt: GroundTruth, t: int) -> SlotObservation:
    """Draw slot t's observation. Pure in (gt parameters, seed, t)."""
    rng = slot_stream(gt.rng_seed, t, ENV_DOMAIN)
    # Fixed draw order: the request block first, then failure flags.
    u = rng.random(gt.request_prob.shape)
    requests = (u < gt.request_prob).sum(axis=0, dtype=np.int64)
    fu = rng.random(gt.failure_mean.shape)
    vnf_failed = (fu < gt.failure_mean).astype(np.uint8)
    return SlotObservation(t=int(t), requests=requests, vnf_failed=vnf_failed)


def true_popularity(gt: GroundTruth) -> np.ndarray:
    """Expected per-slot request count per SFC: column sums of request_prob."""
    return gt.request_prob.sum(axis=0)
