"""Hot placement and selection kernels.

Everything here is written against primitive numpy arrays so the same
definitions run under numba's nopython compiler or as plain Python. numba is
used when available; set SFCBACKUP_DISABLE_NUMBA=1 before import to force the
pure-Python path (the benchmark in benchmarks/bench_kernels.py compares both).

Array conventions: residual/caps int64 (N,), demands int64 (I,), chains as a
flat int64 vnf-id vector plus (F+1,) start offsets, lat float64 (N, N) with 0
on the diagonal and +inf where no link exists. A returned latency of +inf
means the chain does not fit at the edge (cloud verdict).
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("SFCBACKUP_DISABLE_NUMBA", "").strip()
try:
    from numba import njit as _njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay runnable
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA and _flag in ("", "0")

if NUMBA_ENABLED:
    def _jit(fn):
        return _njit(cache=True)(fn)
else:
    def _jit(fn):
        return fn

# slot_decide placement modes
GREEDY = 0
FIRST_FIT = 1


def python_impl(fn):
    """The plain-Python definition behind a possibly-jitted kernel."""
    return getattr(fn, "py_func", fn)


@_jit
def greedy_chain_walk(residual, demands, chain, nbr_ids, nbr_count, lat,
                      anchor, assign_out):
    """Walk a chain from the anchor, packing the current server first.

    Consecutive occurrences stay on the current server while its effective
    residual (real residual minus this plan's own tentative consumption)
    covers the demand; otherwise the walk hops to the first direct neighbor,
    in ascending latency order, that fits. No backtracking, no multi-hop
    moves. One guard precedes the walk: when the anchor cannot hold the whole
    chain but some single server can, the chain co-locates on the tightest
    such pool (best fit), since zero latency cannot be beaten. Fills
    assign_out[:len(chain)] and returns the plan latency, or +inf when the
    walk dead-ends.
    """
    n = residual.shape[0]
    length = chain.shape[0]
    total = 0
    for j in range(length):
        total += demands[chain[j]]
    if residual[anchor] < total:
        best = -1
        for s in range(n):
            if residual[s] >= total and (best < 0 or residual[s] < residual[best]):
                best = s
        if best >= 0:
            for j in range(length):
                assign_out[j] = best
            return 0.0
    tent = np.zeros(n, dtype=np.int64)
    cur = anchor
    for j in range(length):
        need = demands[chain[j]]
        if residual[cur] - tent[cur] >= need:
            assign_out[j] = cur
            tent[cur] += need
        else:
            moved = False
            for k in range(nbr_count[cur]):
                m = nbr_ids[cur, k]
                if residual[m] - tent[m] >= need:
                    cur = m
                    assign_out[j] = m
                    tent[m] += need
                    moved = True
                    break
            if not moved:
                return np.inf
    latency = 0.0
    for j in range(1, length):
        latency += lat[assign_out[j - 1], assign_out[j]]
    return latency


@_jit
def first_fit_chain_walk(residual, demands, chain, lat, assign_out):
    """Pack the chain onto servers in index order with a forward-only pointer.

    Occurrences pile onto the current server until it cannot afford the next
    one, then the pointer advances (never wraps). Returns the plan latency or
    +inf when the scan runs off the end or crosses a missing link.
    """
    n = residual.shape[0]
    tent = np.zeros(n, dtype=np.int64)
    s = 0
    length = chain.shape[0]
    for j in range(length):
        need = demands[chain[j]]
        while s < n and residual[s] - tent[s] < need:
            s += 1
        if s >= n:
            return np.inf
        assign_out[j] = s
        tent[s] += need
    latency = 0.0
    for j in range(1, length):
        latency += lat[assign_out[j - 1], assign_out[j]]
    return latency


@_jit
def slot_decide(mode, caps, demands, chain_vnf, chain_start, nbr_ids,
                nbr_count, lat, link_u, link_v, q_est, v_est, omega, mu,
                x_out, order_out, lat_out, assign_out, residual_out):
    """One slot's full greedy selection loop.

    Repeatedly plans every not-yet-deployed chain against the current
    residual, scores each edge-feasible plan with
    (omega * q_est - mu * latency) * (1 - worst chain failure estimate),
    and commits the strictly-best positive score (ties fall to the smallest
    SFC id). Stops when nothing scores positive. mode selects the placement
    walk (GREEDY or FIRST_FIT); the greedy anchor is recomputed from the
    live residual each round. Returns the number of committed chains; x_out,
    order_out, lat_out, assign_out (padded with -1) and residual_out carry
    the decision.
    """
    n = caps.shape[0]
    n_sfcs = chain_start.shape[0] - 1
    residual_out[:] = caps
    x_out[:] = 0
    order_out[:] = -1
    lat_out[:] = np.inf
    assign_out[:, :] = -1
    max_len = assign_out.shape[1]
    scratch = np.empty(max_len, dtype=np.int64)
    best_assign = np.empty(max_len, dtype=np.int64)
    n_committed = 0
    while True:
        anchor = 0
        if mode == GREEDY:
            if link_u >= 0:
                anchor = link_u if residual_out[link_u] >= residual_out[link_v] else link_v
            else:
                best_r = residual_out[0]
                for s in range(1, n):
                    if residual_out[s] > best_r:
                        anchor = s
                        best_r = residual_out[s]
        best_f = -1
        best_score = 0.0
        best_lat = np.inf
        for f in range(n_sfcs):
            if x_out[f] == 1:
                continue
            lo = chain_start[f]
            hi = chain_start[f + 1]
            chain = chain_vnf[lo:hi]
            if mode == GREEDY:
                latency = greedy_chain_walk(residual_out, demands, chain,
                                            nbr_ids, nbr_count, lat, anchor,
                                            scratch)
            else:
                latency = first_fit_chain_walk(residual_out, demands, chain,
                                               lat, scratch)
            if latency == np.inf:
                continue
            worst = 0.0
            for j in range(hi - lo):
                rate = v_est[chain[j]]
                if rate > worst:
                    worst = rate
            gate = 1.0 - worst
            if gate <= 0.0:
                continue
            score = (omega * q_est[f] - mu * latency) * gate
            if score > best_score:
                best_f = f
                best_score = score
                best_lat = latency
                for j in range(hi - lo):
                    best_assign[j] = scratch[j]
        if best_f < 0:
            break
        lo = chain_start[best_f]
        hi = chain_start[best_f + 1]
        for j in range(hi - lo):
            residual_out[best_assign[j]] -= demands[chain_vnf[lo + j]]
            assign_out[best_f, j] = best_assign[j]
        x_out[best_f] = 1
        lat_out[best_f] = best_lat
        order_out[n_committed] = best_f
        n_committed += 1
    return n_committed


def warmup() -> None:
    """Trigger compilation on a toy instance so later calls run at full speed."""
    caps = np.array([4, 4], dtype=np.int64)
    demands = np.array([2, 2], dtype=np.int64)
    chain_vnf = np.array([0, 1], dtype=np.int64)
    chain_start = np.array([0, 2], dtype=np.int64)
    nbr_ids = np.array([[1], [0]], dtype=np.int64)
    nbr_count = np.array([1, 1], dtype=np.int64)
    lat = np.array([[0.0, 1.0], [1.0, 0.0]])
    q = np.array([1.0])
    v = np.array([0.0, 0.0])
    x = np.zeros(1, dtype=np.uint8)
    order = np.zeros(1, dtype=np.int64)
    lat_out = np.zeros(1, dtype=np.float64)
    assign = np.zeros((1, 2), dtype=np.int64)
    res = np.zeros(2, dtype=np.int64)
    for mode in (GREEDY, FIRST_FIT):
        slot_decide(mode, caps, demands, chain_vnf, chain_start, nbr_ids,
                    nbr_count, lat, 0, 1, q, v, 1.0, 1.0, x, order, lat_out,
                    assign, res)
