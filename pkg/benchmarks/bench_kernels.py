"""Benchmark the placement/selection kernels: numba against the pure-Python path.

Runs the bundled six-server instance through the chain walks and the full
slot-decision loop, timing the jitted kernels and their .py_func twins.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --rounds 2000 --output bench.json
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from sfcbackup import cheapest_link_anchor, default_config_path, load_config
from sfcbackup import kernels


def bench(fn, args, rounds: int) -> float:
    """Median-of-5 wall time per call, in microseconds."""
    samples = []
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(rounds):
            fn(*args)
        samples.append((time.perf_counter() - t0) / rounds * 1e6)
    samples.sort()
    return samples[2]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rounds", type=int, default=5000,
                        help="calls per timing sample (default 5000)")
    parser.add_argument("--output", help="also dump results to this JSON file")
    args = parser.parse_args()

    cfg = load_config(default_config_path())
    net, cat = cfg.network, cfg.catalog
    caps = net.caps_array
    demands = cat.demand_array
    chain_vnf, chain_start = cat.chain_arrays
    nbr_ids, nbr_count = net.neighbor_table
    lat = net.latency_matrix
    link_u, link_v = net.cheapest_link
    anchor = cheapest_link_anchor(net, caps)
    longest = max(range(cat.n_sfcs), key=lambda f: len(cat.sfc_chain[f]))
    chain = np.asarray(cat.sfc_chain[longest], dtype=np.int64)
    assign = np.empty(len(chain), dtype=np.int64)

    n_sfcs = cat.n_sfcs
    max_len = cat.max_chain_len
    q_est = np.array([9.0, 8.0, 7.0, 5.5, 4.5, 3.5])
    v_est = np.zeros(cat.n_vnfs)
    x = np.zeros(n_sfcs, dtype=np.uint8)
    order = np.zeros(n_sfcs, dtype=np.int64)
    lat_out = np.zeros(n_sfcs, dtype=np.float64)
    assign_out = np.zeros((n_sfcs, max_len), dtype=np.int64)
    residual = np.zeros(net.n_servers, dtype=np.int64)

    cases = {
        "greedy_chain_walk": (kernels.greedy_chain_walk,
                              (caps, demands, chain, nbr_ids, nbr_count, lat, anchor, assign)),
        "first_fit_chain_walk": (kernels.first_fit_chain_walk,
                                 (caps, demands, chain, lat, assign)),
        "slot_decide[greedy]": (kernels.slot_decide,
                                (kernels.GREEDY, caps, demands, chain_vnf, chain_start,
                                 nbr_ids, nbr_count, lat, link_u, link_v, q_est, v_est,
                                 1.0, 1.0, x, order, lat_out, assign_out, residual)),
        "slot_decide[first_fit]": (kernels.slot_decide,
                                   (kernels.FIRST_FIT, caps, demands, chain_vnf, chain_start,
                                    nbr_ids, nbr_count, lat, link_u, link_v, q_est, v_est,
                                    1.0, 1.0, x, order, lat_out, assign_out, residual)),
    }

    if kernels.NUMBA_ENABLED:
        kernels.warmup()
        for fn, fargs in cases.values():
            fn(*fargs)
    else:
        print("numba disabled (SFCBACKUP_DISABLE_NUMBA or missing install); "
              "timing the pure-Python path only\n")

    results = {}
    print(f"{'kernel':<26} {'python us':>12} {'numba us':>12} {'speedup':>9}")
    for name, (fn, fargs) in cases.items():
        py = bench(kernels.python_impl(fn), fargs, max(1, args.rounds // 10))
        if kernels.NUMBA_ENABLED:
            jit = bench(fn, fargs, args.rounds)
            print(f"{name:<26} {py:>12.2f} {jit:>12.2f} {py / jit:>8.1f}x")
            results[name] = {"python_us": py, "numba_us": jit, "speedup": py / jit}
        else:
            print(f"{name:<26} {py:>12.2f} {'-':>12} {'-':>9}")
            results[name] = {"python_us": py}

    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump({"numba_enabled": kernels.NUMBA_ENABLED, "results": results},
                      fh, indent=2)
        print(f"\nwrote {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
