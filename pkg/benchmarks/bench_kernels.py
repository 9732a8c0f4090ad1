"""Time the numpy and numba kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from gbb import kernels
from gbb.arms import random_unit_arms
from gbb.graphs import make_complete, make_star


def _cases(rng):
    g = make_complete(40)
    K = 20
    values = rng.standard_normal(K * K)
    assign = rng.integers(0, K, g.n_nodes)
    noise = rng.standard_normal(g.n_edges)
    counts, sums = np.zeros(K * K), np.zeros(K * K)
    X = random_unit_arms(K, 5, 0)
    Z = np.ascontiguousarray(X.edge_arms.vectors)
    small = make_star(8)
    V = rng.standard_normal((4, 4))
    return {
        "tally_round (complete 40, K=20)":
            ("tally_round", (assign, g.heads, g.tails, K, values, noise, counts, sums)),
        "edge_gram (complete 40, d=5)":
            ("edge_gram", (Z, assign, g.heads, g.tails, K)),
        "allocation_extremes (star 8, K=4)":
            ("allocation_extremes", (V + V.T, small.heads, small.tails, small.n_nodes, 4)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.NUMBA_KERNELS:
        raise SystemExit("numba unavailable; nothing to compare")
    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':40s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for label, (name, call_args) in cases.items():
        kernels.NUMBA_KERNELS[name](*call_args)  # compile outside the timed region
        times = {}
        for backend, table in (("numpy", kernels.NUMPY_KERNELS), ("numba", kernels.NUMBA_KERNELS)):
            fn = table[name]
            timer = timeit.Timer(lambda: fn(*call_args))
            n, _ = timer.autorange()
            times[backend] = min(timer.repeat(args.repeat, n)) / n * 1e3
        print(f"{label:40s} {times['numpy']:12.4f} {times['numba']:12.4f} "
              f"{times['numpy'] / times['numba']:8.1f}x")


if __name__ == "__main__":
    main()
