#!/usr/bin/env python3
"""Prefactor-vs-solve amortization timings across icosphere sizes.

Builds the solver once per mesh, then times single-source distance queries;
the build/query ratio is the payoff of reusing the Cholesky factors.
"""

import argparse
import time

import numpy as np

from heatdist import heat, sparse
from heatdist.mesh import icosphere


def bench(level, queries, seed):
    mesh = icosphere(level)
    rng = np.random.default_rng(seed)
    sources = rng.integers(mesh.num_vertices, size=queries)

    sparse.reset_counters()
    t0 = time.perf_counter()
    solver = heat.build_solver(mesh)
    build = time.perf_counter() - t0

    heat.geodesic_distance(solver, [int(sources[0])])  # warmup, discarded
    sparse.reset_counters()
    times = []
    for s in sources:
        t0 = time.perf_counter()
        heat.geodesic_distance(solver, [int(s)])
        times.append(time.perf_counter() - t0)
    assert sparse.counter_snapshot()["factorizations"] == 0
    return mesh, build, float(np.median(times))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", default="4,5,6")
    ap.add_argument("-k", "--queries", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sparse.warm_up_kernels()
    print(f"{'level':>6} {'vertices':>9} {'build (s)':>10} {'query (s)':>10} {'ratio':>7}")
    for level in (int(v) for v in args.levels.split(",")):
        mesh, build, query = bench(level, args.queries, args.seed)
        print(
            f"{level:>6} {mesh.num_vertices:>9} {build:10.3f} {query:10.4f} "
            f"{build / query:6.0f}x"
        )


if __name__ == "__main__":
    main()
