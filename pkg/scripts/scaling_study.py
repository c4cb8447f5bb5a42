"""Per-iteration operation count versus problem size.

Self-diffs a ladder of generated graphs whose expected degree stays
constant, so the combined number of candidates and squares grows roughly
quadratically with n, and fits a power law to the measured per-iteration
operation counts.  A slope near 1.0 on the log-log fit means the solver
does linear work per iteration in the problem size.
"""

import argparse
import sys
import time

import numpy as np

import cgalign as cg
from cgalign.bp import bp_iterate, init_state


def measure(n, degree):
    graph = cg.generate_graph(n, edge_density=min(0.9, degree / (n - 1)),
                              seed=n, name="g")
    sim = cg.build_similarity_matrix(graph, graph, cg.SimilarityConfig())
    problem = cg.build_problem(sim, graph, graph)
    config = cg.BpConfig()
    state = init_state(problem, config)
    tick = time.perf_counter()
    bp_iterate(problem, state, config)
    elapsed = time.perf_counter() - tick
    return problem.n_candidates + problem.n_squares, state.ops_last, elapsed


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="16,26,42,68,110,180,290,470",
                        help="comma list of graph sizes")
    parser.add_argument("--degree", type=float, default=2.0,
                        help="expected out-degree of generated graphs")
    args = parser.parse_args(argv)

    sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    if any(n < 2 for n in sizes):
        parser.error("sizes must be at least 2")
    nnz_values, ops_values = [], []
    print("     n        nnz         ops    seconds")
    for n in sizes:
        nnz, ops, elapsed = measure(n, args.degree)
        nnz_values.append(nnz)
        ops_values.append(ops)
        print("%6d  %9d  %10d  %9.4f" % (n, nnz, ops, elapsed))

    x = np.log(nnz_values)
    y = np.log(ops_values)
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ np.array([slope, intercept])
    r_squared = 1 - np.sum((y - fitted) ** 2) / np.sum((y - np.mean(y)) ** 2)
    print("log-log fit: slope %.4f, R^2 %.6f" % (slope, r_squared))
    return 0


if __name__ == "__main__":
    sys.exit(main())
