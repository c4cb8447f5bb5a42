"""Effect of the candidate pruning ratio on memory, speed, and recall.

Builds one mutated pair, then solves it at several pruning ratios and
reports the message memory footprint, the measured per-iteration time,
and recall against the generator's ground truth.
"""

import argparse
import sys
import time

import cgalign as cg
from cgalign.bp import bp_iterate, init_state


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--density", type=float, default=0.03)
    parser.add_argument("--seed", type=int, default=301)
    parser.add_argument("--perturb", type=int, default=10)
    parser.add_argument("--noise", type=int, default=40)
    parser.add_argument("--timing-iters", type=int, default=20,
                        help="iterations to average for the per-iteration time")
    parser.add_argument("--ratios", default="0,0.3,0.6,0.9",
                        help="comma list of pruning ratios")
    args = parser.parse_args(argv)

    base = cg.generate_graph(args.n, edge_density=args.density, seed=args.seed,
                             name="orig")
    spec = cg.MutationSpec(perturb=args.perturb,
                           rewire=int(0.10 * len(base.edges)), noise=args.noise)
    mutated, truth = cg.mutate(base, spec, seed=args.seed + 600)

    print("ratio  candidates  squares   memory(B)   s/iter   recall  iters")
    for ratio in (float(x) for x in args.ratios.split(",") if x.strip()):
        sim = cg.build_similarity_matrix(
            base, mutated, cg.SimilarityConfig(sparsity_ratio=ratio))
        problem = cg.build_problem(sim, base, mutated)
        config = cg.BpConfig()

        state = init_state(problem, config)
        memory = state.message_memory_bytes()
        tick = time.perf_counter()
        for _ in range(args.timing_iters):
            bp_iterate(problem, state, config)
        per_iteration = (time.perf_counter() - tick) / args.timing_iters

        mapping, diag = cg.solve_nap(problem, config)
        recall = cg.score(cg.mapping_to_keys(mapping, base, mutated), truth).recall
        print("%5.2f  %10d  %7d  %10d  %7.4f  %7.4f  %5d"
              % (ratio, problem.n_candidates, problem.n_squares, memory,
                 per_iteration, recall, diag.iterations))
    return 0


if __name__ == "__main__":
    sys.exit(main())
