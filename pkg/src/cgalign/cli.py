"""Command line interface.

Subcommands: diff (align two call graphs), eval (score a mapping report
against ground truth), ged (recompute edit cost of a reported mapping both
ways and check they agree), generate (emit synthetic graphs with truth).

Exit codes: 0 on success, 1 for usage errors, 2 for bad input data.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import bp, evaluation, matchers, nap, similarity, synthetic
from .errors import DataError
from .graphs import CallGraph, load_call_graph, save_call_graph, validate_pair

GED_AGREEMENT_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; we reserve 2 for data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(1)


def _add_cost_flags(sub):
    sub.add_argument("--sparsity", type=float, default=0.0,
                     help="fraction of lowest-similarity pairs to prune (default 0)")
    sub.add_argument("--d-node", type=float, default=0.5,
                     help="cost of deleting or inserting a function (default 0.5)")
    sub.add_argument("--d-edge", type=float, default=0.5,
                     help="cost of deleting or inserting a call (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cgalign",
                     description="Align functions of two call graphs")
    commands = parser.add_subparsers(dest="command", required=True)

    diff = commands.add_parser("diff", help="compute a function mapping")
    diff.add_argument("graph_a")
    diff.add_argument("graph_b")
    _add_cost_flags(diff)
    diff.add_argument("--alpha", type=float, default=0.75,
                      help="trade-off between function and call similarity (default 0.75)")
    diff.add_argument("--epsilon", type=float, default=0.5,
                      help="belief propagation slack penalty (default 0.5)")
    diff.add_argument("--max-iters", type=int, default=1000)
    diff.add_argument("--damping", type=float, default=0.0)
    diff.add_argument("--matcher", choices=("nap", "mwm", "mcs"), default="nap")
    diff.add_argument("--k", type=int, default=2,
                      help="neighborhood radius for the mcs matcher (default 2)")
    diff.add_argument("--threads", type=int, default=1)
    diff.add_argument("--output", help="write the mapping report to this file")
    diff.add_argument("--json", action="store_true",
                      help="print the report as JSON on stdout")
    diff.set_defaults(func=cmd_diff)

    evl = commands.add_parser("eval", help="score a mapping report against truth")
    evl.add_argument("report")
    evl.add_argument("truth")
    evl.add_argument("--program-a", help="graph file to resolve report keys against")
    evl.add_argument("--program-b")
    evl.add_argument("--json", action="store_true")
    evl.set_defaults(func=cmd_eval)

    ged = commands.add_parser("ged", help="recompute the edit cost of a report")
    ged.add_argument("graph_a")
    ged.add_argument("graph_b")
    ged.add_argument("report")
    _add_cost_flags(ged)
    ged.add_argument("--json", action="store_true")
    ged.set_defaults(func=cmd_ged)

    gen = commands.add_parser("generate", help="emit synthetic graphs with truth")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--density", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--templates", type=int, default=None,
                     help="size of the feature template pool (default n // 4)")
    gen.add_argument("--out", required=True, help="path for the base graph")
    gen.add_argument("--mutate",
                     help="comma list like insert=2,delete=1,perturb=3,rewire=2")
    gen.add_argument("--out-b", help="path for the mutated graph")
    gen.add_argument("--out-truth", help="path for the ground truth")
    gen.set_defaults(func=cmd_generate)
    return parser


def _load_report(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except FileNotFoundError:
        raise DataError("no such file: %s" % path)
    except json.JSONDecodeError as exc:
        raise DataError("%s: not valid JSON (%s)" % (path, exc))
    if not isinstance(doc, dict) or not isinstance(doc.get("matched"), list):
        raise DataError("%s: not a mapping report (missing 'matched')" % path)
    return doc


def _key_to_id(key, graph: CallGraph, side: str) -> int:
    if isinstance(key, bool) or not isinstance(key, (int, str)):
        raise DataError("bad function key %r for %s" % (key, side))
    if isinstance(key, int):
        if not 0 <= key < graph.n:
            raise DataError("function index %d out of range for %s" % (key, side))
        return key
    for node in graph.nodes:
        if node.name == key:
            return node.id
    raise DataError("function %r not found in %s" % (key, side))


def _solve(args, sim, a: CallGraph, b: CallGraph):
    problem = nap.build_problem(sim, a, b, alpha=args.alpha,
                                d_node=args.d_node, d_edge=args.d_edge)
    if args.matcher == "mwm":
        mapping = matchers.solve_mwm(matchers.node_weight_map(problem))
        iterations, converged = 0, True
    elif args.matcher == "mcs":
        mapping = matchers.solve_mcs_greedy(problem, a, b, k=args.k)
        iterations, converged = 0, True
    else:
        config = bp.BpConfig(epsilon=args.epsilon, max_iterations=args.max_iters,
                             damping=args.damping, threads=args.threads)
        mapping, diag = bp.solve_nap(problem, config)
        iterations, converged = diag.iterations, diag.converged
    return problem, mapping, iterations, converged


def cmd_diff(args) -> int:
    a = load_call_graph(args.graph_a)
    b = load_call_graph(args.graph_b)
    validate_pair(a, b)
    sim_config = similarity.SimilarityConfig(sparsity_ratio=args.sparsity)
    sim = similarity.build_similarity_matrix(a, b, sim_config)
    problem, mapping, iterations, converged = _solve(args, sim, a, b)

    matched = sorted(mapping.pairs)
    matched_rows = {i for i, _ in matched}
    matched_cols = {j for _, j in matched}
    report = {
        "program_a": a.name,
        "program_b": b.name,
        "settings": {
            "matcher": args.matcher, "alpha": args.alpha, "epsilon": args.epsilon,
            "sparsity": args.sparsity, "d_node": args.d_node, "d_edge": args.d_edge,
            "max_iters": args.max_iters, "damping": args.damping, "k": args.k,
        },
        "matched": [[a.key_of(i), b.key_of(j), sim.get(i, j)] for i, j in matched],
        "unmatched_a": [a.key_of(i) for i in range(a.n) if i not in matched_rows],
        "unmatched_b": [b.key_of(j) for j in range(b.n) if j not in matched_cols],
        "objective": nap.nap_objective(problem, mapping),
        "ged": nap.ged_cost_direct(a, b, mapping, sim,
                                   d_node=args.d_node, d_edge=args.d_edge),
        "squares": nap.count_squares(problem, mapping),
        "iterations": iterations,
        "converged": converged,
    }
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2, sort_keys=True)
            handle.write("\n")
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("matched %d of %d x %d functions; objective %.6f, ged %.6f, "
              "squares %d, iterations %d%s"
              % (len(matched), a.n, b.n, report["objective"], report["ged"],
                 report["squares"], iterations,
                 "" if converged else " (not converged)"))
    return 0


def cmd_eval(args) -> int:
    doc = _load_report(args.report)
    truth = evaluation.load_ground_truth(args.truth)
    predicted = set()
    for index, entry in enumerate(doc["matched"]):
        if not isinstance(entry, list) or len(entry) < 2:
            raise DataError("%s: matched[%d] must be [key_a, key_b, ...]"
                            % (args.report, index))
        predicted.add((entry[0], entry[1]))
    truth_pairs = set(truth.pairs)
    if args.program_a and args.program_b:
        a = load_call_graph(args.program_a)
        b = load_call_graph(args.program_b)
        predicted = {(a.key_of(_key_to_id(ka, a, "program A")),
                      b.key_of(_key_to_id(kb, b, "program B")))
                     for ka, kb in predicted}
        truth_pairs = {(a.key_of(_key_to_id(ka, a, "program A")),
                        b.key_of(_key_to_id(kb, b, "program B")))
                       for ka, kb in truth_pairs}
    report = evaluation.score(predicted, truth_pairs)
    payload = {
        "n_predicted": report.n_predicted, "n_truth": report.n_truth,
        "n_common": report.n_common,
        "precision": report.precision, "recall": report.recall,
        "swapped_precision": report.swapped_precision,
        "swapped_recall": report.swapped_recall, "f1": report.f1,
    }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("common %d of %d predicted / %d truth" % (report.n_common,
                                                        report.n_predicted,
                                                        report.n_truth))
        print("precision %.4f  recall %.4f  f1 %.4f"
              % (report.precision, report.recall, report.f1))
        print("swapped convention: precision %.4f  recall %.4f"
              % (report.swapped_precision, report.swapped_recall))
    return 0


def cmd_ged(args) -> int:
    a = load_call_graph(args.graph_a)
    b = load_call_graph(args.graph_b)
    validate_pair(a, b)
    doc = _load_report(args.report)
    pairs = []
    for index, entry in enumerate(doc["matched"]):
        if not isinstance(entry, list) or len(entry) < 2:
            raise DataError("%s: matched[%d] must be [key_a, key_b, ...]"
                            % (args.report, index))
        pairs.append((_key_to_id(entry[0], a, "program A"),
                      _key_to_id(entry[1], b, "program B")))
    mapping = nap.Mapping.from_pairs(pairs)
    sim_config = similarity.SimilarityConfig(sparsity_ratio=args.sparsity)
    sim = similarity.build_similarity_matrix(a, b, sim_config)
    direct = nap.ged_cost_direct(a, b, mapping, sim,
                                 d_node=args.d_node, d_edge=args.d_edge)
    editpath = nap.ged_cost_editpath(a, b, mapping, sim,
                                     d_node=args.d_node, d_edge=args.d_edge)
    gap = abs(direct - editpath)
    if args.json:
        print(json.dumps({"ged_direct": direct, "ged_editpath": editpath,
                          "difference": gap}, indent=2, sort_keys=True))
    else:
        print("ged direct    %.9f" % direct)
        print("ged edit path %.9f" % editpath)
    if gap > GED_AGREEMENT_TOL:
        sys.stderr.write("cost routes disagree by %g\n" % gap)
        return 2
    return 0


def _parse_mutation(text: str) -> synthetic.MutationSpec:
    values = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise DataError("bad mutation term %r (expected key=value)" % part)
        key, _, raw = part.partition("=")
        if key not in ("insert", "delete", "perturb", "rewire", "noise"):
            raise DataError("unknown mutation key %r" % key)
        try:
            values[key] = int(raw)
        except ValueError:
            raise DataError("mutation value for %r must be an integer" % key)
    try:
        return synthetic.MutationSpec(**values)
    except ValueError as exc:
        raise DataError(str(exc))


def cmd_generate(args) -> int:
    try:
        graph = synthetic.generate_graph(args.n, edge_density=args.density,
                                         seed=args.seed, templates=args.templates)
    except ValueError as exc:
        raise DataError(str(exc))
    save_call_graph(graph, args.out)
    outputs = [args.out]
    if args.mutate is not None:
        if not args.out_b or not args.out_truth:
            raise DataError("--mutate requires --out-b and --out-truth")
        spec = _parse_mutation(args.mutate)
        try:
            mutated, truth = synthetic.mutate(graph, spec, seed=args.seed + 1)
        except ValueError as exc:
            raise DataError(str(exc))
        save_call_graph(mutated, args.out_b)
        evaluation.save_ground_truth(truth, args.out_truth)
        outputs += [args.out_b, args.out_truth]
    print("wrote " + ", ".join(outputs))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
