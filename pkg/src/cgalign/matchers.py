"""Baseline matchers: exact linear matching, greedy structural matching,
and exhaustive search for tiny instances.
"""

from __future__ import annotations

import heapq
from math import comb, factorial
from typing import Dict, List, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import SearchSpaceError
from .graphs import CallGraph
from .nap import Mapping, NapProblem

BRUTE_FORCE_LIMIT = 10_000_000  # refuse to enumerate more mappings than this


def solve_mwm(weights: Dict[Tuple[int, int], float]) -> Mapping:
    """Exact maximum-weight bipartite matching over a sparse weight map.

    Pairs with non-positive weight are never matched; rows or columns whose
    available weights are all non-positive stay unmatched.
    """
    if not weights:
        return Mapping.empty()
    items = sorted(weights.items())
    rows = sorted({i for (i, _), _ in items})
    cols = sorted({j for (_, j), _ in items})
    row_pos = {i: k for k, i in enumerate(rows)}
    col_pos = {j: k for k, j in enumerate(cols)}
    dense = np.zeros((len(rows), len(cols)))
    for (i, j), w in items:
        # clamp: taking a non-positive pair is never better than skipping it,
        # and a negative cell could otherwise force a worse assignment
        dense[row_pos[i], col_pos[j]] = max(w, 0.0)
    sel_r, sel_c = linear_sum_assignment(dense, maximize=True)
    pairs = []
    for r, c in zip(sel_r.tolist(), sel_c.tolist()):
        pair = (rows[r], cols[c])
        if weights.get(pair, 0.0) > 0.0:
            pairs.append(pair)
    return Mapping.from_pairs(pairs)


def node_weight_map(problem: NapProblem) -> Dict[Tuple[int, int], float]:
    return {(int(i), int(j)): float(w)
            for i, j, w in zip(problem.cand_rows, problem.cand_cols,
                               problem.node_weights)}


def _k_hop(adjacency: List[List[int]], start: int, k: int) -> List[int]:
    """Nodes within undirected distance 1..k of start, ascending."""
    seen = {start}
    frontier = [start]
    reached = set()
    for _ in range(k):
        nxt = []
        for node in frontier:
            for other in adjacency[node]:
                if other not in seen:
                    seen.add(other)
                    reached.add(other)
                    nxt.append(other)
        frontier = nxt
    return sorted(reached)


def solve_mcs_greedy(problem: NapProblem, a: CallGraph, b: CallGraph,
                     k: int = 2) -> Mapping:
    """Greedy common-structure matcher.

    Seeds on the best-weight candidate whose endpoints both have at least
    one call edge, then repeatedly matches the best candidate within the
    k-hop undirected neighborhoods of an already matched pair; when the
    frontier empties it restarts from the best remaining seed.  Leftover
    rows and columns are finished with an exact linear matching, so on
    graphs without edges this degenerates to plain maximum-weight matching.
    Ties are broken toward lexicographically smaller pairs throughout.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n_cand = problem.n_candidates
    if n_cand == 0:
        return Mapping.empty()
    rows, cols, w = problem.cand_rows, problem.cand_cols, problem.node_weights
    adj_a = a.undirected_adjacency()
    adj_b = b.undirected_adjacency()
    deg_a = np.array([len(x) for x in adj_a], dtype=np.int64)
    deg_b = np.array([len(x) for x in adj_b], dtype=np.int64)
    eligible = (w > 0.0) & (deg_a[rows] > 0) & (deg_b[cols] > 0)
    seed_order = np.lexsort((cols, rows, -w))
    seeds = seed_order[eligible[seed_order]]

    row_taken = np.zeros(problem.n_a, dtype=bool)
    col_taken = np.zeros(problem.n_b, dtype=bool)
    matched: List[Tuple[int, int]] = []
    hood_a: Dict[int, List[int]] = {}
    hood_b: Dict[int, List[int]] = {}
    frontier: List[Tuple[float, int, int, int]] = []

    def take(cand: int):
        i, j = int(rows[cand]), int(cols[cand])
        row_taken[i] = True
        col_taken[j] = True
        matched.append((i, j))
        if i not in hood_a:
            hood_a[i] = _k_hop(adj_a, i, k)
        if j not in hood_b:
            hood_b[j] = _k_hop(adj_b, j, k)
        for u in hood_a[i]:
            if row_taken[u]:
                continue
            for v in hood_b[j]:
                if col_taken[v]:
                    continue
                c = problem.candidate_index(u, v)
                if c >= 0 and w[c] > 0.0:
                    heapq.heappush(frontier, (-float(w[c]), u, v, c))

    ptr = 0
    while ptr < len(seeds):
        seed = int(seeds[ptr])
        ptr += 1
        if row_taken[rows[seed]] or col_taken[cols[seed]]:
            continue
        take(seed)
        while frontier:
            _, u, v, c = heapq.heappop(frontier)
            if row_taken[u] or col_taken[v]:
                continue
            take(c)

    leftovers = {}
    for c in range(n_cand):
        if w[c] > 0.0 and not row_taken[rows[c]] and not col_taken[cols[c]]:
            leftovers[(int(rows[c]), int(cols[c]))] = float(w[c])
    if leftovers:
        matched.extend(solve_mwm(leftovers).pairs)
    return Mapping.from_pairs(matched)


def _mapping_space(n_a: int, n_b: int) -> int:
    return sum(comb(n_a, size) * comb(n_b, size) * factorial(size)
               for size in range(min(n_a, n_b) + 1))


def brute_force_optimum(problem: NapProblem) -> Tuple[Mapping, float]:
    """Exhaustively maximize the alignment objective.

    Only meant for tiny instances; refuses when the number of one-to-one
    mappings between the two node sets exceeds BRUTE_FORCE_LIMIT.  Value
    ties are resolved toward the lexicographically smallest pair set.
    """
    space = _mapping_space(problem.n_a, problem.n_b)
    if space > BRUTE_FORCE_LIMIT:
        raise SearchSpaceError(
            "%d x %d nodes span %d mappings, over the limit of %d"
            % (problem.n_a, problem.n_b, space, BRUTE_FORCE_LIMIT))

    rows, cols = problem.cand_rows, problem.cand_cols
    alpha = problem.alpha
    node_gain = alpha * problem.node_weights
    link_gain = (1.0 - alpha) * problem.link_w
    neighbors: List[List[Tuple[int, float]]] = [[] for _ in range(problem.n_candidates)]
    for u, v, lw in zip(problem.link_u.tolist(), problem.link_v.tolist(),
                        link_gain.tolist()):
        neighbors[u].append((v, lw))
        neighbors[v].append((u, lw))

    by_row: Dict[int, List[int]] = {}
    for c in range(problem.n_candidates):
        by_row.setdefault(int(rows[c]), []).append(c)
    row_list = sorted(by_row)

    best_value = 0.0
    best_pairs: Tuple[Tuple[int, int], ...] = ()
    chosen: List[int] = []
    in_set = [False] * problem.n_candidates
    col_used = [False] * max(problem.n_b, 1)

    def consider(value: float):
        nonlocal best_value, best_pairs
        pairs = tuple(sorted((int(rows[c]), int(cols[c])) for c in chosen))
        if value > best_value or (value == best_value and pairs < best_pairs):
            best_value = value
            best_pairs = pairs

    def recurse(depth: int, value: float):
        if depth == len(row_list):
            consider(value)
            return
        recurse(depth + 1, value)  # leave this row unmatched
        for c in by_row[row_list[depth]]:
            j = int(cols[c])
            if col_used[j]:
                continue
            gain = node_gain[c] + sum(lw for other, lw in neighbors[c] if in_set[other])
            col_used[j] = True
            in_set[c] = True
            chosen.append(c)
            recurse(depth + 1, value + gain)
            chosen.pop()
            in_set[c] = False
            col_used[j] = False

    recurse(0, 0.0)
    return Mapping.from_pairs(best_pairs), best_value
