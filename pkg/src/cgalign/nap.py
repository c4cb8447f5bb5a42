"""Network alignment objective and its graph edit cost counterpart.

A mapping between the functions of two call graphs can be scored two ways:

* as a network alignment value: sum of node weights of matched pairs plus
  the weights of all "squares" (pairs of call edges whose endpoints are
  matched to each other), with a trade-off factor alpha between the parts;
* as the cost of the edit path it induces: edit matched functions, delete
  or insert everything unmatched, and likewise for calls.

With node weights w = s + 2*d_node - 1 and square weights 2*d_edge the two
views are equivalent up to the constant cost of the empty mapping, which is
what makes maximizing the alignment value the same as minimizing edit cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .errors import MappingError
from .graphs import CallGraph
from .similarity import SimilarityMatrix


@dataclass(frozen=True)
class Mapping:
    """One-to-one partial matching between functions of two programs."""

    pairs: frozenset  # of (i, j) int pairs

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]]) -> "Mapping":
        pairs = frozenset((int(i), int(j)) for i, j in pairs)
        rows = [i for i, _ in pairs]
        cols = [j for _, j in pairs]
        if len(set(rows)) != len(pairs) or len(set(cols)) != len(pairs):
            raise MappingError("one-to-one constraint violated")
        return cls(pairs)

    @classmethod
    def empty(cls) -> "Mapping":
        return cls(frozenset())

    def __len__(self) -> int:
        return len(self.pairs)

    def sorted_pairs(self) -> List[Tuple[int, int]]:
        return sorted(self.pairs)

    def as_dict(self) -> dict:
        return dict(self.pairs)


@dataclass
class NapProblem:
    """Sparse quadratic alignment problem over retained candidate pairs.

    Candidates are stored in lexicographic (row, col) order.  Each directed
    square connects two candidate indices; links merge the squares between
    an unordered candidate pair (summing their weights) for solvers that
    treat the interaction symmetrically.
    """

    n_a: int
    n_b: int
    cand_rows: np.ndarray      # int64
    cand_cols: np.ndarray      # int64
    node_weights: np.ndarray   # float64, s + 2*d_node - 1
    sq_src: np.ndarray         # int64 candidate index per directed square
    sq_dst: np.ndarray         # int64
    sq_weights: np.ndarray     # float64, 2*d_edge each
    link_u: np.ndarray         # int64, u < v, merged squares
    link_v: np.ndarray         # int64
    link_w: np.ndarray         # float64, summed directed square weights
    alpha: float
    d_node: float
    d_edge: float
    edges_a: int
    edges_b: int

    _keys: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def n_candidates(self) -> int:
        return len(self.node_weights)

    @property
    def n_squares(self) -> int:
        return len(self.sq_weights)

    def cand_keys(self) -> np.ndarray:
        if self._keys is None:
            self._keys = self.cand_rows * max(self.n_b, 1) + self.cand_cols
        return self._keys

    def candidate_index(self, i: int, j: int) -> int:
        keys = self.cand_keys()
        key = i * max(self.n_b, 1) + j
        pos = int(np.searchsorted(keys, key))
        if pos < len(keys) and keys[pos] == key:
            return pos
        return -1


def _square_arrays(sim: SimilarityMatrix, a: CallGraph,
                   b: CallGraph) -> Tuple[np.ndarray, np.ndarray]:
    """Candidate index pairs for every square both of whose ends survive pruning."""
    ea, eb = a.edge_array(), b.edge_array()
    if len(ea) == 0 or len(eb) == 0 or len(sim) == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    keys = sim.flat_keys()
    n_b = max(sim.n_b, 1)
    src_parts, dst_parts = [], []
    chunk = max(1, int(4_000_000 // len(eb)))
    for start in range(0, len(ea), chunk):
        ea_c = ea[start:start + chunk]
        k_src = (ea_c[:, 0, None] * n_b + eb[None, :, 0]).ravel()
        k_dst = (ea_c[:, 1, None] * n_b + eb[None, :, 1]).ravel()
        pos_src = np.searchsorted(keys, k_src)
        pos_dst = np.searchsorted(keys, k_dst)
        np.minimum(pos_src, len(keys) - 1, out=pos_src)
        np.minimum(pos_dst, len(keys) - 1, out=pos_dst)
        hit = (keys[pos_src] == k_src) & (keys[pos_dst] == k_dst)
        src_parts.append(pos_src[hit])
        dst_parts.append(pos_dst[hit])
    return np.concatenate(src_parts), np.concatenate(dst_parts)


def build_problem(sim: SimilarityMatrix, a: CallGraph, b: CallGraph,
                  alpha: float = 0.75, d_node: float = 0.5,
                  d_edge: float = 0.5) -> NapProblem:
    """Assemble node weights, squares and merged links for a candidate set."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if d_node < 0 or d_edge < 0:
        raise ValueError("edit costs must be non-negative")
    node_weights = sim.scores + (2.0 * d_node - 1.0)
    sq_src, sq_dst = _square_arrays(sim, a, b)
    sq_weights = np.full(len(sq_src), 2.0 * d_edge)

    if len(sq_src):
        u = np.minimum(sq_src, sq_dst)
        v = np.maximum(sq_src, sq_dst)
        order = np.lexsort((v, u))
        u, v, w = u[order], v[order], sq_weights[order]
        boundary = np.empty(len(u), dtype=bool)
        boundary[0] = True
        boundary[1:] = (u[1:] != u[:-1]) | (v[1:] != v[:-1])
        starts = np.flatnonzero(boundary)
        link_u, link_v = u[starts], v[starts]
        link_w = np.add.reduceat(w, starts)
    else:
        link_u = np.empty(0, dtype=np.int64)
        link_v = np.empty(0, dtype=np.int64)
        link_w = np.empty(0, dtype=np.float64)

    return NapProblem(n_a=sim.n_a, n_b=sim.n_b,
                      cand_rows=sim.rows.astype(np.int64),
                      cand_cols=sim.cols.astype(np.int64),
                      node_weights=node_weights.astype(np.float64),
                      sq_src=sq_src, sq_dst=sq_dst, sq_weights=sq_weights,
                      link_u=link_u, link_v=link_v, link_w=link_w,
                      alpha=alpha, d_node=d_node, d_edge=d_edge,
                      edges_a=len(a.edges), edges_b=len(b.edges))


def candidate_indices(problem: NapProblem, mapping: Mapping) -> np.ndarray:
    """Candidate index per mapped pair; raises if any pair was pruned."""
    if len(mapping) == 0:
        return np.empty(0, dtype=np.int64)
    pairs = np.asarray(mapping.sorted_pairs(), dtype=np.int64)
    out_of_range = ((pairs[:, 0] < 0) | (pairs[:, 0] >= problem.n_a)
                    | (pairs[:, 1] < 0) | (pairs[:, 1] >= problem.n_b))
    if out_of_range.any():
        bad = pairs[np.argmax(out_of_range)]
        raise MappingError("pair (%d, %d) is outside the problem" % (bad[0], bad[1]))
    keys = problem.cand_keys()
    want = pairs[:, 0] * max(problem.n_b, 1) + pairs[:, 1]
    pos = np.searchsorted(keys, want)
    np.minimum(pos, max(len(keys) - 1, 0), out=pos)
    missing = len(keys) == 0 or (keys[pos] != want).any()
    if missing:
        hit = np.zeros(len(want), dtype=bool) if len(keys) == 0 else keys[pos] == want
        bad = pairs[np.argmin(hit)]
        raise MappingError("pair (%d, %d) is not a retained candidate" % (bad[0], bad[1]))
    return pos


def mapping_from_candidates(problem: NapProblem, cand_idx: np.ndarray) -> Mapping:
    return Mapping.from_pairs(zip(problem.cand_rows[cand_idx].tolist(),
                                  problem.cand_cols[cand_idx].tolist()))


def _gain_parts(problem: NapProblem, mapping: Mapping) -> Tuple[float, float, int]:
    """(node weight sum, square weight sum, realized square count)."""
    midx = candidate_indices(problem, mapping)
    node_part = float(problem.node_weights[midx].sum())
    chosen = np.zeros(problem.n_candidates, dtype=bool)
    chosen[midx] = True
    realized = chosen[problem.sq_src] & chosen[problem.sq_dst]
    square_part = float(problem.sq_weights[realized].sum())
    return node_part, square_part, int(realized.sum())


def nap_objective(problem: NapProblem, mapping: Mapping) -> float:
    """alpha-weighted alignment value of a mapping."""
    node_part, square_part, _ = _gain_parts(problem, mapping)
    return problem.alpha * node_part + (1.0 - problem.alpha) * square_part


def count_squares(problem: NapProblem, mapping: Mapping) -> int:
    """Number of stored squares realized by a mapping."""
    _, _, count = _gain_parts(problem, mapping)
    return count


def baseline_cost(n_a: int, n_b: int, edges_a: int, edges_b: int,
                  d_node: float, d_edge: float) -> float:
    """Edit cost of the empty mapping: delete one program, insert the other."""
    return (n_a + n_b) * d_node + (edges_a + edges_b) * d_edge


def ged_cost_direct(a: CallGraph, b: CallGraph, mapping: Mapping,
                    sim: SimilarityMatrix, d_node: float = 0.5,
                    d_edge: float = 0.5) -> float:
    """Edit cost via the alignment identity: empty-mapping cost minus raw gain."""
    problem = build_problem(sim, a, b, alpha=0.5, d_node=d_node, d_edge=d_edge)
    node_part, square_part, _ = _gain_parts(problem, mapping)
    c0 = baseline_cost(a.n, b.n, len(a.edges), len(b.edges), d_node, d_edge)
    return c0 - node_part - square_part


def ged_cost_editpath(a: CallGraph, b: CallGraph, mapping: Mapping,
                      sim: SimilarityMatrix, d_node: float = 0.5,
                      d_edge: float = 0.5) -> float:
    """Edit cost by explicit accounting over the induced edit path.

    Matched functions are edited at cost 1 - similarity, everything else is
    deleted or inserted at d_node.  A call whose two endpoints map onto an
    existing call is edited for free (call similarity is 1); any other call
    on either side is deleted or inserted at d_edge.  Kept deliberately
    independent of the alignment machinery.
    """
    fwd = mapping.as_dict()
    cost = 0.0
    for i, j in mapping.sorted_pairs():
        if not (0 <= i < a.n and 0 <= j < b.n):
            raise MappingError("pair (%d, %d) is outside the problem" % (i, j))
        try:
            score = sim.get(i, j)
        except KeyError:
            raise MappingError("pair (%d, %d) is not a retained candidate" % (i, j))
        cost += 1.0 - score
    cost += (a.n - len(mapping)) * d_node
    cost += (b.n - len(mapping)) * d_node

    edited = set()
    for caller, callee in sorted(a.edges):
        target = (fwd.get(caller), fwd.get(callee))
        if None not in target and target in b.edges:
            edited.add(target)  # matched call, zero edit cost
        else:
            cost += d_edge  # deleted call
    for edge in sorted(b.edges):
        if edge not in edited:
            cost += d_edge  # inserted call
    return cost
