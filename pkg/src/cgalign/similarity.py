"""Pairwise function similarity.

Similarity between two functions is one minus a weighted Canberra distance
over their concatenated feature vectors, where each feature group (content,
topology, neighborhood) carries a fixed share of the total weight split
evenly among its components.  A tiny bonus for functions at similar
positions in their program's address order breaks ties between otherwise
identical functions, and a global sparsity ratio prunes the lowest-scoring
pairs to keep downstream solvers sparse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .graphs import CallGraph, FeatureVector, feature_group_sizes, validate_pair


@dataclass(frozen=True)
class SimilarityConfig:
    content_weight: float = 23.0
    topology_weight: float = 19.0
    neighborhood_weight: float = 7.0
    perturbation_scale: float = 1e-3  # address-order bonus magnitude
    sparsity_ratio: float = 0.0       # fraction of lowest-scoring pairs to drop

    def __post_init__(self):
        for label in ("content_weight", "topology_weight", "neighborhood_weight"):
            if getattr(self, label) < 0:
                raise ValueError("%s must be non-negative" % label)
        if self.content_weight + self.topology_weight + self.neighborhood_weight <= 0:
            raise ValueError("group weights must not all be zero")
        if not 0.0 <= self.sparsity_ratio <= 1.0:
            raise ValueError("sparsity_ratio must lie in [0, 1]")
        if self.perturbation_scale < 0:
            raise ValueError("perturbation_scale must be non-negative")


def feature_weights(n_classes: int, config: SimilarityConfig) -> np.ndarray:
    """Per-feature weights: each group's weight split evenly over its slots."""
    sizes = feature_group_sizes(n_classes)
    groups = (config.content_weight, config.topology_weight, config.neighborhood_weight)
    parts = [np.full(size, weight / size) for size, weight in zip(sizes, groups)]
    return np.concatenate(parts)


def _weighted_canberra(fa: np.ndarray, fb: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Distance between every row of fa and every row of fb; shape (len(fa), len(fb)).

    Per-feature terms are |x - y| / (x + y) with 0/0 counted as 0, averaged
    under the per-feature weights.  Inputs are non-negative so the Canberra
    denominator is just the sum.
    """
    diff = np.abs(fa[:, None, :] - fb[None, :, :])
    denom = fa[:, None, :] + fb[None, :, :]
    terms = np.divide(diff, denom, out=np.zeros_like(diff), where=denom > 0)
    return terms @ weights / weights.sum()


def canberra_similarity(fa: FeatureVector, fb: FeatureVector,
                        config: Optional[SimilarityConfig] = None) -> float:
    """Similarity in [0, 1] between two feature vectors of the same layout."""
    config = config or SimilarityConfig()
    va, vb = fa.concat(), fb.concat()
    if (len(fa.content), len(fa.topology), len(fa.neighborhood)) != (
            len(fb.content), len(fb.topology), len(fb.neighborhood)):
        raise ValueError("feature vectors have different layouts")
    weights = feature_weights(len(fa.content) - 2, config)
    a = np.asarray(va, dtype=np.float64).reshape(1, -1)
    b = np.asarray(vb, dtype=np.float64).reshape(1, -1)
    return float(1.0 - _weighted_canberra(a, b, weights)[0, 0])


@dataclass
class SimilarityMatrix:
    """Sparse rectangular matrix of retained candidate pairs.

    Entries are stored in lexicographic (row, col) order; absent positions
    were pruned and are not legal match candidates.
    """

    n_a: int
    n_b: int
    rows: np.ndarray    # int64, candidate row indices
    cols: np.ndarray    # int64, candidate col indices
    scores: np.ndarray  # float64 in [0, 1]

    _keys: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def pruned(self) -> int:
        return self.n_a * self.n_b - len(self)

    def flat_keys(self) -> np.ndarray:
        """row * n_b + col per entry, ascending (entries are lex sorted)."""
        if self._keys is None:
            self._keys = self.rows * max(self.n_b, 1) + self.cols
        return self._keys

    def find(self, i: int, j: int) -> int:
        """Index of candidate (i, j) in the entry arrays, or -1 if pruned."""
        keys = self.flat_keys()
        key = i * max(self.n_b, 1) + j
        pos = int(np.searchsorted(keys, key))
        if pos < len(keys) and keys[pos] == key:
            return pos
        return -1

    def get(self, i: int, j: int) -> float:
        pos = self.find(i, j)
        if pos < 0:
            raise KeyError((i, j))
        return float(self.scores[pos])

    def contains(self, i: int, j: int) -> bool:
        return self.find(i, j) >= 0

    def to_dense(self, fill: float = np.nan) -> np.ndarray:
        dense = np.full((self.n_a, self.n_b), fill)
        dense[self.rows, self.cols] = self.scores
        return dense


def build_similarity_matrix(a: CallGraph, b: CallGraph,
                            config: Optional[SimilarityConfig] = None) -> SimilarityMatrix:
    """Score all function pairs of two comparable graphs, then prune globally.

    Pruning removes the floor(sparsity_ratio * n_a * n_b) lowest-scoring
    pairs; score ties are broken by lexicographic (row, col) order so the
    result is deterministic.
    """
    config = config or SimilarityConfig()
    validate_pair(a, b)
    n_a, n_b = a.n, b.n
    total = n_a * n_b
    if total == 0:
        empty = np.empty(0)
        return SimilarityMatrix(n_a, n_b, empty.astype(np.int64),
                                empty.astype(np.int64), empty.astype(np.float64))

    weights = feature_weights(len(a.instruction_classes), config)
    fa, fb = a.feature_matrix(), b.feature_matrix()
    order_a, order_b = a.order_array(), b.order_array()
    span = max(n_a, n_b)

    scores = np.empty((n_a, n_b), dtype=np.float64)
    chunk = max(1, int(4_000_000 // (n_b * fa.shape[1] + 1)))
    for start in range(0, n_a, chunk):
        stop = min(start + chunk, n_a)
        sim = 1.0 - _weighted_canberra(fa[start:stop], fb, weights)
        if config.perturbation_scale > 0:
            bonus = 1.0 - np.abs(order_a[start:stop, None] - order_b[None, :]) / span
            sim = sim + config.perturbation_scale * bonus
        np.clip(sim, 0.0, 1.0, out=sim)
        scores[start:stop] = sim

    flat = scores.ravel()
    drop = int(np.floor(config.sparsity_ratio * total))
    if drop > 0:
        rows_flat, cols_flat = np.divmod(np.arange(total, dtype=np.int64), n_b)
        # lexsort: last key is primary, so order by score, then row, then col
        order = np.lexsort((cols_flat, rows_flat, flat))
        keep = np.sort(order[drop:])
    else:
        keep = np.arange(total, dtype=np.int64)
    rows, cols = np.divmod(keep, n_b)
    return SimilarityMatrix(n_a=n_a, n_b=n_b, rows=rows, cols=cols, scores=flat[keep])
