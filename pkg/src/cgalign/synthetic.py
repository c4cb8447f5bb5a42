"""Synthetic call graphs with known ground truth.

generate_graph draws function features from a small pool of templates plus
noise, mimicking the near-duplicate helpers real programs contain: features
alone cannot always separate functions of the same family, so call structure
carries real signal.  mutate derives a second version of a graph (deleted,
inserted and perturbed functions, rewired calls) together with the exact
pairing of surviving functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Set, Tuple

import numpy as np

from .evaluation import GroundTruth
from .graphs import CallGraph, FeatureVector, FunctionNode

DEFAULT_CLASSES = ("arith", "logic", "mem", "branch", "call", "other")


@dataclass(frozen=True)
class MutationSpec:
    """How far a derived program version drifts from its base."""

    insert: int = 0   # brand-new functions
    delete: int = 0   # removed functions
    perturb: int = 0  # surviving functions whose features get integer noise
    rewire: int = 0   # call edges moved somewhere else
    noise: int = 8    # magnitude of the feature noise

    def __post_init__(self):
        if min(self.insert, self.delete, self.perturb, self.rewire) < 0:
            raise ValueError("mutation counts must be non-negative")
        if self.noise < 1:
            raise ValueError("noise must be at least 1")


def _draw_features(rng: np.random.Generator, count: int,
                   n_classes: int) -> List[Tuple[Tuple[float, ...], Tuple[float, ...]]]:
    """(content, topology) feature tuples for `count` fresh functions."""
    out = []
    for _ in range(count):
        class_counts = rng.integers(0, 40, size=n_classes)
        total = int(class_counts.sum())
        max_block = int(rng.integers(1, total + 2))
        content = (float(total), *map(float, class_counts), float(max_block))
        blocks = int(rng.integers(1, 30))
        jumps = int(rng.integers(0, 50))
        topology = (float(blocks), float(jumps),
                    float(rng.integers(0, 6)), float(rng.integers(0, 6)))
        out.append((content, topology))
    return out


def _assemble(name: str, classes: Tuple[str, ...],
              content_topo: List[Tuple[Tuple[float, ...], Tuple[float, ...]]],
              order: List[int], names: List[Optional[str]],
              edges: Set[Tuple[int, int]]) -> CallGraph:
    """Build a graph, recomputing neighborhood features from the edges."""
    n = len(content_topo)
    callers = [0] * n
    callees = [0] * n
    for u, v in edges:
        callees[u] += 1
        callers[v] += 1
    nodes = []
    for i, (content, topology) in enumerate(content_topo):
        features = FeatureVector(content=content, topology=topology,
                                 neighborhood=(float(callers[i]), float(callees[i])))
        nodes.append(FunctionNode(id=i, order_index=order[i], features=features,
                                  name=names[i]))
    return CallGraph(name=name, instruction_classes=classes, nodes=tuple(nodes),
                     edges=frozenset(edges))


def generate_graph(n: int, edge_density: float = 0.1, seed: int = 0,
                   templates: Optional[int] = None,
                   classes: Tuple[str, ...] = DEFAULT_CLASSES,
                   name: Optional[str] = None) -> CallGraph:
    """Random attributed call graph with named functions.

    Each function copies one of `templates` feature templates (default: one
    per four functions) and adds small noise, then gets independent random
    call edges with the given density.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0.0 <= edge_density <= 1.0:
        raise ValueError("edge_density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if templates is None:
        templates = max(1, n // 4)
    base = _draw_features(rng, max(templates, 1), len(classes))

    content_topo = []
    for i in range(n):
        content, topology = base[int(rng.integers(0, len(base)))]
        content_topo.append(_jitter(rng, content, topology, amount=2))

    edges: Set[Tuple[int, int]] = set()
    if n > 1 and edge_density > 0:
        mask = rng.random((n, n)) < edge_density
        np.fill_diagonal(mask, False)
        edges = {(int(u), int(v)) for u, v in np.argwhere(mask)}

    order = [int(x) for x in rng.permutation(n)]
    names = ["fn%04d" % i for i in range(n)]
    return _assemble(name or "synthetic-%d" % seed, classes, content_topo,
                     order, names, edges)


def _jitter(rng: np.random.Generator, content: Tuple[float, ...],
            topology: Tuple[float, ...], amount: int):
    """Integer noise on content and topology, keeping everything consistent."""
    counts = np.maximum(
        np.asarray(content[1:-1]) + rng.integers(-amount, amount + 1,
                                                 size=len(content) - 2), 0)
    total = float(counts.sum())
    max_block = float(min(max(content[-1] + rng.integers(-amount, amount + 1), 0.0),
                          total + 1))
    new_content = (total, *map(float, counts), max_block)
    topo = np.maximum(
        np.asarray(topology) + rng.integers(-amount, amount + 1, size=len(topology)), 0)
    topo[0] = max(topo[0], 1)
    return new_content, tuple(map(float, topo))


def mutate(graph: CallGraph, spec: MutationSpec,
           seed: int = 0) -> Tuple[CallGraph, GroundTruth]:
    """Derive a drifted version of a graph plus the surviving-function truth.

    Deletions pick functions to drop, insertions append fresh ones at random
    address positions, perturbation adds integer noise to survivor features,
    and rewiring moves call edges.  Neighborhood features of every function
    are recomputed from the final edges.  The truth pairs each survivor's
    name with itself, so both graphs must have named functions.
    """
    rng = np.random.default_rng(seed)
    n = graph.n
    if any(node.name is None for node in graph.nodes):
        raise ValueError("mutate requires named functions")
    if spec.delete > n:
        raise ValueError("cannot delete %d of %d functions" % (spec.delete, n))
    if spec.perturb > n - spec.delete:
        raise ValueError("cannot perturb more functions than survive")

    doomed = set(int(x) for x in rng.choice(n, size=spec.delete, replace=False)) \
        if spec.delete else set()
    survivors = [i for i in range(n) if i not in doomed]
    new_id = {old: k for k, old in enumerate(survivors)}
    n_new = len(survivors) + spec.insert

    content_topo = []
    names: List[Optional[str]] = []
    order_keys: List[float] = []
    for old in survivors:
        node = graph.nodes[old]
        content_topo.append((node.features.content, node.features.topology))
        names.append(node.name)
        order_keys.append(float(node.order_index))
    taken = set(names)
    for k, (content, topology) in enumerate(
            _draw_features(rng, spec.insert, len(graph.instruction_classes))):
        label = "ins%04d" % k
        while label in taken:
            label = "ins%04d_" % k + str(len(label))
        taken.add(label)
        content_topo.append((content, topology))
        names.append(label)
        order_keys.append(float(rng.uniform(-0.5, n - 0.5)))

    if spec.perturb:
        which = rng.choice(len(survivors), size=spec.perturb, replace=False)
        for idx in sorted(int(x) for x in which):
            content, topology = content_topo[idx]
            content_topo[idx] = _jitter(rng, content, topology, amount=spec.noise)

    edges: Set[Tuple[int, int]] = set()
    for u, v in sorted(graph.edges):
        if u in new_id and v in new_id:
            edges.add((new_id[u], new_id[v]))
    for k in range(spec.insert):
        node = len(survivors) + k
        for _ in range(int(rng.integers(0, 4))):
            other = int(rng.integers(0, n_new))
            if other != node:
                edges.add((node, other))
        for _ in range(int(rng.integers(0, 3))):
            other = int(rng.integers(0, n_new))
            if other != node:
                edges.add((other, node))
    # rewire: replace existing edges with fresh random ones
    edge_list = sorted(edges)
    n_rewire = min(spec.rewire, len(edge_list))
    if n_rewire:
        drop = rng.choice(len(edge_list), size=n_rewire, replace=False)
        for idx in sorted(int(x) for x in drop):
            edges.discard(edge_list[idx])
        added = 0
        attempts = 0
        while added < n_rewire and attempts < 100 * n_rewire + 100:
            attempts += 1
            u = int(rng.integers(0, n_new))
            v = int(rng.integers(0, n_new))
            if u != v and (u, v) not in edges:
                edges.add((u, v))
                added += 1

    ranks = np.argsort(np.asarray(order_keys), kind="stable")
    order = [0] * n_new
    for position, node in enumerate(ranks.tolist()):
        order[node] = position
    mutated = _assemble(graph.name + "+mut", graph.instruction_classes,
                        content_topo, order, names, edges)
    truth = GroundTruth.from_pairs(
        (graph.nodes[old].name, graph.nodes[old].name) for old in survivors)
    return mutated, truth
