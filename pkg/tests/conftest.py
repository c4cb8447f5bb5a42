"""Shared builders for the test suite."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cgalign import CallGraph, FeatureVector, FunctionNode, SimilarityMatrix

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

CLASSES = ("arith", "logic", "mem", "branch", "call", "other")


def make_features(counts, blocks=3.0, jumps=2.0, callers=1.0, callees=1.0,
                  max_block=None, max_callers=1.0, max_callees=1.0):
    counts = tuple(float(c) for c in counts)
    total = sum(counts)
    return FeatureVector(
        content=(total, *counts, max_block if max_block is not None else total + 1),
        topology=(blocks, jumps, max_callers, max_callees),
        neighborhood=(callers, callees),
    )


def make_graph(n, edges=(), name="g", classes=CLASSES, features=None, order=None):
    """Small hand-built graph; features default to distinct per-node counts."""
    nodes = []
    for i in range(n):
        if features is not None:
            fv = features[i]
        else:
            counts = [0.0] * len(classes)
            counts[i % len(classes)] = float(10 + i)
            fv = make_features(counts, callers=0.0, callees=0.0)
        nodes.append(FunctionNode(
            id=i,
            order_index=order[i] if order is not None else i,
            features=fv,
            name="fn%04d" % i,
        ))
    return CallGraph(name=name, instruction_classes=tuple(classes),
                     nodes=tuple(nodes), edges=frozenset(edges))


def dense_sim(matrix):
    """SimilarityMatrix from a dense 2-d array-like of scores."""
    arr = np.asarray(matrix, dtype=float)
    n_a, n_b = arr.shape
    rows, cols = np.divmod(np.arange(n_a * n_b, dtype=np.int64), n_b)
    return SimilarityMatrix(n_a=n_a, n_b=n_b, rows=rows, cols=cols,
                            scores=arr.ravel().copy())


@pytest.fixture
def square_pair():
    """Two 2-node graphs, one call each, diagonal similarity 1."""
    a = make_graph(2, edges=[(0, 1)], name="A")
    b = make_graph(2, edges=[(0, 1)], name="B")
    sim = dense_sim([[1.0, 0.1], [0.1, 1.0]])
    return a, b, sim
