"""Shared fixtures and an independent brute-force oracle.

The oracle here deliberately reimplements exact evaluation from scratch
(itertools over edge subsets, dict-based BFS) so library results are checked
against an arithmetic path they do not share.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from profitmax import WeightedGraph

# the canonical 4-node demo graph: nodes 0..3, four edges, hand-checkable
DEMO_EDGES = [(0, 1, 0.3), (0, 3, 0.4), (1, 3, 0.2), (2, 3, 0.3)]
DEMO_BENEFIT = [1.5, 2.0, 3.0, 2.0]
DEMO_COST = [1.0, 1.0, 1.0, 5.0]

DEMO_OPTIMUM = frozenset({1, 2})
DEMO_OPTIMUM_PROFIT = 1.68

# margins per pruning iteration, keyed by node (verified by brute force)
DEMO_LOWER_MARGINS = [
    {0: -1.98, 1: -0.6, 2: 0.5, 3: -4.328},
    {0: -1.326, 1: -0.3, 3: -2.828},
    {0: -0.878, 1: -0.1824},
]
DEMO_UPPER_MARGINS = [
    {0: 1.972, 1: 1.7, 2: 2.6, 3: 0.32},
    {0: 1.7104, 1: 1.58, 3: -0.28},
    {0: 0.5904, 1: 1.286},
]


def make_demo_graph() -> WeightedGraph:
    return WeightedGraph(4, DEMO_EDGES, benefit=DEMO_BENEFIT, cost=DEMO_COST)


@pytest.fixture(scope="session")
def demo_graph() -> WeightedGraph:
    return make_demo_graph()


def edgeless_graph(net_weights) -> WeightedGraph:
    """Graph with no edges whose node i has net weight net_weights[i]."""
    benefit = [max(0.0, w) for w in net_weights]
    cost = [max(0.0, -w) for w in net_weights]
    return WeightedGraph(len(net_weights), [], benefit=benefit, cost=cost)


def brute_evaluate(g: WeightedGraph, seeds):
    """Exact (benefit, cost) by summing over every live-edge outcome."""
    src, dst, prob = g.edge_arrays()
    edges = list(zip(src.tolist(), dst.tolist(), prob.tolist()))
    seeds = set(seeds)
    beta = gamma = 0.0
    for bits in itertools.product((0, 1), repeat=len(edges)):
        p = 1.0
        for live, (_, _, pe) in zip(bits, edges):
            p *= pe if live else 1.0 - pe
        if p == 0.0:
            continue
        adj = {}
        for live, (u, v, _) in zip(bits, edges):
            if live:
                adj.setdefault(u, []).append(v)
        active = set(seeds)
        stack = list(seeds)
        while stack:
            u = stack.pop()
            for v in adj.get(u, ()):
                if v not in active:
                    active.add(v)
                    stack.append(v)
        beta += p * sum(g.benefit[v] for v in active)
        gamma += p * sum(g.cost[v] for v in active)
    return beta, gamma


def brute_profit(g: WeightedGraph, seeds) -> float:
    beta, gamma = brute_evaluate(g, seeds)
    return beta - gamma


def brute_optimum(g: WeightedGraph):
    """(best seed set, best profit, all optimal sets) by full enumeration."""
    n = g.node_count
    best_value = None
    best_set = None
    values = {}
    for mask in range(1 << n):
        subset = frozenset(v for v in range(n) if mask >> v & 1)
        value = brute_profit(g, subset)
        values[subset] = value
        if (best_value is None or value > best_value
                or (value == best_value and tuple(sorted(subset)) < tuple(sorted(best_set)))):
            best_value, best_set = value, subset
    optima = [s for s, v in values.items() if v >= best_value - 1e-9]
    return best_set, best_value, optima


def random_graph(rng: np.random.Generator, max_nodes: int = 7,
                 max_edges: int = 12) -> WeightedGraph:
    """Random small instance: directed edges, continuous weights and probs."""
    n = int(rng.integers(2, max_nodes + 1))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    m = int(rng.integers(1, min(max_edges, len(pairs)) + 1))
    chosen = rng.choice(len(pairs), size=m, replace=False)
    edges = [(pairs[i][0], pairs[i][1], float(rng.uniform(0.05, 0.95)))
             for i in chosen]
    benefit = rng.uniform(0.0, 2.5, size=n)
    cost = rng.uniform(0.0, 2.5, size=n)
    return WeightedGraph(n, edges, benefit=benefit, cost=cost)


def random_subset(rng: np.random.Generator, n: int) -> frozenset:
    return frozenset(int(v) for v in range(n) if rng.random() < 0.5)
