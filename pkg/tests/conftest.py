# tests/conftest.py
# Version: 1.1.0
# Description: Shared graph fixtures

import os
import sys

import networkx as nx
import numpy as np
import pytest

# Add repository root to Python path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.graph_core import build_graph  # noqa: E402
from src.settings import EstimatorSettings  # noqa: E402

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), '..', 'data', 'fixtures')


def random_connected_graph(n: int, extra_edges: int, seed: int, max_weight: float = 1.0):
    """Random spanning tree plus ``extra_edges`` random chords; weights uniform in [1, U]"""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    pairs = set()
    for i in range(1, n):
        u, v = int(order[i]), int(order[rng.integers(0, i)])
        pairs.add((min(u, v), max(u, v)))
    attempts = 0
    target = min(len(pairs) + extra_edges, n * (n - 1) // 2)
    while len(pairs) < target and attempts < 100 * target:
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        pairs.add((min(u, v), max(u, v)))
        attempts += 1
    pairs = sorted(pairs)
    weights = rng.uniform(1.0, max_weight, size=len(pairs)) if max_weight > 1 else np.ones(len(pairs))
    return build_graph([(u, v, float(w)) for (u, v), w in zip(pairs, weights)], n=n)


@pytest.fixture
def k2():
    return build_graph([(0, 1)])


@pytest.fixture
def p3():
    return build_graph([(0, 1), (1, 2)])


@pytest.fixture
def triangle():
    return build_graph([(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def star():
    """K_{1,3} with centre 0"""
    return build_graph([(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def karate():
    graph = nx.karate_club_graph()
    return build_graph([(u, v) for u, v in graph.edges()], n=graph.number_of_nodes())


@pytest.fixture
def random_graph():
    return random_connected_graph


@pytest.fixture
def fast_settings():
    """Small probe constants for quick statistical checks"""
    return EstimatorSettings(
        edge_trace_constant=24.0,
        sm_trace_constant=24.0,
        hutchinson_constant=24.0,
    )


@pytest.fixture
def fixture_path():
    def resolve(name: str) -> str:
        return os.path.join(FIXTURE_DIR, name)
    return resolve
