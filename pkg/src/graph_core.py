# src/graph_core.py
# Version: 1.1.0
# Description: Weighted undirected graphs, Laplacians, theta-deletion and incidence blocks
# Changelog:
# 1.1.0 - Added weight rescaling and closed neighbourhoods for the vertex recursion
# 1.0.0 - Initial implementation

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from src.errors import (
    DisconnectedError,
    EmptyGraphError,
    NonPositiveWeightError,
    SelfLoopError,
    ThetaOutOfRangeError,
    UnknownEdgeError,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph on vertices 0..n-1 with positive edge weights.

    Edge ``e`` joins ``heads[e] < tails[e]`` with conductance ``weights[e]``.
    """
    n: int
    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    adjacency: Tuple[Tuple[int, ...], ...]
    _edge_index: Dict[Tuple[int, int], int] = field(repr=False, compare=False)

    @property
    def m(self) -> int:
        return len(self.weights)

    def edge(self, e: int) -> Tuple[int, int, float]:
        if not 0 <= e < self.m:
            raise UnknownEdgeError(f"Unknown edge id: {e}")
        return int(self.heads[e]), int(self.tails[e]), float(self.weights[e])

    def edges(self) -> List[Tuple[int, int, float]]:
        return [self.edge(e) for e in range(self.m)]

    def edge_id(self, u: int, v: int) -> int:
        key = (min(u, v), max(u, v))
        if key not in self._edge_index:
            raise UnknownEdgeError(f"No edge between {u} and {v}")
        return self._edge_index[key]

    def incident_edges(self, v: int) -> Tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        """Number of incident edges, d(v)"""
        return len(self.adjacency[v])

    def weighted_degree(self, v: int) -> float:
        return float(sum(self.weights[e] for e in self.adjacency[v]))

    def neighbors(self, v: int) -> List[int]:
        return [
            int(self.tails[e]) if self.heads[e] == v else int(self.heads[e])
            for e in self.adjacency[v]
        ]

    def max_weight(self) -> float:
        return float(self.weights.max())

    def min_weight(self) -> float:
        return float(self.weights.min())

    def to_networkx(self):
        import networkx as nx

        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        for e in range(self.m):
            graph.add_edge(
                int(self.heads[e]), int(self.tails[e]),
                weight=float(self.weights[e]),
                length=1.0 / float(self.weights[e]),
                edge_id=e,
            )
        return graph

    def with_weights(self, weights: np.ndarray) -> "WeightedGraph":
        """Same topology, new weights (validated positive)"""
        weights = np.asarray(weights, dtype=float).copy()
        if weights.shape != self.weights.shape:
            raise ValueError("Weight vector does not match edge count")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise NonPositiveWeightError("All edge weights must be positive and finite")
        return WeightedGraph(
            n=self.n,
            heads=self.heads,
            tails=self.tails,
            weights=_readonly(weights),
            adjacency=self.adjacency,
            _edge_index=self._edge_index,
        )


@dataclass(frozen=True, eq=False)
class Laplacian:
    """Sparse symmetric Laplacian whose rows are the global vertex ids in ``vertices``"""
    matrix: sp.csr_matrix
    vertices: np.ndarray
    graph: Optional[WeightedGraph] = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def local_index(self) -> Dict[int, int]:
        return {int(v): i for i, v in enumerate(self.vertices)}

    def scale(self) -> float:
        return float(abs(self.matrix.diagonal()).max()) if self.n else 0.0

    def off_diagonal_weights(self) -> np.ndarray:
        upper = sp.triu(self.matrix, k=1).tocoo()
        return -upper.data[upper.data != 0]

    def is_valid(self, tolerance: float = ROW_SUM_TOLERANCE) -> bool:
        """Zero row sums, non-positive off-diagonals, symmetry"""
        scale = max(self.scale(), 1.0)
        row_sums = np.asarray(self.matrix.sum(axis=1)).ravel()
        if np.any(np.abs(row_sums) > tolerance * scale):
            return False
        off = self.matrix - sp.diags(self.matrix.diagonal())
        if off.nnz and off.data.max() > tolerance * scale:
            return False
        asym = abs(self.matrix - self.matrix.T)
        return not asym.nnz or asym.max() <= tolerance * scale

    @classmethod
    def from_edges(cls, vertices: Sequence[int], rows: Iterable[int], cols: Iterable[int],
                   weights: Iterable[float],
                   graph: Optional[WeightedGraph] = None) -> "Laplacian":
        """Assemble from local (row, col, weight) triples; duplicates are summed"""
        rows = np.asarray(list(rows), dtype=int)
        cols = np.asarray(list(cols), dtype=int)
        weights = np.asarray(list(weights), dtype=float)
        size = len(vertices)
        matrix = sp.coo_matrix(
            (
                np.concatenate([-weights, -weights, weights, weights]),
                (
                    np.concatenate([rows, cols, rows, cols]),
                    np.concatenate([cols, rows, rows, cols]),
                ),
            ),
            shape=(size, size),
        ).tocsr()
        matrix.sum_duplicates()
        return cls(matrix=matrix, vertices=np.asarray(vertices, dtype=int), graph=graph)


@dataclass(frozen=True, eq=False)
class IncidenceBlock:
    """Signed incidence rows b_e (lower id +1, higher id -1) for an edge subset T"""
    edge_ids: np.ndarray
    matrix: sp.csr_matrix
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.edge_ids)

    def gram(self) -> sp.csr_matrix:
        """B^T W B"""
        return (self.matrix.T @ sp.diags(self.weights) @ self.matrix).tocsr()

    def sqrt_weighted(self) -> sp.csr_matrix:
        """W^{1/2} B"""
        return (sp.diags(np.sqrt(self.weights)) @ self.matrix).tocsr()

    def columns(self, vertices: Sequence[int]) -> np.ndarray:
        """Dense |T| x |vertices| restriction, columns in the given vertex order"""
        return self.matrix[:, np.asarray(vertices, dtype=int)].toarray()

    def support(self) -> np.ndarray:
        return np.unique(self.matrix.indices)


def build_graph(edge_triples: Iterable[Sequence], n: Optional[int] = None) -> WeightedGraph:
    """Validate an edge list and collapse parallel edges by summing conductances"""
    collapsed: Dict[Tuple[int, int], float] = {}
    for triple in edge_triples:
        u, v = int(triple[0]), int(triple[1])
        w = float(triple[2]) if len(triple) > 2 else 1.0
        if u == v:
            raise SelfLoopError(f"Self-loop at vertex {u}")
        if not w > 0 or not np.isfinite(w):
            raise NonPositiveWeightError(f"Edge ({u}, {v}) has non-positive weight {w}")
        if u < 0 or v < 0:
            raise ValueError(f"Vertex ids must be non-negative, got ({u}, {v})")
        key = (min(u, v), max(u, v))
        collapsed[key] = collapsed.get(key, 0.0) + w

    if not collapsed:
        raise EmptyGraphError("Graph has no edges")

    size = max(max(key) for key in collapsed) + 1
    if n is not None:
        if n < size:
            raise ValueError(f"Vertex id {size - 1} outside [0, {n})")
        size = n

    keys = list(collapsed)
    heads = np.array([key[0] for key in keys], dtype=int)
    tails = np.array([key[1] for key in keys], dtype=int)
    weights = np.array([collapsed[key] for key in keys], dtype=float)

    incident: List[List[int]] = [[] for _ in range(size)]
    for e, (u, v) in enumerate(keys):
        incident[u].append(e)
        incident[v].append(e)

    return WeightedGraph(
        n=size,
        heads=_readonly(heads),
        tails=_readonly(tails),
        weights=_readonly(weights),
        adjacency=tuple(tuple(edges) for edges in incident),
        _edge_index={key: e for e, key in enumerate(keys)},
    )


def laplacian(g: WeightedGraph) -> Laplacian:
    return Laplacian.from_edges(np.arange(g.n), g.heads, g.tails, g.weights, graph=g)


def validate_theta(theta: float) -> None:
    if not 0 < theta <= 0.5:
        raise ThetaOutOfRangeError(f"theta must lie in (0, 1/2], got {theta}")


def theta_delete(g: WeightedGraph, edge_ids: Iterable[int], theta: float) -> WeightedGraph:
    """Scale the weight of every edge in ``edge_ids`` by theta"""
    validate_theta(theta)
    edge_ids = sorted(set(int(e) for e in edge_ids))
    for e in edge_ids:
        if not 0 <= e < g.m:
            raise UnknownEdgeError(f"Unknown edge id: {e}")
    weights = g.weights.copy()
    weights[edge_ids] *= theta
    return g.with_weights(weights)


def check_connected(g: WeightedGraph) -> bool:
    adjacency = sp.coo_matrix(
        (np.ones(g.m), (g.heads, g.tails)), shape=(g.n, g.n)
    )
    n_components, _ = connected_components(adjacency, directed=False)
    return n_components == 1


def require_connected(g: WeightedGraph) -> None:
    if not check_connected(g):
        raise DisconnectedError(f"Graph with n={g.n}, m={g.m} is not connected")


def incidence_block(g: WeightedGraph, edge_ids: Iterable[int]) -> IncidenceBlock:
    edge_ids = np.array(sorted(set(int(e) for e in edge_ids)), dtype=int)
    for e in edge_ids:
        if not 0 <= e < g.m:
            raise UnknownEdgeError(f"Unknown edge id: {e}")
    rows = np.repeat(np.arange(len(edge_ids)), 2)
    cols = np.column_stack([g.heads[edge_ids], g.tails[edge_ids]]).ravel()
    data = np.tile([1.0, -1.0], len(edge_ids))
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(len(edge_ids), g.n))
    return IncidenceBlock(
        edge_ids=edge_ids, matrix=matrix, weights=g.weights[edge_ids].copy()
    )


def rescale_weights(g: WeightedGraph) -> Tuple[WeightedGraph, float]:
    """Divide weights by the minimum weight so they lie in [1, U]"""
    factor = g.min_weight()
    if factor == 1.0:
        return g, factor
    return g.with_weights(g.weights / factor), factor


def closed_neighborhood(g: WeightedGraph, vertices: Iterable[int]) -> np.ndarray:
    members = set(int(v) for v in vertices)
    for v in list(members):
        members.update(g.neighbors(v))
    return np.array(sorted(members), dtype=int)
