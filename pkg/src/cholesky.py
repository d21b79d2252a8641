# src/cholesky.py
# Version: 1.2.0
# Description: Exact and sampled partial Cholesky factorization of graph Laplacians (Schur complements)
# Changelog:
# 1.2.0 - Connectivity-preserving clique sampler with exact fallback on small cliques
# 1.1.0 - Transposed factor solves and complete-factorization pseudoinverse
# 1.0.0 - Initial implementation

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sp

from src.errors import (
    DimensionMismatchError,
    DisconnectedError,
    EmptyRetainSetError,
    EpsilonOutOfRangeError,
)
from src.graph_core import Laplacian
from src.settings import DEFAULT_SETTINGS, EstimatorSettings

logger = logging.getLogger(__name__)

# off-diagonal magnitudes below this (relative to the Laplacian scale) are treated as cancelled edges
DROP_TOLERANCE = 1e-14


@dataclass(frozen=True, eq=False)
class PartialCholesky:
    """L = factor * blockdiag(pivots, schur) * factor^T.

    ``eliminated`` holds local row indices in elimination order; ``columns[i]`` is the
    (row indices, entries) pair of the factor column below the unit diagonal of
    ``eliminated[i]``. ``retained`` is sorted and lines up with ``schur.vertices``.
    """
    vertices: np.ndarray
    eliminated: np.ndarray
    retained: np.ndarray
    columns: Tuple[Tuple[np.ndarray, np.ndarray], ...]
    pivots: np.ndarray
    schur: Laplacian
    exact: bool
    epsilon: float

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def factor_nnz(self) -> int:
        return self.n + sum(len(idx) for idx, _ in self.columns)

    def factor_dense(self) -> np.ndarray:
        factor = np.eye(self.n)
        for v, (idx, vals) in zip(self.eliminated, self.columns):
            factor[idx, v] = vals
        return factor


def _check_epsilon(eps: float) -> None:
    if not 0 < eps <= 0.5:
        raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1/2], got {eps}")


def _retained_local(L: Laplacian, C: Iterable[int]) -> np.ndarray:
    index = L.local_index()
    retained = sorted({index[int(c)] for c in C if int(c) in index})
    if not retained:
        raise EmptyRetainSetError("Retained vertex set is empty or outside the Laplacian")
    if len(retained) != len(set(int(c) for c in C)):
        missing = [int(c) for c in C if int(c) not in index]
        raise EmptyRetainSetError(f"Retained vertices not in the Laplacian: {missing}")
    return np.asarray(retained, dtype=int)


def _adjacency(L: Laplacian) -> List[Dict[int, float]]:
    coo = L.matrix.tocoo()
    floor = DROP_TOLERANCE * max(L.scale(), 1.0)
    adjacency: List[Dict[int, float]] = [dict() for _ in range(L.n)]
    for r, c, value in zip(coo.row, coo.col, coo.data):
        if r != c and -value > floor:
            adjacency[r][c] = adjacency[r].get(c, 0.0) - value
    return adjacency


def _min_degree_order(adjacency: List[Dict[int, float]], eliminate: Sequence[int]):
    """Yield vertices of ``eliminate`` by current min degree, ties to the lowest id"""
    pending = set(int(v) for v in eliminate)
    heap = [(len(adjacency[v]), v) for v in pending]
    heapq.heapify(heap)
    while pending:
        degree, v = heapq.heappop(heap)
        if v not in pending or degree != len(adjacency[v]):
            if v in pending:
                heapq.heappush(heap, (len(adjacency[v]), v))
            continue
        pending.discard(v)
        touched = list(adjacency[v])
        yield v
        for u in touched:
            if u in pending:
                heapq.heappush(heap, (len(adjacency[u]), u))


def _exact_clique(nbrs: np.ndarray, weights: np.ndarray, total: float):
    i, j = np.triu_indices(len(nbrs), k=1)
    return nbrs[i], nbrs[j], weights[i] * weights[j] / total


def _sampled_clique(nbrs: np.ndarray, weights: np.ndarray, total: float,
                    rounds: int, rng: np.random.Generator):
    """Unbiased sparse estimate of the elimination clique.

    Each round every neighbour i draws one partner j != i with probability
    a_j / (d - a_i); the pair weight is set so the expectation equals a_i a_j / d.
    """
    k = len(nbrs)
    others = total - weights
    heads, tails, values = [], [], []
    for _ in range(rounds):
        for i in range(k):
            probs = weights.copy()
            probs[i] = 0.0
            probs /= others[i]
            j = int(rng.choice(k, p=probs))
            rate = weights[j] / others[i] + weights[i] / others[j]
            heads.append(i)
            tails.append(j)
            values.append(weights[i] * weights[j] / (total * rate * rounds))
    heads = np.asarray(heads)
    tails = np.asarray(tails)
    pattern = sp.coo_matrix((np.ones(len(heads)), (heads, tails)), shape=(k, k))
    n_components, _ = connected_components(pattern, directed=False)
    if n_components > 1:
        # a split clique would disconnect the Schur complement
        return None
    return nbrs[heads], nbrs[tails], np.asarray(values)


def _eliminate(L: Laplacian, retained: np.ndarray, order: Optional[Sequence[int]],
               eps: float, rng: Optional[np.random.Generator],
               settings: EstimatorSettings) -> PartialCholesky:
    adjacency = _adjacency(L)
    keep = set(int(c) for c in retained)
    eliminate = [v for v in range(L.n) if v not in keep]

    exact = rng is None or L.n <= settings.exact_threshold
    rounds = 0
    if not exact:
        rounds = max(1, math.ceil(settings.sample_factor * eps ** -2 * math.log(max(L.n, 2))))

    if order is not None:
        order = [int(v) for v in order]
        if sorted(order) != sorted(eliminate):
            raise ValueError("Elimination order must be a permutation of the eliminated set")
        sequence: Iterable[int] = iter(order)
    else:
        sequence = _min_degree_order(adjacency, eliminate)

    eliminated: List[int] = []
    columns: List[Tuple[np.ndarray, np.ndarray]] = []
    pivots: List[float] = []
    sampled = 0

    for v in sequence:
        star = adjacency[v]
        adjacency[v] = {}
        nbrs = np.fromiter(star.keys(), dtype=int, count=len(star))
        weights = np.fromiter(star.values(), dtype=float, count=len(star))
        total = float(weights.sum())
        if total <= 0:
            raise DisconnectedError(f"Vertex {L.vertices[v]} has no remaining edges")
        for u in nbrs:
            del adjacency[u][v]

        eliminated.append(v)
        pivots.append(total)
        columns.append((nbrs, -weights / total))

        if len(nbrs) < 2:
            continue
        clique = None
        if not exact and len(nbrs) - 1 > 2 * rounds:
            clique = _sampled_clique(nbrs, weights, total, rounds, rng)
            sampled += clique is not None
        if clique is None:
            clique = _exact_clique(nbrs, weights, total)
        for a, b, w in zip(*clique):
            a, b = int(a), int(b)
            adjacency[a][b] = adjacency[a].get(b, 0.0) + w
            adjacency[b][a] = adjacency[b].get(a, 0.0) + w

    position = {int(v): i for i, v in enumerate(retained)}
    rows, cols, vals = [], [], []
    for v in retained:
        for u, w in adjacency[v].items():
            if v < u:
                rows.append(position[int(v)])
                cols.append(position[int(u)])
                vals.append(w)
    schur = Laplacian.from_edges(L.vertices[retained], rows, cols, vals, graph=None)

    logger.debug(
        f"Eliminated {len(eliminated)} of {L.n} vertices "
        f"({'exact' if exact else f'{sampled} sampled cliques'})"
    )
    return PartialCholesky(
        vertices=L.vertices,
        eliminated=np.asarray(eliminated, dtype=int),
        retained=retained,
        columns=tuple(columns),
        pivots=np.asarray(pivots, dtype=float),
        schur=schur,
        exact=exact,
        epsilon=0.0 if exact else eps,
    )


def exact_partial_cholesky(L: Laplacian, C: Iterable[int],
                           order: Optional[Sequence[int]] = None) -> PartialCholesky:
    """Eliminate V \\ C exactly; ``order`` (local indices) overrides min-degree"""
    return _eliminate(L, _retained_local(L, C), order, 0.0, None, DEFAULT_SETTINGS)


def exact_schur(L: Laplacian, C: Iterable[int],
                order: Optional[Sequence[int]] = None) -> Laplacian:
    return exact_partial_cholesky(L, C, order).schur


def apx_partial_cholesky(L: Laplacian, C: Iterable[int], eps: float,
                         rng: Optional[np.random.Generator] = None,
                         settings: EstimatorSettings = DEFAULT_SETTINGS) -> PartialCholesky:
    """Sampled elimination of V \\ C with schur ~_eps Sc(L, C) with high probability"""
    _check_epsilon(eps)
    if rng is None:
        rng = np.random.default_rng()
    return _eliminate(L, _retained_local(L, C), None, eps, rng, settings)


def _as_float(pc: PartialCholesky, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape[0] != pc.n:
        raise DimensionMismatchError(f"Vector of length {b.shape[0]} for factor of size {pc.n}")
    return b.copy()


def apply_factor_inverse(pc: PartialCholesky, b: np.ndarray) -> np.ndarray:
    """Forward substitution with the unit lower factor; ``b`` may be n or n x k"""
    y = _as_float(pc, b)
    for v, (idx, vals) in zip(pc.eliminated, pc.columns):
        if len(idx):
            y[idx] -= np.multiply.outer(vals, y[v])
    return y


def apply_factor_transpose_inverse(pc: PartialCholesky, b: np.ndarray) -> np.ndarray:
    x = _as_float(pc, b)
    for v, (idx, vals) in zip(pc.eliminated[::-1], pc.columns[::-1]):
        if len(idx):
            x[v] -= np.tensordot(vals, x[idx], axes=1)
    return x


def reassemble(pc: PartialCholesky) -> np.ndarray:
    middle = np.zeros((pc.n, pc.n))
    middle[pc.eliminated, pc.eliminated] = pc.pivots
    middle[np.ix_(pc.retained, pc.retained)] = pc.schur.dense()
    factor = pc.factor_dense()
    return factor @ middle @ factor.T


def _project(x: np.ndarray) -> np.ndarray:
    return x - x.mean(axis=0)


class FactorPseudoinverse:
    """Applies (factor * pivots * factor^T)^+ for a factorization that keeps a single vertex"""

    def __init__(self, pc: PartialCholesky):
        if len(pc.retained) != 1:
            raise ValueError("A complete factorization must retain exactly one vertex")
        self.pc = pc
        self._inverse_pivots = 1.0 / pc.pivots

    @classmethod
    def build(cls, L: Laplacian, eps: float, rng: Optional[np.random.Generator] = None,
              settings: EstimatorSettings = DEFAULT_SETTINGS) -> "FactorPseudoinverse":
        root = [int(L.vertices[-1])]
        if rng is None:
            return cls(exact_partial_cholesky(L, root))
        return cls(apx_partial_cholesky(L, root, eps, rng, settings))

    def __call__(self, b: np.ndarray) -> np.ndarray:
        y = apply_factor_inverse(self.pc, _project(np.asarray(b, dtype=float)))
        scaled = np.zeros_like(y)
        scale = self._inverse_pivots.reshape((-1,) + (1,) * (y.ndim - 1))
        scaled[self.pc.eliminated] = y[self.pc.eliminated] * scale
        return _project(apply_factor_transpose_inverse(self.pc, scaled))
