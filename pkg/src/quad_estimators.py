# src/quad_estimators.py
# Version: 1.2.0
# Description: Recursive evaluation of z^T (L with one edge theta-deleted)^+ z for every query edge,
#              and the Monte-Carlo edge centrality / Kirchhoff index estimators built on it
# Changelog:
# 1.2.0 - Recursion plans evaluated on probe blocks
# 1.1.0 - Kirchhoff index estimate
# 1.0.0 - Initial implementation

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from src.centrality_report import EDGE, CentralityReport
from src.cholesky import (
    PartialCholesky,
    apply_factor_inverse,
    apx_partial_cholesky,
    exact_partial_cholesky,
)
from src.errors import CoverageViolationError, DimensionMismatchError, EpsilonOutOfRangeError
from src.graph_core import (
    Laplacian,
    WeightedGraph,
    laplacian,
    require_connected,
    rescale_weights,
    validate_theta,
)
from src.probes import (
    DEFAULT_BLOCK_SIZE,
    EDGE_PROBE_STREAM,
    SAMPLER_STREAM,
    TRACE_PROBE_STREAM,
    ProbeEnsemble,
    hutchinson_trace,
    stream_rng,
)
from src.settings import DEFAULT_SETTINGS, EstimatorSettings
from src.solvers import LaplacianSolver
from src.utils.helpers import ComputeHelper

logger = logging.getLogger(__name__)

# leaves consume no budget; keeps child requests inside the validated range
MIN_CHILD_EPSILON = 1e-12


@dataclass(frozen=True, eq=False)
class QuadRequest:
    """Query edges E^Q of a Laplacian with their endpoints (global ids) and weights"""
    laplacian: Laplacian
    edge_ids: np.ndarray
    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    theta: float
    eps: float = 0.5

    def __post_init__(self):
        validate_theta(self.theta)
        if not 0 < self.eps <= 0.5:
            raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1/2], got {self.eps}")
        if not (len(self.edge_ids) == len(self.heads) == len(self.tails) == len(self.weights)):
            raise DimensionMismatchError("Query edge arrays differ in length")
        covered = set(self.heads.tolist()) | set(self.tails.tolist())
        vertices = set(self.laplacian.vertices.tolist())
        if covered != vertices:
            raise CoverageViolationError(
                f"Query edges must cover every vertex of the Laplacian "
                f"(uncovered: {sorted(vertices - covered)[:10]}, "
                f"foreign: {sorted(covered - vertices)[:10]})"
            )

    @classmethod
    def for_graph(cls, g: WeightedGraph, theta: float, eps: float = 0.5,
                  edge_ids: Optional[Sequence[int]] = None,
                  L: Optional[Laplacian] = None) -> "QuadRequest":
        ids = np.arange(g.m) if edge_ids is None else np.array(sorted(set(edge_ids)), dtype=int)
        return cls(
            laplacian=laplacian(g) if L is None else L,
            edge_ids=ids,
            heads=np.asarray(g.heads[ids]),
            tails=np.asarray(g.tails[ids]),
            weights=np.asarray(g.weights[ids], dtype=float),
            theta=theta,
            eps=eps,
        )

    @property
    def size(self) -> int:
        return len(self.edge_ids)

    def subset(self, positions: np.ndarray, L: Laplacian, eps: float) -> "QuadRequest":
        return QuadRequest(
            laplacian=L,
            edge_ids=self.edge_ids[positions],
            heads=self.heads[positions],
            tails=self.tails[positions],
            weights=self.weights[positions],
            theta=self.theta,
            eps=eps,
        )

    def query_laplacian(self, positions: np.ndarray) -> sp.csr_matrix:
        """Laplacian of the query edges at ``positions`` in this level's local indexing"""
        index = self.laplacian.local_index()
        rows = [index[int(u)] for u in self.heads[positions]]
        cols = [index[int(v)] for v in self.tails[positions]]
        return Laplacian.from_edges(
            self.laplacian.vertices, rows, cols, self.weights[positions]
        ).matrix


@dataclass(frozen=True, eq=False)
class QuadPlan:
    """One recursion level.

    A leaf holds a single edge on a two-vertex Laplacian; an inner node holds, per
    half of the query edges, the factorization onto the half's endpoints and the
    child plan on the resulting Schur complement.
    """
    vertices: np.ndarray
    theta: float
    leaf_edge: Optional[int] = None
    leaf_conductance: float = 0.0
    branches: Tuple[Tuple[PartialCholesky, "QuadPlan"], ...] = ()

    @property
    def depth(self) -> int:
        return 1 + max((child.depth for _, child in self.branches), default=0)

    def edge_ids(self) -> List[int]:
        if self.leaf_edge is not None:
            return [self.leaf_edge]
        return [e for _, child in self.branches for e in child.edge_ids()]

    def _evaluate(self, Z: np.ndarray) -> Dict[int, np.ndarray]:
        if self.leaf_edge is not None:
            diff = Z[0] - Z[1]
            return {self.leaf_edge: diff * diff / (4 * self.leaf_conductance)}
        out: Dict[int, np.ndarray] = {}
        for pc, child in self.branches:
            Y = apply_factor_inverse(pc, Z)
            Y_F = Y[pc.eliminated]
            eliminated = np.sum(Y_F * Y_F / pc.pivots[:, None], axis=0)
            for e, forms in child._evaluate(Y[pc.retained]).items():
                out[e] = forms + eliminated
        return out

    def evaluate(self, Z: np.ndarray) -> Dict[int, np.ndarray]:
        """Per query edge, z^T (L theta-deleted at e)^+ z for every column z of Z"""
        Z = np.asarray(Z, dtype=float)
        if Z.shape[0] != len(self.vertices):
            raise DimensionMismatchError(f"Probe of length {Z.shape[0]} for {len(self.vertices)} vertices")
        vector = Z.ndim == 1
        Z = Z.reshape(len(self.vertices), -1)
        out = self._evaluate(Z - Z.mean(axis=0))
        if vector:
            return {e: float(v[0]) for e, v in out.items()}
        return out


def _build(request: QuadRequest, rng: Optional[np.random.Generator],
           settings: EstimatorSettings, level: int = 0) -> QuadPlan:
    L = request.laplacian
    if L.n == 2:
        if request.size != 1:
            raise CoverageViolationError("Two-vertex level with more than one query edge")
        total = -float(L.matrix[0, 1])
        conductance = total - (1 - request.theta) * float(request.weights[0])
        return QuadPlan(
            vertices=L.vertices,
            theta=request.theta,
            leaf_edge=int(request.edge_ids[0]),
            leaf_conductance=conductance,
        )

    level_eps = request.eps / max(1.0, math.log2(request.size))
    remaining = max(request.eps - level_eps, MIN_CHILD_EPSILON)
    half = request.size // 2
    logger.debug(
        f"Quad recursion level {level}: |V|={L.n}, |E^Q|={request.size}, "
        f"level budget {level_eps:.4g}"
    )

    branches = []
    for positions in (np.arange(half), np.arange(half, request.size)):
        if not len(positions):
            continue
        retained = np.union1d(request.heads[positions], request.tails[positions])
        if rng is None:
            pc = exact_partial_cholesky(L, retained)
            schur = pc.schur
        else:
            query = request.query_laplacian(positions)
            without = Laplacian(matrix=(L.matrix - query).tocsr(), vertices=L.vertices)
            pc = apx_partial_cholesky(without, retained, level_eps, rng, settings)
            # the query edges live inside the retained set, so add them back unchanged
            schur = Laplacian(
                matrix=(pc.schur.matrix + query[pc.retained][:, pc.retained]).tocsr(),
                vertices=pc.schur.vertices,
            )
        child = request.subset(positions, schur, remaining)
        branches.append((pc, _build(child, rng, settings, level + 1)))
    return QuadPlan(vertices=L.vertices, theta=request.theta, branches=tuple(branches))


def build_quad_plan(request: QuadRequest, seed: Optional[int] = None,
                    settings: EstimatorSettings = DEFAULT_SETTINGS) -> QuadPlan:
    """Exact recursion when ``seed`` is None, sampled eliminations otherwise"""
    rng = None if seed is None else stream_rng(seed, SAMPLER_STREAM)
    return _build(request, rng, settings)


def exact_quad(request: QuadRequest, z: np.ndarray) -> Dict[int, float]:
    return build_quad_plan(request).evaluate(z)


def quad_est(request: QuadRequest, z: np.ndarray, seed: int = 0,
             settings: EstimatorSettings = DEFAULT_SETTINGS) -> Dict[int, float]:
    return build_quad_plan(request, seed, settings).evaluate(z)


def edge_cent_comp1(g: WeightedGraph, theta: float, eps: float, seed: int = 0,
                    settings: EstimatorSettings = DEFAULT_SETTINGS) -> CentralityReport:
    """Monte-Carlo estimate of C_theta(e) for every edge"""
    validate_theta(theta)
    if not 0 < eps <= 0.5:
        raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1/2], got {eps}")
    require_connected(g)

    with ComputeHelper.stopwatch() as clock:
        scaled, factor = rescale_weights(g)
        samples = ComputeHelper.probe_count(settings.edge_trace_constant, eps, g.n)
        logger.info(f"edge_cent_comp1: n={g.n}, m={g.m}, theta={theta}, eps={eps}, M={samples}")

        request = QuadRequest.for_graph(scaled, theta, eps / 2)
        plan = build_quad_plan(request, seed, settings)
        probes = ProbeEnsemble(count=samples, n=g.n, seed=seed, stream=EDGE_PROBE_STREAM)

        def chunk(start: int, stop: int) -> np.ndarray:
            forms = plan.evaluate(probes.block(start, stop))
            return np.array([forms[e].sum() for e in range(g.m)])

        partial = ComputeHelper.map_chunks(chunk, samples, DEFAULT_BLOCK_SIZE, settings.jobs)
        totals = np.sum(partial, axis=0)
        estimates = g.n / samples * totals / factor

    return CentralityReport(
        kind=EDGE,
        method="quad-est",
        entries={e: float(estimates[e]) for e in range(g.m)},
        theta=theta,
        eps=eps,
        seed=seed,
        wall_time=clock["seconds"],
        samples=samples,
    )


def kirchhoff_estimate(g: WeightedGraph, eps: float, seed: int = 0,
                       settings: EstimatorSettings = DEFAULT_SETTINGS) -> Tuple[float, int]:
    """Hutchinson estimate of n tr(L^+); returns (estimate, probe count)"""
    if not 0 < eps <= 0.5:
        raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1/2], got {eps}")
    require_connected(g)
    scaled, factor = rescale_weights(g)
    samples = ComputeHelper.probe_count(settings.hutchinson_constant, eps, g.n)
    solver = LaplacianSolver(laplacian(scaled), settings, seed)
    delta = eps / (settings.er_solver_constant * g.n ** 3 * scaled.max_weight() ** 2)

    def quad(Z: np.ndarray) -> np.ndarray:
        return np.sum(Z * solver.solve(Z, delta), axis=0)

    trace = hutchinson_trace(quad, samples, g.n, seed, settings.jobs, TRACE_PROBE_STREAM)
    logger.info(f"Kirchhoff estimate from {samples} probes: {g.n * trace / factor:.6g}")
    return g.n * trace / factor, samples
