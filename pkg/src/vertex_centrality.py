# src/vertex_centrality.py
# Version: 1.1.0
# Description: Vertex theta-Kirchhoff centrality through per-vertex Schur complements and
#              Chebyshev solves of the Woodbury middle term
# Changelog:
# 1.1.0 - Per-vertex plans reused across probe blocks
# 1.0.0 - Initial implementation

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.centrality_report import VERTEX, CentralityReport
from src.cholesky import FactorPseudoinverse, apx_partial_cholesky, exact_schur
from src.errors import (
    BadSpectrumBoundError,
    CoverageViolationError,
    DimensionMismatchError,
    EpsilonOutOfRangeError,
    SpectrumViolationError,
)
from src.graph_core import (
    IncidenceBlock,
    Laplacian,
    WeightedGraph,
    closed_neighborhood,
    incidence_block,
    laplacian,
    require_connected,
    rescale_weights,
    validate_theta,
)
from src.probes import (
    DEFAULT_BLOCK_SIZE,
    SAMPLER_STREAM,
    VERTEX_PROBE_STREAM,
    ProbeEnsemble,
    stream_rng,
)
from src.settings import DEFAULT_SETTINGS, EstimatorSettings
from src.solvers import LaplacianSolver, cheb_solve
from src.utils.helpers import ComputeHelper

logger = logging.getLogger(__name__)

RAYLEIGH_TOLERANCE = 1e-9


def _check_epsilon(eps: float, name: str = "epsilon") -> None:
    if not 0 < eps <= 0.5:
        raise EpsilonOutOfRangeError(f"{name} must lie in (0, 1/2], got {eps}")


@dataclass(frozen=True, eq=False)
class EdgeSetOperator:
    """u -> u - (1-theta) W^{1/2} B S^+ B^T W^{1/2} u for an edge set T and S ~ Sc(L, V(T))"""
    incidence: np.ndarray
    root_weights: np.ndarray
    pseudoinverse: FactorPseudoinverse
    theta: float

    @classmethod
    def build(cls, block: IncidenceBlock, schur: Laplacian, theta: float, eps: float,
              rng: Optional[np.random.Generator] = None,
              settings: EstimatorSettings = DEFAULT_SETTINGS) -> "EdgeSetOperator":
        support = block.support()
        if not np.array_equal(support, np.asarray(schur.vertices)):
            raise CoverageViolationError(
                "Schur complement must live exactly on the endpoints of the edge set"
            )
        return cls(
            incidence=block.columns(schur.vertices),
            root_weights=np.sqrt(block.weights),
            pseudoinverse=FactorPseudoinverse.build(schur, eps * theta / 9, rng, settings),
            theta=theta,
        )

    @property
    def size(self) -> int:
        return len(self.root_weights)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        scale = self.root_weights.reshape((-1,) + (1,) * (u.ndim - 1))
        potentials = self.pseudoinverse(self.incidence.T @ (scale * u))
        return u - (1 - self.theta) * scale * (self.incidence @ potentials)

    def rhs(self, z_local: np.ndarray) -> np.ndarray:
        """W^{1/2} B z for z given on the Schur vertices"""
        scale = self.root_weights.reshape((-1,) + (1,) * (z_local.ndim - 1))
        return scale * (self.incidence @ z_local)

    def solve_form(self, b: np.ndarray, eps: float) -> np.ndarray:
        """b^T P^{-1} b through Chebyshev iteration, per column"""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.size:
            raise DimensionMismatchError(f"Vector of length {b.shape[0]} for |T|={self.size}")
        squared = np.sum(b * b, axis=0)
        rayleigh = np.divide(np.sum(b * self(b), axis=0), squared,
                             out=np.ones_like(squared, dtype=float), where=squared > 0)
        if np.any(rayleigh <= 0) or np.any(rayleigh > 1 + RAYLEIGH_TOLERANCE):
            raise SpectrumViolationError(f"Operator Rayleigh quotient {rayleigh} outside (0, 1]")
        kappa = math.exp(2 * eps / 3) / self.theta
        try:
            x = cheb_solve(self, kappa, eps / 3, b)
        except BadSpectrumBoundError as e:
            raise SpectrumViolationError(str(e)) from e
        return np.sum(b * x, axis=0)


def quad_solve(block: IncidenceBlock, b: np.ndarray, theta: float, eps: float,
               schur: Laplacian, seed: Optional[int] = None,
               settings: EstimatorSettings = DEFAULT_SETTINGS):
    """b^T (I - (1-theta) W^{1/2} B L^+ B^T W^{1/2})^{-1} b given schur ~ Sc(L, V(T))"""
    validate_theta(theta)
    _check_epsilon(eps)
    rng = None if seed is None else stream_rng(seed, SAMPLER_STREAM)
    operator = EdgeSetOperator.build(block, schur, theta, eps, rng, settings)
    value = operator.solve_form(np.asarray(b, dtype=float).reshape(operator.size, -1), eps)
    return float(value[0]) if np.ndim(b) == 1 else value


@dataclass(frozen=True, eq=False)
class VertexPlan:
    """Per query vertex v, the operator for T = E(v) on an approximate Sc(L, N[v])"""
    operators: Dict[int, EdgeSetOperator]
    neighborhoods: Dict[int, np.ndarray]
    eps: float

    @property
    def vertices(self) -> List[int]:
        return sorted(self.operators)

    def evaluate(self, Y: np.ndarray) -> Dict[int, np.ndarray]:
        """Per vertex, the Woodbury middle form of every column of Y"""
        Y = np.asarray(Y, dtype=float)
        vector = Y.ndim == 1
        Y = Y.reshape(Y.shape[0], -1)
        out = {}
        for v in self.vertices:
            operator = self.operators[v]
            b = operator.rhs(Y[self.neighborhoods[v]])
            out[v] = operator.solve_form(b, self.eps)
        if vector:
            return {v: float(values[0]) for v, values in out.items()}
        return out


class _SchurRecursion:
    """Splits V^Q by volume and Schur-complements onto closed neighbourhoods"""

    def __init__(self, g: WeightedGraph, eps_schur: float, rng: Optional[np.random.Generator],
                 settings: EstimatorSettings):
        self.g = g
        self.eps_schur = eps_schur
        self.rng = rng
        self.settings = settings
        self.schurs: Dict[int, Laplacian] = {}

    def _restrict(self, S: Laplacian, vertices: Sequence[int]) -> Laplacian:
        target = closed_neighborhood(self.g, vertices)
        if len(target) == S.n:
            return S
        if self.rng is None:
            return exact_schur(S, target)
        return apx_partial_cholesky(S, target, self.eps_schur, self.rng, self.settings).schur

    def run(self, S: Laplacian, query: List[int], depth: int = 0) -> None:
        if len(query) == 1:
            self.schurs[query[0]] = self._restrict(S, query)
            return
        degrees = {v: self.g.degree(v) for v in query}
        volume = sum(degrees.values())
        heavy = [v for v in query if degrees[v] >= volume / 4]
        light = [v for v in query if degrees[v] < volume / 4]
        logger.debug(f"Vertex recursion depth {depth}: |V^Q|={len(query)}, vol={volume}, "
                     f"{len(heavy)} heavy")

        for v in heavy:
            self.schurs[v] = self._restrict(S, [v])
        if not light:
            return
        if heavy:
            self.run(self._restrict(S, light), light, depth + 1)
            return

        prefix, accumulated = [], 0
        for v in light:
            if accumulated >= volume / 4:
                break
            prefix.append(v)
            accumulated += degrees[v]
        rest = light[len(prefix):]
        for side in (prefix, rest):
            self.run(self._restrict(S, side), side, depth + 1)


def build_vertex_plan(g: WeightedGraph, S: Laplacian, query: Sequence[int], theta: float,
                      eps_schur: float, eps_solve: float, seed: Optional[int] = None,
                      settings: EstimatorSettings = DEFAULT_SETTINGS) -> VertexPlan:
    validate_theta(theta)
    _check_epsilon(eps_schur, "Schur budget")
    _check_epsilon(eps_solve, "solve budget")
    query = sorted(set(int(v) for v in query))
    if not query:
        raise CoverageViolationError("Query vertex set is empty")
    needed = set(closed_neighborhood(g, query).tolist())
    if needed != set(np.asarray(S.vertices).tolist()):
        raise CoverageViolationError(
            "Laplacian must live on the query vertices and their neighbours"
        )

    volume = sum(g.degree(v) for v in query)
    level_eps = eps_schur / max(1.0, math.log(volume, 4 / 3))
    rng = None if seed is None else stream_rng(seed, SAMPLER_STREAM)
    recursion = _SchurRecursion(g, level_eps, rng, settings)
    recursion.run(S, query)

    index = S.local_index()
    operators, neighborhoods = {}, {}
    for v in query:
        schur = recursion.schurs[v]
        block = incidence_block(g, g.incident_edges(v))
        operators[v] = EdgeSetOperator.build(block, schur, theta, eps_solve, rng, settings)
        neighborhoods[v] = np.array([index[int(u)] for u in schur.vertices], dtype=int)
    return VertexPlan(operators=operators, neighborhoods=neighborhoods, eps=eps_solve)


def quad_approx(g: WeightedGraph, S: Laplacian, query: Sequence[int], z: np.ndarray,
                theta: float, eps_schur: float, eps_solve: float, seed: Optional[int] = None,
                settings: EstimatorSettings = DEFAULT_SETTINGS) -> Dict[int, float]:
    """Per v in V^Q, b^T (I - (1-theta) W^{1/2} B L^+ B^T W^{1/2})^{-1} b with B = B_{E(v)}, b = W^{1/2} B z"""
    z = np.asarray(z, dtype=float)
    if z.shape[0] != S.n:
        raise DimensionMismatchError(f"Vector of length {z.shape[0]} for {S.n} vertices")
    plan = build_vertex_plan(g, S, query, theta, eps_schur, eps_solve, seed, settings)
    return plan.evaluate(z)


def vertex_cent_comp(g: WeightedGraph, theta: float, eps: float, seed: int = 0,
                     settings: EstimatorSettings = DEFAULT_SETTINGS) -> CentralityReport:
    """Estimate C_theta^Delta(v) for every vertex"""
    validate_theta(theta)
    _check_epsilon(eps)
    require_connected(g)

    with ComputeHelper.stopwatch() as clock:
        scaled, factor = rescale_weights(g)
        n, U = g.n, scaled.max_weight()
        samples = ComputeHelper.probe_count(settings.sm_trace_constant, eps, n)
        delta = theta * eps / (36 * n ** 7 * U ** 4)
        logger.info(f"vertex_cent_comp: n={n}, m={g.m}, theta={theta}, eps={eps}, M={samples}")

        L = laplacian(scaled)
        solver = LaplacianSolver(L, settings, seed)
        plan = build_vertex_plan(scaled, L, range(n), theta, theta * eps / 27, eps / 3,
                                 seed, settings)
        probes = ProbeEnsemble(count=samples, n=n, seed=seed, stream=VERTEX_PROBE_STREAM)

        def chunk(start: int, stop: int) -> np.ndarray:
            forms = plan.evaluate(solver.solve(probes.block(start, stop), delta))
            return np.array([forms[v].sum() for v in range(n)])

        totals = np.sum(
            ComputeHelper.map_chunks(chunk, samples, DEFAULT_BLOCK_SIZE, settings.jobs), axis=0
        )
        estimates = (1 - theta) * n / samples * totals / factor

    return CentralityReport(
        kind=VERTEX,
        method="vertex",
        entries={v: float(estimates[v]) for v in range(n)},
        theta=theta,
        eps=eps,
        seed=seed,
        delta=True,
        wall_time=clock["seconds"],
        samples=samples,
    )
