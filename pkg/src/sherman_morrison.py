# src/sherman_morrison.py
# Version: 1.1.0
# Description: Effective resistance sketching and the rank-one update estimator of C_theta^Delta(e)
# Changelog:
# 1.1.0 - Exact re-solve for edges whose update denominator is close to zero
# 1.0.0 - Initial implementation

import logging
import math
from typing import Dict, Optional

import numpy as np

from src.centrality_report import EDGE, CentralityReport
from src.errors import DenominatorUnderflowError, EpsilonOutOfRangeError
from src.graph_core import (
    WeightedGraph,
    incidence_block,
    laplacian,
    require_connected,
    rescale_weights,
    validate_theta,
)
from src.probes import DEFAULT_BLOCK_SIZE, JL_STREAM, SM_PROBE_STREAM, ProbeEnsemble, stream_rng
from src.settings import DEFAULT_SETTINGS, EstimatorSettings
from src.solvers import LaplacianSolver
from src.utils.helpers import ComputeHelper

logger = logging.getLogger(__name__)

# tolerance for the exact resistance re-solve of degenerate edges
TIGHT_DELTA = 1e-12


def _check_epsilon(eps: float) -> None:
    if not 0 < eps <= 0.5:
        raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1/2], got {eps}")


def jl_dimension(eps: float, n: int, settings: EstimatorSettings = DEFAULT_SETTINGS) -> int:
    return max(1, math.ceil(settings.jl_constant * eps ** -2 * math.log(max(n, 2))))


def er_est(g: WeightedGraph, eps: float, seed: int = 0,
           settings: EstimatorSettings = DEFAULT_SETTINGS,
           solver: Optional[LaplacianSolver] = None) -> Dict[int, float]:
    """JL sketch of W^{1/2} B L^+: r_e ~ ||Q W^{1/2} B L^+ b_e||^2 for every edge"""
    _check_epsilon(eps)
    require_connected(g)
    scaled, factor = rescale_weights(g)
    if solver is None:
        solver = LaplacianSolver(laplacian(scaled), settings, seed)
    rows = jl_dimension(eps, g.n, settings)
    delta = eps / (settings.er_solver_constant * g.n ** 3 * scaled.max_weight() ** 2)

    if rows >= g.n:
        # a sketch this wide compresses nothing; solve against the identity instead
        pinv = solver.solve(np.eye(g.n), delta)
        h, t = scaled.heads, scaled.tails
        resistances = (pinv[h, h] + pinv[t, t] - pinv[h, t] - pinv[t, h]) / factor
        logger.debug(f"er_est: JL width {rows} >= n={g.n}, using {g.n} direct solves")
    else:
        rng = stream_rng(seed, JL_STREAM)
        projection = (rng.integers(0, 2, size=(rows, g.m)) * 2 - 1) / math.sqrt(rows)
        sketch_rhs = incidence_block(scaled, range(g.m)).sqrt_weighted().T @ projection.T
        sketch = solver.solve(np.asarray(sketch_rhs), delta)
        diff = sketch[scaled.heads] - sketch[scaled.tails]
        resistances = np.sum(diff * diff, axis=1) / factor
        logger.debug(f"er_est: {rows} JL rows, delta={delta:.3e}")
    return {e: float(resistances[e]) for e in range(g.m)}


def edge_cent_comp2(g: WeightedGraph, theta: float, eps: float, seed: int = 0,
                    settings: EstimatorSettings = DEFAULT_SETTINGS) -> CentralityReport:
    """Estimate C_theta^Delta(e) = n (1-theta) w_e b_e^T L^+ L^+ b_e / (1 - (1-theta) w_e r_e)"""
    validate_theta(theta)
    _check_epsilon(eps)
    require_connected(g)

    with ComputeHelper.stopwatch() as clock:
        scaled, factor = rescale_weights(g)
        n, U = g.n, scaled.max_weight()
        samples = ComputeHelper.probe_count(settings.sm_trace_constant, eps, n)
        delta = eps / (36 * n ** 7 * U ** 4)
        logger.info(f"edge_cent_comp2: n={n}, m={g.m}, theta={theta}, eps={eps}, M={samples}")

        solver = LaplacianSolver(laplacian(scaled), settings, seed)
        incidence = incidence_block(scaled, range(g.m)).matrix
        probes = ProbeEnsemble(count=samples, n=n, seed=seed, stream=SM_PROBE_STREAM)

        def chunk(start: int, stop: int) -> np.ndarray:
            potentials = incidence @ solver.solve(probes.block(start, stop), delta)
            return np.sum(potentials * potentials, axis=1)

        numerators = np.sum(
            ComputeHelper.map_chunks(chunk, samples, DEFAULT_BLOCK_SIZE, settings.jobs), axis=0
        ) / samples

        er_eps = theta * eps / 9
        resistances = np.array(
            [r for _, r in sorted(er_est(scaled, er_eps, seed, settings, solver).items())]
        )
        weights = scaled.weights
        denominators = 1 - (1 - theta) * weights * resistances

        degenerate = np.flatnonzero(denominators <= theta / 2 * math.exp(-eps))
        if degenerate.size:
            logger.warning(
                f"{degenerate.size} edge(s) with near-zero update denominator; "
                f"re-solving their resistances exactly"
            )
            rhs = incidence[degenerate].T.toarray()
            exact = np.sum(rhs * solver.solve(rhs, TIGHT_DELTA), axis=0)
            resistances[degenerate] = exact
            denominators[degenerate] = 1 - (1 - theta) * weights[degenerate] * exact
            if np.any(denominators[degenerate] <= 0):
                bad = degenerate[denominators[degenerate] <= 0].tolist()
                raise DenominatorUnderflowError(
                    f"Update denominator not positive for edges {bad}; eps too large for theta"
                )

        estimates = n * (1 - theta) * weights * numerators / denominators / factor

    return CentralityReport(
        kind=EDGE,
        method="sherman-morrison",
        entries={e: float(estimates[e]) for e in range(g.m)},
        theta=theta,
        eps=eps,
        seed=seed,
        delta=True,
        wall_time=clock["seconds"],
        samples=samples,
        jl_dimension=min(jl_dimension(er_eps, n, settings), n),
    )
