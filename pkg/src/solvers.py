# src/solvers.py
# Version: 1.1.0
# Description: Dense pseudoinverse oracle, analytic spectrum bounds, preconditioned Laplacian solver
#              and Chebyshev iteration
# Changelog:
# 1.1.0 - Block right-hand sides and reusable LaplacianSolver
# 1.0.0 - Initial implementation

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components

from src.cholesky import FactorPseudoinverse
from src.errors import (
    BadSpectrumBoundError,
    DimensionCapError,
    DimensionMismatchError,
    DisconnectedError,
    EpsilonOutOfRangeError,
    NoConvergenceError,
    WeightsOutOfRangeError,
)
from src.graph_core import Laplacian, validate_theta
from src.settings import DEFAULT_SETTINGS, EstimatorSettings

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
# lambda_2 below this fraction of the Laplacian scale means a second zero eigenvalue
KERNEL_TOLERANCE = 1e-12
# elimination budget for the PCG preconditioner
PRECONDITIONER_EPSILON = 0.5


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Dense symmetric matrix, rows indexed like the Laplacian it came from"""
    matrix: np.ndarray
    vertices: np.ndarray

    def __post_init__(self):
        scale = max(float(np.abs(self.matrix).max(initial=0.0)), 1.0)
        if np.abs(self.matrix - self.matrix.T).max(initial=0.0) > SYMMETRY_TOLERANCE * scale:
            raise ValueError("DenseOperator matrix is not symmetric")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def __matmul__(self, other: np.ndarray) -> np.ndarray:
        return self.matrix @ other

    def quad(self, z: np.ndarray) -> np.ndarray:
        """z^T A z, per column for a block"""
        z = np.asarray(z, dtype=float)
        return np.sum(z * (self.matrix @ z), axis=0)


@dataclass(frozen=True)
class SolveContract:
    delta: float
    eps: float
    theta: float
    samples: int
    max_weight: float
    seed: int = 0

    def __post_init__(self):
        validate_theta(self.theta)
        if not 0 < self.eps <= 0.5:
            raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1/2], got {self.eps}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.samples < 1:
            raise ValueError(f"sample count must be at least 1, got {self.samples}")
        if not self.max_weight >= 1:
            raise WeightsOutOfRangeError(f"U must be at least 1, got {self.max_weight}")


def _require_connected(L: Laplacian) -> None:
    n_components, _ = connected_components(L.matrix, directed=False)
    if n_components > 1:
        raise DisconnectedError(f"Laplacian on {L.n} vertices has {n_components} components")


def dense_pseudoinverse(L: Laplacian, cap: int = DEFAULT_SETTINGS.dense_cap) -> DenseOperator:
    if L.n > cap:
        raise DimensionCapError(f"Dense pseudoinverse limited to {cap} vertices, got {L.n}")
    values, vectors = np.linalg.eigh(L.dense())
    if L.n > 1 and values[1] < KERNEL_TOLERANCE * L.scale():
        raise DisconnectedError(f"Second eigenvalue {values[1]:.3e} is numerically zero")
    kept = vectors[:, 1:]
    pinv = (kept / values[1:]) @ kept.T
    return DenseOperator(matrix=(pinv + pinv.T) / 2, vertices=L.vertices)


def eigen_bounds(L: Laplacian, max_weight: float) -> Tuple[float, float]:
    """Certified (lambda_2 lower bound, lambda_n upper bound) for weights in [1, U]"""
    weights = L.off_diagonal_weights()
    slack = 1e-12
    if max_weight < 1 or (weights.size and (
            weights.min() < 1 - slack or weights.max() > max_weight * (1 + slack))):
        raise WeightsOutOfRangeError(f"Edge weights must lie in [1, {max_weight}]")
    n = L.n
    return 1.0 / (2 * n ** 4 * max_weight ** 2), n * max_weight


def certified_spectrum(L: Laplacian) -> Tuple[float, float]:
    """eigen_bounds for an arbitrary positive weighting, undoing the min-weight rescale"""
    weights = L.off_diagonal_weights()
    if not weights.size:
        raise DisconnectedError("Laplacian has no edges")
    factor = float(weights.min())
    upper = float(weights.max()) / factor
    n = L.n
    return factor / (2 * n ** 4 * upper ** 2), factor * n * upper


def _column_norms(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=0))


class LaplacianSolver:
    """PCG on L y = z with an approximate complete Cholesky preconditioner.

    The preconditioner and the certified spectrum are computed once, so the
    same solver can serve many right-hand sides (vectors or n x k blocks).
    """
    VERSION = "1.1.0"

    def __init__(self, L: Laplacian, settings: EstimatorSettings = DEFAULT_SETTINGS,
                 seed: Optional[int] = None):
        _require_connected(L)
        self.L = L
        self.settings = settings
        rng = np.random.default_rng(seed) if L.n > settings.exact_threshold else None
        self.preconditioner = FactorPseudoinverse.build(L, PRECONDITIONER_EPSILON, rng, settings)
        self.lambda_min, self.lambda_max = certified_spectrum(L)
        analytic = math.ceil(0.5 * math.sqrt(self.lambda_max / self.lambda_min)
                             * math.log(2 / settings.residual_floor))
        self.max_iterations = max(1, min(analytic, settings.max_iterations_factor * max(L.n, 5)))
        self._floor_warned = False

    def _threshold(self, delta: float) -> float:
        ratio = delta * math.sqrt(self.lambda_min / self.lambda_max)
        if ratio < self.settings.residual_floor:
            if not self._floor_warned:
                logger.warning(
                    f"Residual target {ratio:.2e} below floating-point floor; "
                    f"using {self.settings.residual_floor:.1e}"
                )
                self._floor_warned = True
            return self.settings.residual_floor
        return ratio

    def solve(self, z: np.ndarray, delta: float) -> np.ndarray:
        """y with ||y - L^+ z||_L <= delta ||L^+ z||_L, y orthogonal to the all-ones vector"""
        if not delta > 0:
            raise ValueError(f"delta must be positive, got {delta}")
        z = np.asarray(z, dtype=float)
        if z.shape[0] != self.L.n:
            raise DimensionMismatchError(f"Right-hand side of length {z.shape[0]} for n={self.L.n}")
        vector = z.ndim == 1
        b = z.reshape(self.L.n, -1)
        b = b - b.mean(axis=0)

        targets = self._threshold(delta) * _column_norms(b)
        x = np.zeros_like(b)
        r = b.copy()
        active = _column_norms(r) > targets
        if not active.any():
            return x[:, 0] if vector else x

        s = self.preconditioner(r)
        p = s.copy()
        rs = np.sum(r * s, axis=0)
        for iteration in range(1, self.max_iterations + 1):
            Ap = self.L.matrix @ p
            curvature = np.sum(p * Ap, axis=0)
            alpha = np.divide(rs, curvature, out=np.zeros_like(rs), where=active & (curvature > 0))
            x += alpha * p
            r -= alpha * Ap
            active = _column_norms(r) > targets
            if not active.any():
                logger.debug(f"PCG converged in {iteration} iterations (n={self.L.n})")
                x -= x.mean(axis=0)
                return x[:, 0] if vector else x
            s = self.preconditioner(r)
            rs_next = np.sum(r * s, axis=0)
            beta = np.divide(rs_next, rs, out=np.zeros_like(rs), where=active & (rs > 0))
            p = s + beta * p
            rs = rs_next

        raise NoConvergenceError(
            f"PCG did not reach the residual target within {self.max_iterations} iterations"
        )


def lapl_solve(L: Laplacian, z: np.ndarray, delta: float,
               settings: EstimatorSettings = DEFAULT_SETTINGS,
               seed: Optional[int] = None) -> np.ndarray:
    return LaplacianSolver(L, settings, seed).solve(z, delta)


def chebyshev_iterations(kappa: float, eps: float) -> int:
    if kappa <= 1 + 1e-12:
        return 1
    target = -math.expm1(-eps)
    root = math.sqrt(kappa)
    return max(1, math.ceil(math.log(2 / target) / math.log((root + 1) / (root - 1))))


def cheb_solve(apply_P: Callable[[np.ndarray], np.ndarray], kappa: float, eps: float,
               b: np.ndarray) -> np.ndarray:
    """Chebyshev iteration for P x = b with spectrum of P in [1/kappa, 1].

    The iteration count depends only on (kappa, eps), so the result is a fixed
    polynomial in P applied to b.
    """
    if kappa < 1:
        raise ValueError(f"kappa must be at least 1, got {kappa}")
    if not eps > 0:
        raise EpsilonOutOfRangeError(f"epsilon must be positive, got {eps}")
    b = np.asarray(b, dtype=float)
    lower, upper = 1.0 / kappa, 1.0
    centre = (upper + lower) / 2
    radius = (upper - lower) / 2

    x = np.zeros_like(b)
    r = b.copy()
    p = np.zeros_like(b)
    alpha = 0.0
    iterations = chebyshev_iterations(kappa, eps)
    for k in range(iterations):
        if k == 0:
            p = r.copy()
            alpha = 1.0 / centre
        else:
            beta = 0.5 * (radius * alpha) ** 2 if k == 1 else (radius * alpha / 2) ** 2
            alpha = 1.0 / (centre - beta / alpha)
            p = r + beta * p
        x = x + alpha * p
        r = r - alpha * apply_P(p)

    if not np.all(np.isfinite(x)) or np.any(_column_norms(r.reshape(len(r), -1))
                                            > 2 * _column_norms(b.reshape(len(b), -1)) + 1e-300):
        raise BadSpectrumBoundError("Chebyshev residual grew; operator spectrum outside [1/kappa, 1]")
    logger.debug(f"Chebyshev: {iterations} iterations, kappa={kappa:.3g}")
    return x
