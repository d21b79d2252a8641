# src/settings.py
# Version: 1.0.0
# Description: Tunable constants threaded through the factorization, solver and estimator layers
# Changelog:
# 1.0.0 - Initial implementation

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class EstimatorSettings:
    # Monte-Carlo probe constants: M = ceil(constant * eps^-2 * ln(2n))
    edge_trace_constant: float = 192.0
    sm_trace_constant: float = 432.0
    hutchinson_constant: float = 48.0
    # JL rows in er_est: k = ceil(jl_constant * eps^-2 * ln n)
    jl_constant: float = 24.0
    # solver tolerance inside er_est: delta = eps / (er_solver_constant * n^3 * U^2)
    er_solver_constant: float = 48.0
    # clique samples per neighbour: s = ceil(sample_factor * eps^-2 * ln n)
    sample_factor: float = 1.0
    # Laplacians with at most this many vertices are eliminated exactly
    exact_threshold: int = 64
    dense_cap: int = 2000
    residual_floor: float = 1e-10
    max_iterations_factor: int = 20
    jobs: int = 1

    def with_overrides(self, **overrides) -> "EstimatorSettings":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


DEFAULT_SETTINGS = EstimatorSettings()
