# src/probes.py
# Version: 1.0.0
# Description: Reproducible Rademacher probe vectors and the Hutchinson trace estimator
# Changelog:
# 1.0.0 - Initial implementation

import logging
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from src.utils.helpers import ComputeHelper

logger = logging.getLogger(__name__)

# counter-word streams, one per consumer of randomness
EDGE_PROBE_STREAM = 1
SM_PROBE_STREAM = 2
VERTEX_PROBE_STREAM = 3
TRACE_PROBE_STREAM = 4
JL_STREAM = 5
SAMPLER_STREAM = 6

DEFAULT_BLOCK_SIZE = 512


def stream_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, stream, index); independent of evaluation order"""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, stream, index]))


@dataclass(frozen=True)
class ProbeEnsemble:
    """M independent +-1 vectors of length n, generated on demand"""
    count: int
    n: int
    seed: int = 0
    stream: int = TRACE_PROBE_STREAM

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"probe count must be at least 1, got {self.count}")

    def probe(self, index: int) -> np.ndarray:
        if not 0 <= index < self.count:
            raise IndexError(f"probe {index} outside [0, {self.count})")
        rng = stream_rng(self.seed, self.stream, index)
        return rng.integers(0, 2, size=self.n).astype(float) * 2 - 1

    def block(self, start: int, stop: int) -> np.ndarray:
        """n x (stop - start) matrix whose columns are probes start..stop-1"""
        return np.column_stack([self.probe(i) for i in range(start, stop)])

    def __iter__(self) -> Iterator[np.ndarray]:
        return (self.probe(i) for i in range(self.count))


def hutchinson_trace(quad: Callable[[np.ndarray], np.ndarray], count: int, n: int,
                     seed: int = 0, jobs: int = 1, stream: int = TRACE_PROBE_STREAM,
                     block_size: int = DEFAULT_BLOCK_SIZE) -> float:
    """(1/M) sum_i z_i^T A z_i where ``quad`` maps an n x k probe block to its k forms"""
    probes = ProbeEnsemble(count=count, n=n, seed=seed, stream=stream)

    def chunk(start: int, stop: int) -> float:
        return float(np.sum(quad(probes.block(start, stop))))

    partial = ComputeHelper.map_chunks(chunk, count, block_size, jobs)
    logger.debug(f"Hutchinson trace over {count} probes of dimension {n}")
    return sum(partial) / count
