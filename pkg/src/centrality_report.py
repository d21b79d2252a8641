# src/centrality_report.py
# Version: 1.0.0
# Description: Result container shared by the exact oracle, the estimators and the CLI
# Changelog:
# 1.0.0 - Initial implementation

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.errors import CoverageViolationError

EDGE = "edge"
VERTEX = "vertex"
# C^Delta values may dip below zero by rounding only
DELTA_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CentralityReport:
    kind: str
    method: str
    entries: Dict[int, float]
    theta: Optional[float] = None
    eps: float = 0.0
    seed: Optional[int] = None
    delta: bool = False
    wall_time: float = 0.0
    samples: Optional[int] = None
    jl_dimension: Optional[int] = None
    extra: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (EDGE, VERTEX):
            raise ValueError(f"Unknown report kind: {self.kind}")
        floor = -DELTA_TOLERANCE * max([1.0] + [abs(v) for v in self.entries.values()]) \
            if self.delta else 0.0
        for key, value in self.entries.items():
            if not math.isfinite(value):
                raise ValueError(f"{self.kind} {key}: non-finite value {value}")
            if value < floor:
                raise ValueError(f"{self.kind} {key}: negative centrality {value}")

    @property
    def ids(self) -> List[int]:
        return sorted(self.entries)

    def values(self) -> np.ndarray:
        return np.array([self.entries[i] for i in self.ids], dtype=float)

    def __getitem__(self, key: int) -> float:
        return self.entries[key]

    def __len__(self) -> int:
        return len(self.entries)

    def require_coverage(self, expected: Iterable[int]) -> None:
        expected = set(int(i) for i in expected)
        if expected != set(self.entries):
            missing = sorted(expected - set(self.entries))
            unexpected = sorted(set(self.entries) - expected)
            raise CoverageViolationError(
                f"Report covers the wrong ids (missing {missing}, unexpected {unexpected})"
            )

    def ranking(self) -> List[int]:
        """Ids by decreasing value, ties by id"""
        return sorted(self.entries, key=lambda i: (-self.entries[i], i))

    def top(self, k: int) -> List[Tuple[int, float]]:
        return [(i, self.entries[i]) for i in self.ranking()[:k]]

    def scaled(self, factor: float) -> "CentralityReport":
        return replace(self, entries={i: v * factor for i, v in self.entries.items()})

    def metadata(self) -> Dict[str, str]:
        meta = {
            "kind": self.kind,
            "method": self.method,
            "theta": "" if self.theta is None else repr(self.theta),
            "eps": repr(self.eps),
            "seed": "" if self.seed is None else str(self.seed),
            "delta": str(self.delta).lower(),
            "wall_time": f"{self.wall_time:.6f}",
        }
        if self.samples is not None:
            meta["samples"] = str(self.samples)
        if self.jl_dimension is not None:
            meta["jl_dimension"] = str(self.jl_dimension)
        meta.update(self.extra)
        return meta
