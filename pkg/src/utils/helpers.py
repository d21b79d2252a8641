# src/utils/helpers.py
# Version: 1.1.0
# Description: Helper functions shared by the estimators and the command layer
# Changelog:
# 1.1.0 - Chunked thread-pool evaluation with ordered reduction
# 1.0.0 - Initial implementation

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Dict, Iterator, List, Tuple, TypeVar

T = TypeVar("T")


class ComputeHelper:
    VERSION = "1.1.0"

    @staticmethod
    def probe_count(constant: float, eps: float, n: int) -> int:
        """ceil(constant * eps^-2 * ln(2n))"""
        return max(1, math.ceil(constant * eps ** -2 * math.log(2 * n)))

    @staticmethod
    def chunk_ranges(count: int, chunk_size: int) -> List[Tuple[int, int]]:
        """Contiguous [start, stop) ranges covering 0..count"""
        chunk_size = max(1, chunk_size)
        return [(start, min(start + chunk_size, count)) for start in range(0, count, chunk_size)]

    @staticmethod
    def map_chunks(fn: Callable[[int, int], T], count: int, chunk_size: int,
                   jobs: int = 1) -> List[T]:
        """Evaluate ``fn(start, stop)`` over every chunk; results come back in chunk order"""
        ranges = ComputeHelper.chunk_ranges(count, chunk_size)
        if jobs <= 1 or len(ranges) <= 1:
            return [fn(start, stop) for start, stop in ranges]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda bounds: fn(*bounds), ranges))

    @staticmethod
    @contextmanager
    def stopwatch() -> Iterator[Dict[str, float]]:
        """Yields a dict whose ``seconds`` entry is filled in on exit"""
        record = {"seconds": 0.0}
        start = time.perf_counter()
        try:
            yield record
        finally:
            record["seconds"] = time.perf_counter() - start

    @staticmethod
    def ensure_parent_dir(file_path: str) -> None:
        parent = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(parent, exist_ok=True)

    @staticmethod
    def sidecar_path(output_path: str) -> str:
        root, _ = os.path.splitext(output_path)
        return f"{root}.meta"

    @staticmethod
    def format_duration(seconds: float) -> str:
        if seconds < 1:
            return f"{seconds * 1000:.1f} ms"
        if seconds < 60:
            return f"{seconds:.2f} s"
        return f"{int(seconds // 60)} min {seconds % 60:.0f} s"
