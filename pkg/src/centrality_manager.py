# src/centrality_manager.py
# Version: 1.1.0
# Description: Coordinates graph loading, the centrality methods and result files for the CLI
# Changelog:
# 1.1.0 - Integral values written with a trailing .0
# 1.0.0 - Initial implementation

import logging
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import pandas as pd

from src.centrality_report import EDGE, CentralityReport
from src.config_manager import ConfigManager
from src.errors import EpsilonOutOfRangeError
from src.exact_oracle import (
    current_flow_edge_centrality,
    edge_betweenness,
    exact_edge_centralities,
    exact_vertex_centralities,
    kirchhoff_index,
    relative_std_dev,
    spanning_edge_centrality,
)
from src.graph_core import WeightedGraph, require_connected, validate_theta
from src.quad_estimators import edge_cent_comp1, kirchhoff_estimate
from src.settings import DEFAULT_SETTINGS, EstimatorSettings
from src.sherman_morrison import edge_cent_comp2
from src.utils.data_loader import DataLoader, LabeledGraph
from src.utils.helpers import ComputeHelper
from src.vertex_centrality import vertex_cent_comp

COMMANDS = ('edge', 'vertex', 'compare', 'kirchhoff')
METHODS = {
    'edge': ('exact', 'quad-est', 'sherman-morrison'),
    'vertex': ('exact', 'vertex'),
    'kirchhoff': ('exact', 'quad-est'),
    'compare': ('exact',),
}
DEFAULT_METHODS = {'edge': 'exact', 'vertex': 'vertex', 'kirchhoff': 'exact', 'compare': 'exact'}
MEASURES = ('kirchhoff-delta', 'betweenness', 'spanning', 'current-flow')


def format_value(value: float) -> str:
    """12 significant digits; integral values keep a trailing '.0'"""
    text = f"{value:.12g}"
    if text.lstrip('-').isdigit():
        text += '.0'
    return text


@dataclass
class RunConfig:
    command: str
    inputs: List[str]
    fmt: Optional[str] = None
    method: Optional[str] = None
    theta: float = 0.1
    eps: float = 0.2
    seed: int = 0
    output: Optional[str] = None
    delta: bool = False
    top: Optional[int] = None
    theta_sweep: Optional[List[float]] = None
    settings: EstimatorSettings = field(default_factory=lambda: DEFAULT_SETTINGS)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command: {self.command}")
        if self.method is None:
            self.method = DEFAULT_METHODS[self.command]
        if self.method not in METHODS[self.command]:
            raise ValueError(
                f"Method {self.method!r} not available for {self.command} "
                f"(choose from {', '.join(METHODS[self.command])})"
            )
        if not self.inputs:
            raise ValueError("At least one input file is required")
        if len(self.inputs) > 1 and self.command != 'compare':
            raise ValueError(f"{self.command} takes a single input file")
        validate_theta(self.theta)
        for theta in self.theta_sweep or []:
            validate_theta(theta)
        if not 0 < self.eps <= 0.5:
            raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1/2], got {self.eps}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.top is not None and self.top < 1:
            raise ValueError(f"--top must be at least 1, got {self.top}")
        if self.command == 'edge' and self.method == 'quad-est' and self.delta:
            raise ValueError("quad-est estimates C_theta; use sherman-morrison for the delta form")


class CentralityManager:
    VERSION = "1.1.0"

    def __init__(self, config_file: Optional[str] = None,
                 config_manager: Optional[ConfigManager] = None):
        """Initialize centrality manager"""
        self.config_manager = config_manager or ConfigManager(config_file)
        self.settings = self.config_manager.estimator_settings()
        self.logger = logging.getLogger(__name__)
        self.logger.info(f"CentralityManager v{self.VERSION} initialized")

    def run(self, cfg: RunConfig):
        if cfg.command == 'compare':
            return self.cmd_compare(cfg)
        if cfg.command == 'kirchhoff':
            return self.cmd_kirchhoff(cfg)
        return self.cmd_centrality(cfg)

    def _load(self, path: str, fmt: Optional[str]) -> LabeledGraph:
        loaded = DataLoader.load_graph(path, fmt)
        require_connected(loaded.graph)
        return loaded

    def _kirchhoff(self, g: WeightedGraph, cfg: RunConfig) -> float:
        if g.n <= cfg.settings.dense_cap:
            return kirchhoff_index(g, cfg.settings)
        value, _ = kirchhoff_estimate(g, cfg.eps, cfg.seed, cfg.settings)
        return value

    def compute(self, g: WeightedGraph, cfg: RunConfig) -> CentralityReport:
        """Dispatch to the requested method"""
        settings = cfg.settings
        if cfg.command == 'vertex':
            if cfg.method == 'exact':
                return exact_vertex_centralities(g, cfg.theta, settings=settings)
            return vertex_cent_comp(g, cfg.theta, cfg.eps, cfg.seed, settings)

        if cfg.method == 'exact':
            return exact_edge_centralities(g, cfg.theta, cfg.delta, settings)
        if cfg.method == 'quad-est':
            return edge_cent_comp1(g, cfg.theta, cfg.eps, cfg.seed, settings)
        report = edge_cent_comp2(g, cfg.theta, cfg.eps, cfg.seed, settings)
        if cfg.delta:
            return report
        base = self._kirchhoff(g, cfg)
        return replace(report, entries={e: value + base for e, value in report.entries.items()},
                       delta=False)

    def cmd_centrality(self, cfg: RunConfig) -> CentralityReport:
        """Compute one centrality table and write it (plus sidecar) if an output is set"""
        try:
            loaded = self._load(cfg.inputs[0], cfg.fmt)
            g = loaded.graph
            self.logger.info(
                f"Running {cfg.command}/{cfg.method} on {cfg.inputs[0]} "
                f"(n={g.n}, m={g.m}, theta={cfg.theta}, eps={cfg.eps}, seed={cfg.seed})"
            )
            report = self.compute(g, cfg)
            report.require_coverage(range(g.m) if report.kind == EDGE else range(g.n))
            self.logger.info(
                f"{cfg.command}/{cfg.method} finished in "
                f"{ComputeHelper.format_duration(report.wall_time)}"
            )
            if cfg.output:
                self.write_report(report, loaded, cfg)
            return report
        except Exception as e:
            self.logger.error(f"Error computing centrality: {str(e)}")
            raise

    def report_frame(self, report: CentralityReport, loaded: LabeledGraph,
                     top: Optional[int] = None) -> pd.DataFrame:
        order = report.ranking()[:top] if top else report.ids
        if report.kind == EDGE:
            rows = []
            for e in order:
                u, v, _ = loaded.graph.edge(e)
                rows.append({'id_u': loaded.label(u), 'id_v': loaded.label(v),
                             'value': report[e]})
            return pd.DataFrame(rows, columns=['id_u', 'id_v', 'value'])
        return pd.DataFrame(
            [{'id': loaded.label(v), 'value': report[v]} for v in order],
            columns=['id', 'value'],
        )

    def write_report(self, report: CentralityReport, loaded: LabeledGraph,
                     cfg: RunConfig) -> None:
        frame = self.report_frame(report, loaded, cfg.top)
        self._write_csv(frame, cfg.output)
        meta = dict(report.metadata())
        meta.update({'input': cfg.inputs[0], 'n': str(loaded.graph.n),
                     'm': str(loaded.graph.m)})
        self._write_sidecar(meta, cfg.output)

    def cmd_compare(self, cfg: RunConfig) -> pd.DataFrame:
        """Relative standard deviation of each edge measure, per dataset and theta"""
        try:
            rows = []
            for path in cfg.inputs:
                loaded = self._load(path, cfg.fmt)
                g = loaded.graph
                dataset = os.path.splitext(os.path.basename(path))[0]
                self.logger.info(f"Comparing measures on {dataset} (n={g.n}, m={g.m})")
                rivals = {
                    'betweenness': edge_betweenness(g),
                    'spanning': spanning_edge_centrality(g, cfg.settings),
                    'current-flow': current_flow_edge_centrality(g, cfg.settings),
                }
                for theta in cfg.theta_sweep or [cfg.theta]:
                    reports = {'kirchhoff-delta': exact_edge_centralities(
                        g, theta, delta=True, settings=cfg.settings)}
                    reports.update(rivals)
                    for measure in MEASURES:
                        rows.append({
                            'dataset': dataset,
                            'theta': theta,
                            'measure': measure,
                            'rsd': relative_std_dev(reports[measure].values()),
                        })
            frame = pd.DataFrame(rows, columns=['dataset', 'theta', 'measure', 'rsd'])
            if cfg.output:
                self._write_csv(frame, cfg.output)
                self._write_sidecar({'command': 'compare', 'inputs': ','.join(cfg.inputs),
                                     'thetas': ','.join(repr(t) for t in
                                                        cfg.theta_sweep or [cfg.theta])},
                                    cfg.output)
            return frame
        except Exception as e:
            self.logger.error(f"Error in comparison: {str(e)}")
            raise

    def cmd_kirchhoff(self, cfg: RunConfig) -> float:
        try:
            g = self._load(cfg.inputs[0], cfg.fmt).graph
            if cfg.method == 'exact':
                value, samples = kirchhoff_index(g, cfg.settings), None
            else:
                value, samples = kirchhoff_estimate(g, cfg.eps, cfg.seed, cfg.settings)
            self.logger.info(f"Kirchhoff index of {cfg.inputs[0]}: {format_value(value)}")
            if cfg.output:
                self._write_csv(pd.DataFrame([{'kirchhoff_index': value}]), cfg.output)
                meta = {'method': cfg.method, 'eps': repr(cfg.eps), 'seed': str(cfg.seed),
                        'n': str(g.n), 'm': str(g.m)}
                if samples is not None:
                    meta['samples'] = str(samples)
                self._write_sidecar(meta, cfg.output)
            return value
        except Exception as e:
            self.logger.error(f"Error computing Kirchhoff index: {str(e)}")
            raise

    def _write_csv(self, frame: pd.DataFrame, path: str) -> None:
        ComputeHelper.ensure_parent_dir(path)
        frame.to_csv(path, index=False, float_format=format_value, lineterminator='\n')
        self.logger.info(f"Wrote {len(frame)} rows to {path}")

    def _write_sidecar(self, meta: Dict[str, str], output: str) -> None:
        path = ComputeHelper.sidecar_path(output)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write("".join(f"{key}={value}\n" for key, value in meta.items()))
