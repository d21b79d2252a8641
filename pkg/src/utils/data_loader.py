# src/utils/data_loader.py
# Version: 1.2.0
# Description: Utilities for loading graphs (edge lists, GML subset) and writing fixtures
# Changelog:
# 1.2.0 - GML parsed with networkx; parser errors mapped to ParseError
# 1.1.0 - GML subset parser with line-numbered errors; directed inputs symmetrised
# 1.0.0 - Initial implementation

import logging
import os
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from src.errors import DuplicateNodeIdError, ParseError
from src.graph_core import WeightedGraph, build_graph

logger = logging.getLogger(__name__)

FORMATS = ('edgelist', 'gml')

# networkx reports tokenizer and syntax errors as '... at (line, column)'
_GML_POSITION = re.compile(r'at \((\d+), \d+\)$')


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """A graph on dense ids 0..n-1 and the input label of every id"""
    graph: WeightedGraph
    labels: Tuple[str, ...]

    def label(self, vertex: int) -> str:
        return self.labels[vertex]


class _LabelIndex:
    def __init__(self):
        self.ids: Dict[str, int] = {}

    def __call__(self, label: str) -> int:
        if label not in self.ids:
            self.ids[label] = len(self.ids)
        return self.ids[label]

    def labels(self) -> Tuple[str, ...]:
        return tuple(self.ids)


def _parse_weight(token: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"weight {token!r} is not a number", line) from None


class DataLoader:
    VERSION = "1.2.0"

    @staticmethod
    def parse_edge_list(text: str) -> LabeledGraph:
        """Lines ``u v [w]``; '#' starts a comment; labels become ids in order of appearance"""
        index = _LabelIndex()
        triples = []
        for number, raw in enumerate(text.splitlines(), 1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) not in (2, 3):
                raise ParseError(f"expected 'u v [w]', got {len(tokens)} fields", number)
            weight = _parse_weight(tokens[2], number) if len(tokens) == 3 else 1.0
            triples.append((index(tokens[0]), index(tokens[1]), weight))
        graph = build_graph(triples, n=len(index.ids) or None)
        return LabeledGraph(graph=graph, labels=index.labels())

    @staticmethod
    def parse_gml(text: str) -> LabeledGraph:
        """``graph [ node [ id N ] edge [ source S target T value W ] ]`` through networkx"""
        try:
            parsed = nx.parse_gml(text, label='id')
        except nx.NetworkXError as e:
            message = str(e)
            if 'is duplicated' in message and message.startswith('node'):
                raise DuplicateNodeIdError(message) from None
            position = _GML_POSITION.search(message)
            raise ParseError(message, int(position.group(1)) if position else 0) from None

        index = _LabelIndex()
        for node in parsed.nodes():
            index(str(node))
        triples = []
        for source, target, value in parsed.edges(data='value', default=1.0):
            weight = _parse_weight(str(value), 0)
            triples.append((index.ids[str(source)], index.ids[str(target)], weight))

        if parsed.is_directed():
            logger.info("Directed GML input: edge directions dropped, parallel weights summed")
        graph = build_graph(triples, n=len(index.ids) or None)
        return LabeledGraph(graph=graph, labels=index.labels())

    @staticmethod
    def emit_edge_list(g: WeightedGraph, labels: Optional[Sequence[str]] = None) -> str:
        """``u v w`` lines; parse_edge_list reads them back"""
        lines = []
        for u, v, w in g.edges():
            a = labels[u] if labels is not None else str(u)
            b = labels[v] if labels is not None else str(v)
            lines.append(f"{a} {b} {w!r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def load_graph(path: str, fmt: Optional[str] = None) -> LabeledGraph:
        """Read a graph file; the format defaults to the file extension"""
        if fmt is None:
            fmt = 'gml' if path.lower().endswith('.gml') else 'edgelist'
        if fmt not in FORMATS:
            raise ValueError(f"Unsupported graph format: {fmt}")
        if not os.path.exists(path):
            raise FileNotFoundError(f"Input file not found: {path}")
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
        loaded = DataLoader.parse_gml(text) if fmt == 'gml' else DataLoader.parse_edge_list(text)
        logger.info(f"Loaded {path}: n={loaded.graph.n}, m={loaded.graph.m}")
        return loaded

    @staticmethod
    def create_sample_data(output_path: str = 'data/fixtures/') -> List[str]:
        """Write the small reference graphs in both formats"""
        samples = {
            'k2': [(0, 1)],
            'p3': [(0, 1), (1, 2)],
            'triangle': [(0, 1), (1, 2), (0, 2)],
            'star': [(0, 1), (0, 2), (0, 3)],
        }
        os.makedirs(output_path, exist_ok=True)
        written = []
        for name, edges in samples.items():
            edge_list = os.path.join(output_path, f"{name}.edgelist")
            with open(edge_list, 'w', encoding='utf-8') as f:
                f.write(f"# {name}\n")
                f.write("".join(f"{u} {v}\n" for u, v in edges))

            vertices = sorted({x for edge in edges for x in edge})
            gml = os.path.join(output_path, f"{name}.gml")
            with open(gml, 'w', encoding='utf-8') as f:
                f.write("graph [\n  directed 0\n")
                f.write("".join(f"  node [\n    id {v}\n  ]\n" for v in vertices))
                f.write("".join(
                    f"  edge [\n    source {u}\n    target {v}\n  ]\n" for u, v in edges
                ))
                f.write("]\n")
            written.extend([edge_list, gml])
        logger.info(f"Sample graphs written to {output_path}")
        return written
