# tests/test_sherman_morrison.py
# Version: 1.1.0
# Description: Tests for resistance sketching and the rank-one update estimator of C_theta^Delta(e)
# Changelog:
# 1.1.0 - Seed sweep for edge_cent_comp2
# 1.0.0 - Initial test implementation

import numpy as np
import pytest

from src.errors import EpsilonOutOfRangeError
from src.exact_oracle import effective_resistance, exact_edge_centralities
from src.settings import EstimatorSettings
from src.sherman_morrison import edge_cent_comp2, er_est, jl_dimension


class TestErEst:
    def test_jl_dimension(self):
        """Test jl dimension"""
        assert jl_dimension(0.5, 100) == int(np.ceil(24 * 4 * np.log(100)))
        assert jl_dimension(0.5, 1) == jl_dimension(0.5, 2)

    def test_small_graph_is_exact(self, triangle):
        """Test small graph is exact"""
        resistances = er_est(triangle, 0.5)
        assert list(resistances.values()) == pytest.approx([2 / 3] * 3)

    def test_weighted_tree(self):
        """Test tree resistances are inverse weights"""
        from src.graph_core import build_graph

        g = build_graph([(0, 1, 2.0), (1, 2, 4.0), (1, 3, 8.0)])
        resistances = er_est(g, 0.25)
        assert [resistances[e] for e in range(3)] == pytest.approx([0.5, 0.25, 0.125])

    @pytest.mark.slow
    def test_sketch(self, random_graph):
        """Test a sketch narrower than n keeps resistances close"""
        g = random_graph(120, 200, seed=3, max_weight=2.0)
        settings = EstimatorSettings(jl_constant=4.0)
        assert jl_dimension(0.5, g.n, settings) < g.n
        resistances = er_est(g, 0.5, seed=1, settings=settings)
        ratios = np.array([resistances[e] / effective_resistance(g, *g.edge(e)[:2])
                           for e in range(g.m)])
        assert np.all((ratios > 0.3) & (ratios < 2.0))
        assert np.mean(np.abs(ratios - 1)) < 0.25

    def test_epsilon_range(self, p3):
        """Test epsilon range"""
        with pytest.raises(EpsilonOutOfRangeError):
            er_est(p3, 0.0)


class TestEdgeCentComp2:
    @pytest.mark.parametrize("fixture, expected", [
        ("k2", [1.0]),
        ("triangle", [0.5, 0.5, 0.5]),
        ("p3", [2.0, 2.0]),
    ])
    def test_known_values(self, request, fixture, expected, fast_settings):
        """Test known values"""
        g = request.getfixturevalue(fixture)
        report = edge_cent_comp2(g, 0.5, 0.25, seed=0, settings=fast_settings)
        assert report.values().tolist() == pytest.approx(expected, rel=0.25)
        assert report.delta and report.method == "sherman-morrison"

    def test_tracks_exact_on_weighted_graph(self, random_graph, fast_settings):
        """Test tracks exact on weighted graph"""
        g = random_graph(15, 15, seed=7, max_weight=4.0)
        report = edge_cent_comp2(g, 0.3, 0.2, seed=2, settings=fast_settings)
        exact = exact_edge_centralities(g, 0.3, delta=True)
        for e in range(g.m):
            assert report[e] == pytest.approx(exact[e], rel=0.3)

    @pytest.mark.slow
    def test_seed_sweep_within_band(self, karate, fast_settings):
        """Test at least 19 of 20 seeds keep every edge within exp(+-0.2) of the exact value"""
        exact = exact_edge_centralities(karate, 0.5, delta=True).values()
        in_band = 0
        for seed in range(20):
            report = edge_cent_comp2(karate, 0.5, 0.2, seed=seed, settings=fast_settings)
            in_band += bool(np.all(np.abs(np.log(report.values() / exact)) <= 0.2))
        assert in_band >= 19

    def test_metadata(self, triangle, fast_settings):
        """Test sidecar metadata carries the JL width and sample count"""
        report = edge_cent_comp2(triangle, 0.5, 0.5, seed=3, settings=fast_settings)
        meta = report.metadata()
        assert meta["delta"] == "true"
        assert meta["seed"] == "3"
        assert int(meta["jl_dimension"]) == triangle.n
        assert int(meta["samples"]) == report.samples
