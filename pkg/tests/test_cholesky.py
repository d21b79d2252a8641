# tests/test_cholesky.py
# Version: 1.1.0
# Description: Tests for exact and sampled partial Cholesky elimination
# Changelog:
# 1.1.0 - Schur identities, deletion commuting with elimination and sampled sandwich checks
# 1.0.0 - Initial test implementation

import numpy as np
import pytest

from src.cholesky import (
    FactorPseudoinverse,
    apply_factor_inverse,
    apply_factor_transpose_inverse,
    apx_partial_cholesky,
    exact_partial_cholesky,
    exact_schur,
    reassemble,
)
from src.errors import DimensionMismatchError, EmptyRetainSetError, EpsilonOutOfRangeError
from src.graph_core import build_graph, laplacian, theta_delete
from src.settings import EstimatorSettings
from src.solvers import dense_pseudoinverse


def complete_graph(n):
    return build_graph([(u, v) for u in range(n) for v in range(u + 1, n)])


def sandwich_ratios(exact, approx):
    """Generalized eigenvalues of approx against exact on the complement of the all-ones vector"""
    k = exact.shape[0]
    basis = np.linalg.svd(np.eye(k) - 1.0 / k)[0][:, :k - 1]
    root = np.linalg.cholesky(basis.T @ exact @ basis)
    inverse_root = np.linalg.inv(root)
    return np.linalg.eigvalsh(inverse_root @ basis.T @ approx @ basis @ inverse_root.T)


class TestExactPartialCholesky:
    def test_p3_middle_vertex(self, p3):
        """Test p3 middle vertex"""
        pc = exact_partial_cholesky(laplacian(p3), [0, 2])
        np.testing.assert_array_equal(pc.eliminated, [1])
        np.testing.assert_allclose(pc.pivots, [2.0])
        np.testing.assert_array_equal(pc.schur.vertices, [0, 2])
        np.testing.assert_allclose(pc.schur.dense(), [[0.5, -0.5], [-0.5, 0.5]])
        assert pc.exact

    def test_star_centre_gives_triangle(self, star):
        """Test star centre gives triangle"""
        schur = exact_schur(laplacian(star), [1, 2, 3])
        third = 1.0 / 3.0
        expected = np.array([
            [2 * third, -third, -third],
            [-third, 2 * third, -third],
            [-third, -third, 2 * third],
        ])
        np.testing.assert_allclose(schur.dense(), expected)

    def test_keep_everything_is_identity(self, k2):
        """Test keep everything is identity"""
        L = laplacian(k2)
        pc = exact_partial_cholesky(L, [0, 1])
        assert len(pc.eliminated) == 0
        np.testing.assert_allclose(pc.schur.dense(), L.dense())
        np.testing.assert_allclose(pc.factor_dense(), np.eye(2))

    def test_order_independence(self, random_graph):
        """Test the Schur complement does not depend on elimination order"""
        g = random_graph(12, 10, seed=7, max_weight=4.0)
        L = laplacian(g)
        retained = [0, 5, 11]
        eliminate = [v for v in range(12) if v not in retained]
        forward = exact_schur(L, retained, order=eliminate)
        backward = exact_schur(L, retained, order=eliminate[::-1])
        default = exact_schur(L, retained)
        np.testing.assert_allclose(forward.dense(), backward.dense(), atol=1e-10)
        np.testing.assert_allclose(forward.dense(), default.dense(), atol=1e-10)

    def test_schur_matches_block_formula(self, random_graph):
        """Test schur matches block formula"""
        g = random_graph(10, 8, seed=2, max_weight=3.0)
        dense = laplacian(g).dense()
        keep = np.array([1, 4, 8])
        drop = np.setdiff1d(np.arange(10), keep)
        expected = dense[np.ix_(keep, keep)] - dense[np.ix_(keep, drop)] @ np.linalg.solve(
            dense[np.ix_(drop, drop)], dense[np.ix_(drop, keep)])
        schur = exact_schur(laplacian(g), keep)
        np.testing.assert_allclose(schur.dense(), expected, atol=1e-10)
        assert schur.is_valid()

    def test_schur_of_schur(self, random_graph):
        """Test schur of schur"""
        g = random_graph(15, 12, seed=13, max_weight=2.0)
        L = laplacian(g)
        middle = exact_schur(L, range(7))
        np.testing.assert_allclose(exact_schur(middle, [1, 3, 5]).dense(),
                                   exact_schur(L, [1, 3, 5]).dense(), atol=1e-10)

    def test_reassemble(self, random_graph):
        """Test the factor and pivots rebuild L"""
        g = random_graph(9, 6, seed=4, max_weight=2.0)
        L = laplacian(g)
        pc = exact_partial_cholesky(L, [2, 3])
        np.testing.assert_allclose(reassemble(pc), L.dense(), atol=1e-10)

    def test_factor_solves(self, random_graph):
        """Test factor solves"""
        g = random_graph(8, 5, seed=9)
        pc = exact_partial_cholesky(laplacian(g), [0])
        factor = pc.factor_dense()
        b = np.arange(8, dtype=float)
        np.testing.assert_allclose(factor @ apply_factor_inverse(pc, b), b, atol=1e-12)
        np.testing.assert_allclose(factor.T @ apply_factor_transpose_inverse(pc, b), b,
                                   atol=1e-12)
        block = np.column_stack([b, -b, np.ones(8)])
        np.testing.assert_allclose(factor @ apply_factor_inverse(pc, block), block, atol=1e-12)

    def test_dimension_mismatch(self, p3):
        """Test dimension mismatch"""
        pc = exact_partial_cholesky(laplacian(p3), [0])
        with pytest.raises(DimensionMismatchError):
            apply_factor_inverse(pc, np.ones(5))

    @pytest.mark.parametrize("retained", [[], [7]])
    def test_bad_retain_set(self, p3, retained):
        """Test bad retain set"""
        with pytest.raises(EmptyRetainSetError):
            exact_partial_cholesky(laplacian(p3), retained)

    def test_bad_order(self, p3):
        """Test an order that is not a permutation of the eliminated set is rejected"""
        with pytest.raises(ValueError):
            exact_partial_cholesky(laplacian(p3), [0], order=[1])


class TestSchurIdentities:
    def test_pseudoinverse_block_is_schur_pseudoinverse(self, random_graph):
        """Test the centred C-block of L^+ is the pseudoinverse of the Schur complement"""
        g = random_graph(24, 30, seed=3, max_weight=5.0)
        L = laplacian(g)
        retained = [0, 2, 5, 9, 13, 17, 23]
        block = dense_pseudoinverse(L).matrix[np.ix_(retained, retained)]
        centre = np.eye(len(retained)) - 1.0 / len(retained)
        schur_pinv = np.linalg.pinv(exact_schur(L, retained).dense())
        np.testing.assert_allclose(centre @ block @ centre, schur_pinv, atol=1e-8)

    def test_forms_on_retained_vectors(self, random_graph):
        """Test x^T L^+ x equals x_C^T S^+ x_C for x supported on C and orthogonal to ones"""
        g = random_graph(20, 25, seed=4, max_weight=3.0)
        L = laplacian(g)
        retained = [1, 4, 6, 11, 19]
        schur_pinv = np.linalg.pinv(exact_schur(L, retained).dense())
        pinv = dense_pseudoinverse(L).matrix
        rng = np.random.default_rng(0)
        for _ in range(10):
            local = rng.standard_normal(len(retained))
            local -= local.mean()
            x = np.zeros(20)
            x[retained] = local
            assert x @ pinv @ x == pytest.approx(local @ schur_pinv @ local, rel=1e-8)

    @pytest.mark.parametrize("theta", [0.1, 0.5])
    def test_deletion_commutes_with_elimination(self, random_graph, theta):
        """Test theta-deleting an edge inside C commutes with eliminating the rest"""
        g = random_graph(18, 30, seed=6, max_weight=4.0)
        retained = list(range(0, 18, 2)) + [1, 3]
        inside = [e for e in range(g.m)
                  if g.edge(e)[0] in retained and g.edge(e)[1] in retained]
        assert inside
        schur = exact_schur(laplacian(g), retained)
        position = {v: i for i, v in enumerate(schur.vertices)}
        for e in inside:
            u, v, w = g.edge(e)
            b = np.zeros(len(retained))
            b[position[u]], b[position[v]] = 1.0, -1.0
            expected = schur.dense() - (1 - theta) * w * np.outer(b, b)
            deleted = exact_schur(laplacian(theta_delete(g, [e], theta)), retained)
            np.testing.assert_allclose(deleted.dense(), expected, atol=1e-9)


class TestApxPartialCholesky:
    @pytest.mark.parametrize("eps", [0.0, 0.75])
    def test_epsilon_range(self, p3, eps):
        """Test epsilon range"""
        with pytest.raises(EpsilonOutOfRangeError):
            apx_partial_cholesky(laplacian(p3), [0], eps)

    def test_small_graphs_are_exact(self, star):
        """Test small graphs are exact"""
        pc = apx_partial_cholesky(laplacian(star), [1, 2, 3], 0.5, np.random.default_rng(0))
        assert pc.exact and pc.epsilon == 0.0

    def test_sampled_clique_sandwich(self):
        """Test sampled clique sandwich"""
        # eliminating one vertex of K_80 forces the sampler (degree 79 > 2 * rounds)
        g = complete_graph(80)
        L = laplacian(g)
        settings = EstimatorSettings(exact_threshold=0)
        retained = list(range(1, 80))
        pc = apx_partial_cholesky(L, retained, 0.5, np.random.default_rng(3), settings)
        assert not pc.exact
        assert pc.schur.is_valid()

        ratios = sandwich_ratios(exact_schur(L, retained).dense(), pc.schur.dense())
        assert ratios.min() >= np.exp(-0.5)
        assert ratios.max() <= np.exp(0.5)

    def test_reproducible_with_seed(self):
        """Test reproducible with seed"""
        g = complete_graph(80)
        settings = EstimatorSettings(exact_threshold=0)
        first = apx_partial_cholesky(laplacian(g), range(1, 80), 0.5,
                                     np.random.default_rng(11), settings)
        second = apx_partial_cholesky(laplacian(g), range(1, 80), 0.5,
                                      np.random.default_rng(11), settings)
        np.testing.assert_array_equal(first.schur.dense(), second.schur.dense())

    def test_random_graph_quadratic_forms(self, random_graph):
        """Test x^T S~ x stays within exp(+-eps) of the exact Schur form on a random n=30 graph"""
        g = random_graph(30, 45, seed=17, max_weight=3.0)
        L = laplacian(g)
        retained = list(range(0, 30, 3))
        settings = EstimatorSettings(exact_threshold=0)
        approx = apx_partial_cholesky(L, retained, 0.25, np.random.default_rng(5), settings)
        exact = exact_schur(L, retained).dense()
        rng = np.random.default_rng(6)
        for _ in range(100):
            x = rng.standard_normal(len(retained))
            form = x @ exact @ x
            assert np.exp(-0.25) * form - 1e-12 <= x @ approx.schur.dense() @ x
            assert x @ approx.schur.dense() @ x <= np.exp(0.25) * form + 1e-12

    def test_edge_addition_keeps_sandwich(self):
        """Test adding an edge inside C to L and to S~ keeps the approximation"""
        g = complete_graph(80)
        settings = EstimatorSettings(exact_threshold=0)
        retained = list(range(1, 80))
        pc = apx_partial_cholesky(laplacian(g), retained, 0.5, np.random.default_rng(3), settings)

        heavier = build_graph(list(g.edges()) + [(1, 2, 5.0)])
        b = np.zeros(len(retained))
        b[0], b[1] = 1.0, -1.0
        approx = pc.schur.dense() + 5.0 * np.outer(b, b)
        ratios = sandwich_ratios(exact_schur(laplacian(heavier), retained).dense(), approx)
        assert ratios.min() >= np.exp(-0.5)
        assert ratios.max() <= np.exp(0.5)


class TestFactorPseudoinverse:
    def test_exact_matches_dense(self, random_graph):
        """Test exact matches dense"""
        g = random_graph(15, 12, seed=5, max_weight=3.0)
        L = laplacian(g)
        apply = FactorPseudoinverse.build(L, 0.5)
        pinv = dense_pseudoinverse(L).matrix
        b = np.random.default_rng(1).standard_normal((15, 3))
        np.testing.assert_allclose(apply(b), pinv @ b, atol=1e-10)

    def test_requires_single_root(self, p3):
        """Test requires single root"""
        with pytest.raises(ValueError):
            FactorPseudoinverse(exact_partial_cholesky(laplacian(p3), [0, 2]))
