#!/usr/bin/env python3
"""
Tests for the dense matrix helpers: pseudo-inverses, projectors, Kronecker
products, centering, symmetric roots and the Loewner order.
"""

import os
import sys
import unittest
from unittest import mock

import numpy as np
from scipy import linalg

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from crossover_optim.errors import InvalidInputError, NotPositiveDefiniteError, NumericalError
from crossover_optim.matlib import (Tolerance, centering, is_completely_symmetric, kron, loewner_leq,
                                    max_rel_diff, pinv, proj_perp, rank, sym_inv_sqrt)


class TestPseudoInverse(unittest.TestCase):
    """Moore-Penrose inverse examples and identities."""

    @classmethod
    def setUpClass(cls):
        cls.rng = np.random.default_rng(11)

    def test_identity_and_diagonal(self):
        np.testing.assert_allclose(pinv(np.eye(3)), np.eye(3))
        np.testing.assert_allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_all_ones(self):
        np.testing.assert_allclose(pinv(np.ones((2, 2))), np.ones((2, 2)) / 4.0)

    def test_penrose_identities_over_ranks(self):
        """All four Penrose identities hold for every rank from 0 to full."""
        for k in range(0, 5):
            M = self.rng.standard_normal((5, k)) @ self.rng.standard_normal((k, 4)) if k else np.zeros((5, 4))
            G = pinv(M)
            np.testing.assert_allclose(M @ G @ M, M, atol=1e-8)
            np.testing.assert_allclose(G @ M @ G, G, atol=1e-8)
            np.testing.assert_allclose((M @ G).T, M @ G, atol=1e-8)
            np.testing.assert_allclose((G @ M).T, G @ M, atol=1e-8)
            self.assertEqual(rank(M), k)

    def test_non_finite_input_rejected(self):
        with self.assertRaises(InvalidInputError):
            pinv(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_linear_algebra_failure_is_numerical_error(self):
        with mock.patch("crossover_optim.matlib.linalg.pinv", side_effect=linalg.LinAlgError("no convergence")):
            with self.assertRaises(NumericalError):
                pinv(np.eye(2))
        with mock.patch("crossover_optim.matlib.linalg.svd", side_effect=linalg.LinAlgError("no convergence")):
            with self.assertRaises(NumericalError):
                rank(np.eye(2))


class TestProjectors(unittest.TestCase):
    """Orthogonal-complement projectors."""

    def test_ones_column_gives_centering(self):
        np.testing.assert_allclose(proj_perp(np.ones((3, 1))), centering(3), atol=1e-12)

    def test_full_column_space(self):
        np.testing.assert_allclose(proj_perp(np.eye(2)), np.zeros((2, 2)), atol=1e-12)

    def test_rank_deficient(self):
        P = proj_perp(np.array([[1.0, 0.0], [0.0, 0.0]]))
        np.testing.assert_allclose(P, np.diag([0.0, 1.0]), atol=1e-12)

    def test_projector_properties(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((7, 2)) @ rng.standard_normal((2, 4))
        P = proj_perp(X)
        np.testing.assert_allclose(P, P.T, atol=1e-12)
        np.testing.assert_allclose(P @ P, P, atol=1e-10)
        np.testing.assert_allclose(P @ X, np.zeros_like(X), atol=1e-10)
        self.assertAlmostEqual(float(np.trace(P)), 7 - 2, places=10)

    def test_empty_rows_rejected(self):
        with self.assertRaises(InvalidInputError):
            proj_perp(np.zeros((0, 2)))


class TestKronAndCentering(unittest.TestCase):

    def test_block_diagonal(self):
        K = kron(np.eye(2), centering(2))
        np.testing.assert_allclose(K[:2, :2], centering(2))
        np.testing.assert_allclose(K[2:, 2:], centering(2))
        np.testing.assert_allclose(K[:2, 2:], np.zeros((2, 2)))

    def test_scalar_case(self):
        B = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(kron([[2.0]], B), 2.0 * B)

    def test_mixed_product_and_trace(self):
        rng = np.random.default_rng(5)
        A, B, C, D = (rng.standard_normal((2, 2)) for _ in range(4))
        np.testing.assert_allclose(kron(A, B) @ kron(C, D), kron(A @ C, B @ D), atol=1e-12)
        self.assertAlmostEqual(float(np.trace(kron(A, B))), float(np.trace(A) * np.trace(B)), places=12)

    def test_centering_values(self):
        np.testing.assert_allclose(centering(2), [[0.5, -0.5], [-0.5, 0.5]])
        H3 = centering(3)
        np.testing.assert_allclose(np.diag(H3), [2 / 3] * 3)
        self.assertAlmostEqual(H3[0, 1], -1 / 3)
        np.testing.assert_allclose(centering(5) @ np.ones(5), np.zeros(5), atol=1e-15)

    def test_centering_zero(self):
        with self.assertRaises(InvalidInputError):
            centering(0)


class TestSymmetricRoot(unittest.TestCase):

    def test_examples(self):
        np.testing.assert_allclose(sym_inv_sqrt(np.eye(4)), np.eye(4), atol=1e-12)
        np.testing.assert_allclose(sym_inv_sqrt(np.diag([4.0, 9.0])), np.diag([0.5, 1 / 3]), atol=1e-12)

    def test_random_spd(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((3, 3))
        M = X @ X.T + 3 * np.eye(3)
        R = sym_inv_sqrt(M)
        np.testing.assert_allclose(R @ M @ R, np.eye(3), atol=1e-10)
        np.testing.assert_allclose(R @ R, pinv(M), atol=1e-10)

    def test_not_positive_definite_names_eigenvalue(self):
        with self.assertRaises(NotPositiveDefiniteError) as ctx:
            sym_inv_sqrt(np.diag([1.0, -2.0]))
        self.assertAlmostEqual(ctx.exception.eigenvalue, -2.0)
        self.assertIn("-2", str(ctx.exception))


class TestOrderAndSymmetry(unittest.TestCase):

    def test_loewner_examples(self):
        H = centering(3)
        self.assertTrue(loewner_leq(np.zeros((3, 3)), H))
        self.assertFalse(loewner_leq(np.eye(3), np.zeros((3, 3))))
        self.assertTrue(loewner_leq(H, H))

    def test_loewner_antisymmetry(self):
        A = np.diag([1.0, 2.0])
        B = np.diag([1.0, 2.0 + 1e-3])
        self.assertTrue(loewner_leq(A, B))
        self.assertFalse(loewner_leq(B, A))

    def test_loewner_dimension_mismatch(self):
        with self.assertRaises(InvalidInputError):
            loewner_leq(np.eye(2), np.eye(3))

    def test_complete_symmetry(self):
        self.assertTrue(is_completely_symmetric(2.0 * np.eye(4) + 0.3 * np.ones((4, 4))))
        self.assertFalse(is_completely_symmetric(np.diag([1.0, 2.0])))
        for t in (2, 3, 5):
            self.assertTrue(is_completely_symmetric(centering(t)))

    def test_tolerance_bounds(self):
        with self.assertRaises(InvalidInputError):
            Tolerance(rank_tol=0.0)
        with self.assertRaises(InvalidInputError):
            Tolerance(eq_tol=1.5)

    def test_max_rel_diff(self):
        self.assertEqual(max_rel_diff(np.eye(2), np.eye(2)), 0.0)
        self.assertAlmostEqual(max_rel_diff(np.eye(2), 2 * np.eye(2)), 0.5)


if __name__ == '__main__':
    unittest.main(verbosity=2)
