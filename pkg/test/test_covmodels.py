#!/usr/bin/env python3
"""
Tests for covariance kernels, dispersion matrices, starred matrices and
scenario files.
"""

import json
import math
import os
import sys
import tempfile
import unittest

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from crossover_optim.covmodels import (CASES, ExplicitCovariance, Kernel, KernelFamily, MarkovScenario,
                                       ProportionalScenario, build_kernel_matrix, build_markov_sigma,
                                       build_proportional_sigma, case_scenario, load_scenario, omega_matrices,
                                       scenario_from_dict, vstar)
from crossover_optim.config import parse_grid
from crossover_optim.errors import InvalidInputError, NotPositiveDefiniteError
from crossover_optim.matlib import centering


def vstar_p3_mat05(r):
    """Entries of V* for the p = 3 first-order kernel, in closed form."""
    a = 2.0 / ((r - 3) * (r - 1) * (r + 1))
    b = -1.0 / ((r - 1) * (r - 3))
    c = 1.0 / ((r - 3) * (r + 1))
    m = 2.0 / ((r - 1) * (r - 3))
    return np.array([[a, b, c], [b, m, b], [c, b, a]])


class TestKernels(unittest.TestCase):
    """Kernel matrices at lag |i1 - i2|."""

    def test_mat05(self):
        np.testing.assert_allclose(build_kernel_matrix(Kernel("Mat05", 0.5), 3),
                                   [[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]])

    def test_matinf(self):
        self.assertAlmostEqual(build_kernel_matrix(Kernel("MatInf", 0.5), 3)[0, 2], 0.0625)

    def test_mat15_natural_log(self):
        M = build_kernel_matrix(Kernel(KernelFamily.MAT15, 0.5), 3)
        self.assertAlmostEqual(M[0, 1], (1 - math.log(0.5)) * 0.5, places=12)
        self.assertAlmostEqual(M[0, 1], 0.846574, places=6)

    def test_scale_and_positive_definite(self):
        for family in KernelFamily:
            for r in (0.05, 0.5, 0.95):
                M = Kernel(family, r, scale=2.5).matrix(4)
                np.testing.assert_allclose(np.diag(M), 2.5)
                np.testing.assert_allclose(M, M.T)
                self.assertGreater(np.linalg.eigvalsh(M)[0], 0.0)

    def test_positive_definite_over_grid(self):
        for family in KernelFamily:
            for r in parse_grid("0.05:0.95:0.05"):
                for p in (3, 4, 5):
                    self.assertGreater(np.linalg.eigvalsh(Kernel(family, r).matrix(p))[0], 0.0, (family, r, p))

    def test_invalid_parameters(self):
        for bad in (dict(family="Mat05", r=0.0), dict(family="Mat05", r=1.0),
                    dict(family="Mat05", r=0.5, scale=0.0), dict(family="Mat25", r=0.5)):
            with self.assertRaises(InvalidInputError):
                Kernel(**bad)

    def test_explicit_covariance_size(self):
        E = ExplicitCovariance(np.eye(3))
        np.testing.assert_allclose(E.matrix(3), np.eye(3))
        with self.assertRaises(InvalidInputError):
            E.matrix(4)
        with self.assertRaises(InvalidInputError):
            ExplicitCovariance([[1.0, 0.2], [0.3, 1.0]])


class TestDispersion(unittest.TestCase):
    """Full dispersion matrices for both structures."""

    def test_proportional_blocks(self):
        gamma = np.array([[2.0, 0.6], [0.6, 1.0]])
        s = ProportionalScenario(gamma, Kernel("MatInf", 0.4))
        sigma = build_proportional_sigma(s, 3, 3)
        self.assertEqual(sigma.shape, (18, 18))
        V = s.v(3)
        np.testing.assert_allclose(sigma[:3, :3], 2.0 * V)
        np.testing.assert_allclose(sigma[:3, 9:12], 0.6 * V)
        np.testing.assert_allclose(sigma[9:12, 9:12], 1.0 * V)
        np.testing.assert_allclose(sigma[:3, 3:6], np.zeros((3, 3)))

    def test_uncorrelated_responses(self):
        s = ProportionalScenario(np.eye(2), Kernel("Mat05", 0.3))
        sigma = build_proportional_sigma(s, 2, 3)
        np.testing.assert_allclose(sigma[:6, 6:], np.zeros((6, 6)))

    def test_proportional_spectrum(self):
        gamma = np.array([[1.5, 0.4], [0.4, 1.0]])
        s = ProportionalScenario(gamma, Kernel("Mat15", 0.6))
        expected = np.sort(np.outer(np.linalg.eigvalsh(gamma), np.linalg.eigvalsh(s.v(3))).ravel())
        np.testing.assert_allclose(np.linalg.eigvalsh(build_proportional_sigma(s, 1, 3)), expected, rtol=1e-10)

    def test_gamma_not_positive_definite(self):
        s = ProportionalScenario([[1.0, 2.0], [2.0, 1.0]], Kernel("Mat05", 0.5))
        with self.assertRaises(NotPositiveDefiniteError):
            build_proportional_sigma(s, 2, 3)

    def test_markov_cross_block(self):
        r, rho = 0.5, 0.5
        s = case_scenario(7, r, rho)
        sigma = build_markov_sigma(s, 1, 3)
        G12 = sigma[:3, 3:]
        G22 = sigma[3:, 3:]
        np.testing.assert_allclose(G12, 0.5 * s.v1(3))
        self.assertAlmostEqual(G22[0, 1], r * (rho ** 2 + r * (1 - rho ** 2)), places=12)

    def test_markov_degenerate_collapse(self):
        k = Kernel("Mat15", 0.4)
        s = MarkovScenario(2.0, 1.5, 0.3, k, k)
        sigma = build_markov_sigma(s, 2, 3)
        np.testing.assert_allclose(sigma[6:, 6:], 1.5 * np.kron(np.eye(2), k.matrix(3)), atol=1e-12)

    def test_markov_validation(self):
        k = Kernel("Mat05", 0.5)
        for bad in (dict(rho=0.0), dict(rho=1.0), dict(rho=-1.2), dict(sigma11=0.0)):
            params = dict(sigma11=1.0, sigma22=1.0, rho=0.5)
            params.update(bad)
            with self.assertRaises(InvalidInputError):
                MarkovScenario(params["sigma11"], params["sigma22"], params["rho"], k, k)


class TestStarredMatrices(unittest.TestCase):
    """V* and the Omega blocks."""

    def test_identity_gives_centering(self):
        np.testing.assert_allclose(vstar(np.eye(4)), centering(4), atol=1e-12)

    def test_closed_form_p3(self):
        for r in np.arange(0.1, 0.91, 0.1):
            np.testing.assert_allclose(vstar(Kernel("Mat05", r).matrix(3)), vstar_p3_mat05(r), rtol=1e-9, atol=1e-12)

    def test_case7_second_matrix(self):
        s = case_scenario(7, 0.5, 0.5)
        np.testing.assert_allclose(vstar(s.vr(3)), vstar_p3_mat05(0.25), rtol=1e-9)
        self.assertAlmostEqual(vstar(s.v1(3))[0, 0], 16 / 15, places=12)
        self.assertAlmostEqual(vstar(s.v1(3))[0, 1], -0.8, places=12)

    def test_zero_sums(self):
        for family in KernelFamily:
            Vs = vstar(Kernel(family, 0.7).matrix(4))
            np.testing.assert_allclose(Vs.sum(axis=0), np.zeros(4), atol=1e-10)
            self.assertGreaterEqual(np.linalg.eigvalsh(Vs)[0], -1e-10)

    def test_inverse_scaling(self):
        for family in KernelFamily:
            V = Kernel(family, 0.6).matrix(3)
            for c in (0.25, 2.0, 7.5):
                np.testing.assert_allclose(vstar(c * V), vstar(V) / c, rtol=1e-9, atol=1e-12)

    def test_omega_matrices(self):
        s = case_scenario(7, 0.5, 0.5)
        omega1, omega2, omega4 = omega_matrices(s, 3)
        np.testing.assert_allclose(omega2, s.rho_bar * omega4)
        np.testing.assert_allclose(omega4, vstar_p3_mat05(0.25) / 0.75, rtol=1e-9)
        for omega in (omega1, omega2, omega4):
            np.testing.assert_allclose(omega.sum(axis=0), np.zeros(3), atol=1e-10)
            np.testing.assert_allclose(omega.sum(axis=1), np.zeros(3), atol=1e-10)

    def test_derived_parameters(self):
        s = MarkovScenario(4.0, 1.0, 0.6, Kernel("Mat05", 0.5), Kernel("Mat05", 0.5))
        self.assertAlmostEqual(s.rho_bar, 0.3)
        self.assertAlmostEqual(s.sigma12, 0.64)
        self.assertEqual(s.kernel_v1.scale, 4.0)
        self.assertEqual(s.kernel_vr.scale, 1.0)


class TestCases(unittest.TestCase):

    def test_case_table(self):
        self.assertEqual(sorted(CASES), [1, 2, 3, 4, 5, 6, 7])
        s = case_scenario(7, 0.5, 0.5)
        self.assertAlmostEqual(s.kernel_vr.r, 0.25)
        s = case_scenario(2, 0.5, -0.3)
        self.assertEqual(s.kernel_v1.family, KernelFamily.MAT05)
        self.assertEqual(s.kernel_vr.family, KernelFamily.MATINF)
        self.assertEqual(s.kernel_vr.r, 0.5)

    def test_unknown_case(self):
        with self.assertRaises(InvalidInputError):
            case_scenario(8, 0.5, 0.5)


class TestScenarioFiles(unittest.TestCase):
    """Scenario JSON parsing."""

    def test_shipped_scenarios(self):
        s = load_scenario(os.path.join(ROOT, "config", "scenarios", "markov-case7.json"))
        self.assertIsInstance(s, MarkovScenario)
        self.assertEqual(s.case, 7)
        np.testing.assert_allclose(s.vr(3), case_scenario(7, 0.5, 0.5).vr(3))
        s = load_scenario(os.path.join(ROOT, "config", "scenarios", "proportional-mat05.json"))
        self.assertIsInstance(s, ProportionalScenario)
        self.assertEqual(s.g, 2)
        s = load_scenario(os.path.join(ROOT, "config", "scenarios", "markov-degenerate.json"))
        self.assertEqual(s.case, 0)
        np.testing.assert_allclose(s.v1(3), 2.0 * s.vr(3))

    def test_explicit_markov(self):
        s = scenario_from_dict({
            "structure": "markov", "sigma11": 2.0, "sigma22": 1.0, "rho": 0.4,
            "explicit": {"VC": np.eye(3).tolist(), "VR": Kernel("Mat05", 0.3).matrix(3).tolist()},
        })
        np.testing.assert_allclose(s.v1(3), 2.0 * np.eye(3))

    def test_rejections(self):
        bad = [
            {"structure": "proportional", "gamma": [[1.0]], "kernelV": {"family": "Mat05", "r": 0.5}, "extra": 1},
            {"structure": "markov", "g": 3, "sigma11": 1, "sigma22": 1, "rho": 0.5,
             "kernelV1": {"family": "Mat05", "r": 0.5}, "kernelVR": {"family": "Mat05", "r": 0.5}},
            {"structure": "markov", "sigma11": 1, "sigma22": 1, "rho": 0.5,
             "kernelV1": {"family": "Mat05", "r": 0.5}},
            {"structure": "ar1"},
            {"gamma": [[1.0]]},
            {"structure": "proportional", "g": 1, "gamma": 2.0, "kernelV": {"family": "Mat05", "r": 0.5}},
            {"structure": "proportional", "gamma": [1.0, 0.5], "kernelV": {"family": "Mat05", "r": 0.5}},
            {"structure": "proportional", "gamma": [["high"]], "kernelV": {"family": "Mat05", "r": 0.5}},
        ]
        for data in bad:
            with self.assertRaises(InvalidInputError):
                scenario_from_dict(data)

    def test_bad_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.json")
            with open(path, "w") as f:
                f.write("{not json")
            with self.assertRaises(InvalidInputError) as ctx:
                load_scenario(path)
            self.assertIn("bad.json", str(ctx.exception))
            path = os.path.join(tmp, "wrong.json")
            with open(path, "w") as f:
                json.dump({"structure": "proportional", "gamma": [[1.0]],
                           "kernelV": {"family": "Mat05", "r": 2.0}}, f)
            with self.assertRaises(InvalidInputError):
                load_scenario(path)


if __name__ == '__main__':
    unittest.main(verbosity=2)
