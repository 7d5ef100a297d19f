import math
import os
import tempfile
import unittest
from pathlib import Path

import numpy as np
import scipy.stats
from parameterized import parameterized

from conc_toolbox.matrix.eigen import (DenseMatrix, baiyin_edges,
                                       baiyin_min_c, baiyin_nonasymptotic,
                                       extreme_eigenvalues, matrix_norms,
                                       operator_norm, sample_cov_extreme)
from conc_toolbox.matrix.quad_forms import (chi_square_tail, gaussian_chaos,
                                            gaussian_chaos_tail, hw_diagfree,
                                            hw_moment, hw_moment_gaussian,
                                            hw_moment_radius, hw_rv,
                                            subg_vector_quadratic,
                                            subg_vector_quadratic_tail,
                                            subweibull_eta,
                                            subweibull_quadratic)
from conc_toolbox.utils.errors import NoSolutionError, ParameterDomainError
from conc_toolbox.utils.rng import RngStream

"""
Quadratic forms, matrix norms and extreme eigenvalues
python3 -m unittest tests.test_quad_matrix
"""


def _random_matrix(rows, cols, stream_id=0):
    return RngStream(7, stream_id).generator().standard_normal((rows, cols))


class TestGaussianChaos(unittest.TestCase):
    @parameterized.expand([[1, 0.5], [5, 2.0], [20, 7.0]])
    def test_identity_threshold(self, n, x):
        bound = gaussian_chaos(np.eye(n), 1.0, x)
        self.assertAlmostEqual(bound.threshold, 2.0 * math.sqrt(n * x) + 2.0 * x, places=9)
        self.assertAlmostEqual(bound.p, math.exp(-x))
        self.assertEqual(chi_square_tail(n, x), bound)

    @parameterized.expand([[3, 0.5], [5, 2.0], [30, 6.0]])
    def test_chi_square_tail_is_dominated(self, n, x):
        threshold = chi_square_tail(n, x).threshold
        self.assertLessEqual(scipy.stats.chi2.sf(n + threshold, n), math.exp(-x))

    def test_tail_inverts_threshold(self):
        A = np.diag([1.0, 2.0, 3.0])
        sigma = [0.5, 1.0, 2.0]
        bound = gaussian_chaos(A, sigma, 1.7)
        self.assertAlmostEqual(gaussian_chaos_tail(A, sigma, bound.threshold), math.exp(-1.7), places=9)

    def test_zero_form(self):
        self.assertEqual(gaussian_chaos_tail(np.zeros((2, 2)), 1.0, 0.1), 0.0)

    def test_non_square_rejected(self):
        with self.assertRaises(ParameterDomainError):
            gaussian_chaos(np.ones((2, 3)), 1.0, 1.0)


class TestHansonWright(unittest.TestCase):
    def test_diagonal_free_value(self):
        A = np.array([[0.0, 1.0], [1.0, 0.0]])
        t = 10.0
        exponent = min(t ** 2 / (64.0 * math.sqrt(2.0)), t / (8.0 * math.sqrt(2.0)))
        self.assertAlmostEqual(hw_diagfree(A, 1.0, t), math.exp(-exponent), places=10)
        self.assertEqual(hw_diagfree(A, 1.0, 0.0), 1.0)

    def test_diagonal_free_needs_zero_diagonal(self):
        with self.assertRaises(ParameterDomainError):
            hw_diagfree(np.eye(2), 1.0, 1.0)

    def test_gaussian_moment_constants(self):
        self.assertEqual(hw_moment_gaussian(2.0), (2.0 * math.sqrt(2.0), 2.0 * math.sqrt(2.0)))

    @parameterized.expand([[0.1], [1.0], [4.0]])
    def test_radius_is_beyond_the_tail_level(self, x):
        A = _random_matrix(4, 4)
        sigma, kappa = hw_moment_gaussian(1.0)
        radius = hw_moment_radius(A, sigma, kappa, x)
        self.assertLessEqual(hw_moment(A, sigma, kappa, radius), math.exp(-x) * (1.0 + 1e-12))

    def test_unspecified_constant(self):
        A = np.array([[0.0, 1.0], [1.0, 0.0]])
        self.assertEqual(hw_rv(A, 1.0, 5.0, 0.0), 1.0)
        self.assertAlmostEqual(hw_rv(A, 1.0, 5.0, 0.1), math.exp(-0.1 * min(25.0 / 2.0, 5.0)), places=10)


class TestVectorQuadratic(unittest.TestCase):
    @parameterized.expand([[3, 0.0], [3, 2.0], [10, 5.0]])
    def test_isotropic_threshold(self, p, t):
        bound = subg_vector_quadratic(np.eye(p), 1.0, None, t)
        self.assertAlmostEqual(bound.threshold, p + 2.0 * math.sqrt(p * t) + 2.0 * t, places=9)
        self.assertAlmostEqual(bound.p, math.exp(-t))

    def test_mean_shift(self):
        p, m, t = 4, 3.0, 2.0
        mu = np.zeros(p)
        mu[0] = m
        bound = subg_vector_quadratic(np.eye(p), 1.0, mu, t)
        expected = p + 2.0 * math.sqrt(p * t) + 2.0 * t + m ** 2 * (1.0 + 2.0 * math.sqrt(t / p))
        self.assertAlmostEqual(bound.threshold, expected, places=9)

    def test_tail_inverts_threshold(self):
        A = _random_matrix(6, 3, stream_id=1)
        bound = subg_vector_quadratic(A, 0.7, None, 2.5)
        self.assertAlmostEqual(subg_vector_quadratic_tail(A, 0.7, None, bound.threshold), math.exp(-2.5), places=8)

    def test_mean_length_checked(self):
        with self.assertRaises(ParameterDomainError):
            subg_vector_quadratic(np.eye(3), 1.0, [1.0, 2.0], 1.0)


class TestSubWeibullQuadratic(unittest.TestCase):
    def test_eta_of_identity(self):
        self.assertAlmostEqual(subweibull_eta(np.eye(2), 1, 1.0), 0.5)

    def test_eta_requires_symmetry(self):
        with self.assertRaises(ParameterDomainError):
            subweibull_eta(np.array([[0.0, 1.0], [0.0, 0.0]]), 1, 1.0)

    def test_bound_value(self):
        self.assertEqual(subweibull_quadratic(np.eye(2), 1.0, 1, 0.0, 1.0), 1.0)
        self.assertAlmostEqual(subweibull_quadratic(np.eye(2), 1.0, 1, 4.0, 2.0), 2.0 * math.exp(-2.0), places=10)


class TestMatrixNorms(unittest.TestCase):
    def test_dense_matrix_validation(self):
        with self.assertRaises(ParameterDomainError):
            DenseMatrix([[1.0, float("nan")]])
        matrix = DenseMatrix([[1.0, 2.0]])
        self.assertEqual((matrix.rows, matrix.cols), (1, 2))
        self.assertFalse(matrix.entries.flags.writeable)

    def test_dense_matrix_from_csv(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory).joinpath("A.csv")
            path.write_text("1.0,2.0,0.5\n-3.0,0.0,4.0\n")
            matrix = DenseMatrix.from_csv(path)
        self.assertEqual((matrix.rows, matrix.cols), (2, 3))
        np.testing.assert_array_equal(matrix.entries, [[1.0, 2.0, 0.5], [-3.0, 0.0, 4.0]])
        self.assertEqual(matrix_norms(matrix).row_l2_max, 5.0)

    @parameterized.expand([[5, 3, 0], [3, 5, 1], [8, 8, 2]])
    def test_operator_norm_matches_svd(self, rows, cols, stream_id):
        a = _random_matrix(rows, cols, stream_id)
        self.assertAlmostEqual(operator_norm(a) / np.linalg.norm(a, 2), 1.0, places=6)

    def test_norms(self):
        a = np.array([[3.0, 4.0], [0.0, 1.0]])
        norms = matrix_norms(a)
        self.assertAlmostEqual(norms.frobenius, math.sqrt(26.0))
        self.assertAlmostEqual(norms.row_l2_max, 5.0)
        self.assertEqual(operator_norm(np.zeros((2, 2))), 0.0)


class TestEigen(unittest.TestCase):
    @parameterized.expand([[10], [100]])
    def test_extreme_eigenvalues(self, p):
        x = _random_matrix(3 * p, p, stream_id=p)
        gram = x.T @ x / (3 * p)
        lo, hi = extreme_eigenvalues(gram)
        values = np.linalg.eigvalsh(gram)
        self.assertAlmostEqual(lo, values[0], places=6)
        self.assertAlmostEqual(hi, values[-1], places=6)
        self.assertEqual(sample_cov_extreme(x), (lo, hi))

    def test_edges(self):
        self.assertEqual(baiyin_edges(1.0, 0.25), (0.25, 2.25))
        with self.assertRaises(ParameterDomainError):
            baiyin_edges(1.0, 1.5)

    def test_edges_bracket_large_sample_spectrum(self):
        n, p = 4000, 1000
        lo, hi = sample_cov_extreme(_random_matrix(n, p, stream_id=3))
        edge_lo, edge_hi = baiyin_edges(1.0, p / n)
        self.assertLess(abs(lo - edge_lo), 0.05)
        self.assertLess(abs(hi - edge_hi), 0.1)


class TestBaiYin(unittest.TestCase):
    def test_fixed_point(self):
        n, p, theta = 100, 1, 1e-8
        c = baiyin_min_c(n, p)
        bound = baiyin_nonasymptotic(n, p, theta, c)
        delta = 2.0 * c * (math.sqrt(p / n) + bound.t / math.sqrt(n))
        self.assertAlmostEqual(bound.delta, delta, places=10)
        self.assertAlmostEqual(bound.t / (c * theta * max(delta, delta ** 2)), 1.0, places=10)
        self.assertAlmostEqual(bound.op_norm_bound, 2.0 * c * theta * max(delta, delta ** 2))
        np.testing.assert_allclose(bound.eig_window, (1.0 - bound.t ** 2, 1.0 + bound.t ** 2))
        self.assertAlmostEqual(bound.probability, max(0.0, 1.0 - 2.0 * math.exp(-c * bound.t ** 2)))

    def test_divergence_reported(self):
        with self.assertRaises(NoSolutionError):
            baiyin_nonasymptotic(100, 10, 1.0, baiyin_min_c(100, 10))

    def test_minimum_constant_enforced(self):
        with self.assertRaises(ParameterDomainError):
            baiyin_nonasymptotic(100, 10, 1.0, 1.0)


@unittest.skipUnless(os.environ.get("CONC_TOOLBOX_SLOW") == "1", "set CONC_TOOLBOX_SLOW=1 to run")
class TestSpectrumAtScale(unittest.TestCase):
    def test_extreme_eigenvalues_stay_near_the_edges(self):
        n, p, reps = 2000, 200, 100
        edge_lo, edge_hi = baiyin_edges(1.0, p / n)
        inside = 0
        for rep in range(reps):
            lo, hi = sample_cov_extreme(RngStream(19, rep).generator().standard_normal((n, p)))
            inside += edge_lo - 0.1 <= lo and hi <= edge_hi + 0.1
        self.assertGreaterEqual(inside, 95)


if __name__ == "__main__":
    unittest.main()
