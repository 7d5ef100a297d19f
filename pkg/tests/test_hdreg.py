import json
import math
import os
import unittest

import numpy as np
from parameterized import parameterized
from scipy.optimize import minimize_scalar
from sklearn.linear_model import Lasso

from conc_toolbox.hdreg import oracle
from conc_toolbox.hdreg.instances import (design_matrix, gen_linear,
                                          gen_poisson, normalize_columns)
from conc_toolbox.hdreg.simulate import (simulate_lasso, simulate_ols,
                                         simulate_poisson)
from conc_toolbox.hdreg.solvers import (lasso_cd, lasso_kkt_residual,
                                        lasso_objective, ols,
                                        poisson_kkt_residual,
                                        poisson_lasso_objective,
                                        poisson_lasso_pg, soft_threshold)
from conc_toolbox.utils.errors import ParameterDomainError, RankDeficientError
from conc_toolbox.utils.rng import RngStream

"""
Sparse regression: instances, solvers, oracle bounds and replication studies
python3 -m unittest tests.test_hdreg
"""


def _orthonormal_design(n, p, seed=0):
    Q, _ = np.linalg.qr(RngStream(seed).generator().standard_normal((n, p)))
    return math.sqrt(n) * Q


def _lower_limit(probability, reps):
    """Probability bound less three Monte-Carlo standard errors."""
    return probability - 3.0 * math.sqrt(probability * (1.0 - probability) / reps)


class TestInstances(unittest.TestCase):
    def test_linear_instance(self):
        instance = gen_linear(60, 20, 4, 0.5, seed=3)
        self.assertEqual((instance.n, instance.p, instance.s), (60, 20, 4))
        np.testing.assert_array_equal(instance.beta_star[instance.support], [1.0, -1.0, 1.0, -1.0])
        np.testing.assert_allclose(np.linalg.norm(instance.X, axis=0), math.sqrt(60.0))
        self.assertEqual(instance.metadata()["design"]["kind"], "iid_gaussian")

    def test_streams(self):
        first = gen_linear(30, 10, 2, 1.0, seed=5, stream_id=1)
        again = gen_linear(30, 10, 2, 1.0, seed=5, stream_id=1)
        other = gen_linear(30, 10, 2, 1.0, seed=5, stream_id=2)
        np.testing.assert_array_equal(first.y, again.y)
        self.assertFalse(np.array_equal(first.y, other.y))

    def test_toeplitz_correlation(self):
        X = design_matrix(20000, 3, "toeplitz", 0.5, RngStream(2).generator())
        correlation = np.corrcoef(X, rowvar=False)
        self.assertAlmostEqual(correlation[0, 1], 0.5, delta=0.03)
        self.assertAlmostEqual(correlation[0, 2], 0.25, delta=0.03)

    def test_unknown_design(self):
        with self.assertRaises(ParameterDomainError):
            design_matrix(10, 2, "block")

    def test_zero_columns_survive_normalization(self):
        X = normalize_columns(np.array([[1.0, 0.0], [1.0, 0.0]]))
        np.testing.assert_allclose(X, [[1.0, 0.0], [1.0, 0.0]])

    def test_poisson_instance(self):
        instance = gen_poisson(200, 10, 4, 0.5, 2.0, seed=1)
        self.assertAlmostEqual(np.sum(np.abs(instance.beta_star)), 2.0)
        self.assertTrue(np.all(np.abs(instance.X) <= 0.5))
        self.assertTrue(np.all(instance.y >= 0) and np.all(instance.y == np.round(instance.y)))

    def test_poisson_without_signal(self):
        instance = gen_poisson(20, 5, 3, 1.0, 0.0, seed=1)
        self.assertEqual(instance.s, 0)
        self.assertFalse(np.any(instance.beta_star))


class TestLassoSolver(unittest.TestCase):
    def test_soft_threshold(self):
        np.testing.assert_array_equal(soft_threshold(np.array([-3.0, -0.5, 0.5, 2.0]), 1.0), [-2.0, 0.0, 0.0, 1.0])

    @parameterized.expand([[0.05], [0.3], [1.5]])
    def test_orthonormal_design_closed_form(self, lam):
        n, p = 80, 10
        X = _orthonormal_design(n, p)
        y = X @ np.linspace(-1.0, 1.0, p) + RngStream(1).generator().standard_normal(n)
        fit = lasso_cd(X, y, lam)
        expected = soft_threshold(X.T @ y / n, lam / 2.0)
        np.testing.assert_allclose(fit.beta_hat, expected, atol=1e-8)
        self.assertTrue(fit.converged)

    @parameterized.expand([[0.02], [0.2]])
    def test_matches_scikit_learn(self, lam):
        instance = gen_linear(50, 20, 3, 0.5, seed=9)
        fit = lasso_cd(instance.X, instance.y, lam)
        reference = Lasso(alpha=lam / 2.0, fit_intercept=False, tol=1e-12, max_iter=1000000)
        reference.fit(instance.X, instance.y)
        np.testing.assert_allclose(fit.beta_hat, reference.coef_, atol=1e-5)

    def test_zero_response(self):
        X = RngStream(4).generator().standard_normal((20, 5))
        fit = lasso_cd(X, np.zeros(20), 0.1)
        np.testing.assert_array_equal(fit.beta_hat, np.zeros(5))
        self.assertEqual(fit.iterations, 0)

    def test_kkt_and_monotone_trace(self):
        instance = gen_linear(40, 60, 5, 1.0, seed=2)
        lam = 0.3
        fit = lasso_cd(instance.X, instance.y, lam)
        self.assertTrue(fit.converged)
        self.assertLessEqual(lasso_kkt_residual(instance.X, instance.y, fit.beta_hat, lam), 1e-8)
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(fit.objective_trace, fit.objective_trace[1:])))
        self.assertAlmostEqual(fit.objective, lasso_objective(instance.X, instance.y, fit.beta_hat, lam), places=10)

    def test_penalty_must_be_positive(self):
        with self.assertRaises(ParameterDomainError):
            lasso_cd(np.eye(2), np.ones(2), 0.0)


class TestPoissonSolver(unittest.TestCase):
    def test_huge_penalty_gives_zero(self):
        instance = gen_poisson(100, 5, 2, 1.0, 1.0, seed=6)
        fit = poisson_lasso_pg(instance.X, instance.y, 1e3)
        np.testing.assert_array_equal(fit.beta_hat, np.zeros(5))
        self.assertTrue(fit.converged)

    def test_single_coefficient_matches_scalar_search(self):
        instance = gen_poisson(200, 1, 1, 1.0, 1.0, seed=7)
        X, y, lam = instance.X, instance.y, 0.01
        fit = poisson_lasso_pg(X, y, lam)
        reference = minimize_scalar(
            lambda b: poisson_lasso_objective(X, y, np.array([b]), lam),
            bounds=(-5.0, 5.0), method="bounded", options={"xatol": 1e-10},
        )
        self.assertAlmostEqual(fit.beta_hat[0], reference.x, delta=1e-5)

    def test_kkt_and_monotone_trace(self):
        instance = gen_poisson(150, 30, 3, 1.0, 1.0, seed=8)
        lam = 0.05
        fit = poisson_lasso_pg(instance.X, instance.y, lam)
        self.assertTrue(fit.converged)
        self.assertLessEqual(poisson_kkt_residual(instance.X, instance.y, fit.beta_hat, lam), 1e-7)
        self.assertTrue(all(b <= a for a, b in zip(fit.objective_trace, fit.objective_trace[1:])))

    def test_overflowing_step_is_rejected(self):
        instance = gen_poisson(50, 3, 1, 1.0, 1.0, seed=10)
        fit = poisson_lasso_pg(instance.X * 50.0, instance.y, 0.1, step=1e6)
        self.assertTrue(np.all(np.isfinite(fit.beta_hat)))
        self.assertTrue(np.all(np.isfinite(fit.objective_trace)))


class TestCone(unittest.TestCase):
    @parameterized.expand(
        [
            [[1.0, 0.5, 0.5], [0], 1.0, True],
            [[1.0, 0.5, 0.5], [0], 0.9, False],
            [[0.0, 0.0, 0.0], [1], 3.0, True],
            [[0.1, 2.0, -1.0], [1, 2], 0.0, False],
        ]
    )
    def test_cone_membership(self, u, support, eta, expected):
        self.assertEqual(oracle.cone_check(u, support, eta), expected)

    def test_projection(self):
        np.testing.assert_allclose(oracle.project_l1_ball(np.array([3.0, -1.0]), 2.0), [2.0, 0.0])
        np.testing.assert_array_equal(oracle.project_l1_ball(np.array([0.5, -0.2]), 1.0), [0.5, -0.2])
        np.testing.assert_array_equal(oracle.project_l1_ball(np.array([0.5, -0.2]), 0.0), [0.0, 0.0])
        v = RngStream(3).generator().standard_normal(12)
        self.assertAlmostEqual(np.sum(np.abs(oracle.project_l1_ball(v, 1.5))), 1.5)

    def test_identity_gram(self):
        self.assertAlmostEqual(oracle.re_estimate(np.eye(6), [0, 1], 3.0), 1.0, places=10)
        self.assertAlmostEqual(oracle.stabil_estimate(np.eye(6), [0, 1], 3.0), 1.0, places=10)

    def test_estimate_between_eigenvalues(self):
        X = RngStream(5).generator().standard_normal((40, 8))
        gram = X.T @ X / 40
        support = [0, 1, 2]
        estimate = oracle.re_estimate(gram, support, 3.0, restarts=5)
        self.assertGreaterEqual(estimate, np.linalg.eigvalsh(gram)[0] - 1e-10)
        self.assertLessEqual(estimate, np.linalg.eigvalsh(gram[np.ix_(support, support)])[0] + 1e-10)

    def test_empty_support(self):
        with self.assertRaises(ParameterDomainError):
            oracle.re_estimate(np.eye(3), [], 3.0)


class TestOracleBounds(unittest.TestCase):
    def test_lasso_lambda(self):
        self.assertAlmostEqual(oracle.lasso_lambda(2.0, 0.5, 100, 50), math.sqrt(math.log(50) / 100))
        with self.assertRaises(ParameterDomainError):
            oracle.lasso_lambda(2.0, 1.0, 100, 1)

    def test_kkt_probability(self):
        self.assertAlmostEqual(oracle.kkt_probability(8.0, 10), 1.0 - 2.0 * 10.0 ** -7)
        self.assertEqual(oracle.kkt_probability(1.0, 10), 0.0)

    def test_lasso_bounds(self):
        A, sigma, n, p, gamma = 8.0, 1.0, 200, 100, 0.5
        one = oracle.lasso_oracle_bounds(A, sigma, 1, n, p, gamma)
        four = oracle.lasso_oracle_bounds(A, sigma, 4, n, p, gamma)
        np.testing.assert_allclose(four.printed, 4.0 * np.array(one.printed))
        np.testing.assert_allclose(four.proof, 4.0 * np.array(one.proof))
        lam = oracle.lasso_lambda(A, sigma, n, p)
        self.assertAlmostEqual(one.proof_l1, 3.0 * lam / gamma)
        self.assertAlmostEqual(one.l2sq, 9.0 * A * math.log(p) / (n * gamma ** 2))
        zero = oracle.lasso_oracle_bounds(A, sigma, 0, n, p, gamma)
        self.assertEqual(zero.printed, (0.0, 0.0, 0.0))

    def test_kkt_event(self):
        instance = gen_linear(100, 10, 2, 0.0, seed=1)
        self.assertTrue(oracle.kkt_event(instance.X, instance.y, instance.beta_star, 1e-9))

    def test_poisson_lambda(self):
        expected = 40.0 * math.e * math.sqrt(2.0 * math.log(200.0) / 1e4)
        self.assertAlmostEqual(oracle.poisson_lambda(2.0, 1.0, 1.0, 1e4, 100), expected, places=12)

    def test_poisson_constants(self):
        constants = oracle.poisson_constants(1.0, 1.0, 0.5)
        self.assertAlmostEqual(constants["c"], math.exp(-5.0) / 2.0)
        self.assertAlmostEqual(constants["l1_factor"] / (8.0 * math.exp(5.0)), 1.0, places=12)
        self.assertAlmostEqual(constants["pred_factor"] / (24.0 * math.exp(10.0)), 1.0, places=12)

    def test_poisson_bounds(self):
        self.assertAlmostEqual(oracle.poisson_probability(2.0, 100), 1.0 - 200.0 ** -3 - 200.0 ** -2)
        bounds = oracle.poisson_oracle_bounds(2.0, 1.0, 0.0, 3, 0.1, 1.0)
        self.assertAlmostEqual(bounds.l1, 4.0 * 3 * 0.1)
        self.assertAlmostEqual(bounds.pred, 12.0 * 3 * 0.01)
        self.assertTrue(math.isnan(bounds.probability))

    def test_ols(self):
        instance = gen_linear(40, 5, 5, 1.0, column_normalize=False, seed=4)
        beta, mse_identity, risk = ols(instance.X, instance.y, 2.0)
        np.testing.assert_allclose(beta, np.linalg.lstsq(instance.X, instance.y, rcond=None)[0], atol=1e-10)
        self.assertAlmostEqual(mse_identity, 4.0 * np.trace(np.linalg.inv(instance.X.T @ instance.X)))
        self.assertAlmostEqual(risk, 4.0 * 5 / 40)

    def test_ols_needs_full_rank(self):
        with self.assertRaises(RankDeficientError):
            ols(np.ones((5, 2)), np.ones(5), 1.0)
        with self.assertRaises(RankDeficientError):
            ols(np.ones((2, 5)), np.ones(2), 1.0)

    @parameterized.expand([[0.0], [3.0]])
    def test_ols_prediction_tail(self, t):
        n, p, sigma = 30, 4, 1.5
        X = RngStream(2).generator().standard_normal((n, p))
        bound = oracle.ols_prediction_tail(X, sigma, t)
        expected = sigma ** 2 * (p + 2.0 * math.sqrt(p * t) + 2.0 * t) / n
        self.assertAlmostEqual(bound.threshold / expected, 1.0, places=8)
        self.assertAlmostEqual(bound.p, math.exp(-t))


class TestSimulations(unittest.TestCase):
    def test_ols_study(self):
        report = simulate_ols(50, 5, sigma=1.0, reps=200, seed=11)
        summary = report.summary
        self.assertLess(abs(summary["risk_mean"] - summary["risk_theory"]), 5 * summary["risk_se"])
        self.assertLess(abs(summary["sq_error_mean"] - summary["mse_identity_mean"]), 5 * summary["sq_error_se"])
        self.assertLessEqual(summary["tail_frequency"], summary["tail_bound"])
        self.assertEqual(len(report.rows), 200)

    def test_lasso_study(self):
        report = simulate_lasso(100, 50, 3, reps=20, seed=12)
        self.assertTrue(report.summary["cone_whenever_kkt"])
        self.assertEqual(report.summary["converged_frequency"], 1.0)
        self.assertEqual(report.family, "gaussian")
        self.assertIn("l1_error", report.summary["quantiles"])
        on_event = report.rows[report.rows["kkt_event"]]
        self.assertTrue(on_event["cone"].all())
        summary = report.summary
        self.assertGreaterEqual(summary["kkt_event_frequency"], _lower_limit(summary["kkt_probability_bound"], 20))
        self.assertGreaterEqual(report.rows["l1_within"].mean(), 0.99)

    def test_lasso_study_independent_of_threads(self):
        first = simulate_lasso(60, 30, 2, reps=6, seed=13, threads=1)
        second = simulate_lasso(60, 30, 2, reps=6, seed=13, threads=2)
        self.assertTrue(first.rows.equals(second.rows))

    def test_poisson_study(self):
        report = simulate_poisson(200, 20, 2, reps=10, seed=14)
        on_event = report.rows[report.rows["kkt_event"]]
        self.assertTrue(on_event["l1_within_4B"].all())
        self.assertIn("l1_factor", report.summary["constants"])
        self.assertEqual(len(report.rows), 10)

    def test_report_serialization(self):
        report = simulate_ols(30, 3, reps=5, seed=1)
        data = json.loads(report.to_json())
        self.assertEqual(data["family"], "ols")
        self.assertEqual(data["params"]["reps"], 5)
        self.assertEqual(report.to_csv().splitlines()[0].split(",")[0], "rep")


@unittest.skipUnless(os.environ.get("CONC_TOOLBOX_SLOW") == "1", "set CONC_TOOLBOX_SLOW=1 to run")
class TestOracleEventsAtScale(unittest.TestCase):
    def test_lasso_events(self):
        reps = 500
        report = simulate_lasso(400, 1000, 5, sigma=1.0, A=8.0, reps=reps, threads=-1)
        summary = report.summary
        self.assertGreaterEqual(summary["kkt_event_frequency"], _lower_limit(summary["kkt_probability_bound"], reps))
        self.assertTrue(summary["cone_whenever_kkt"])
        self.assertGreaterEqual(report.rows["l1_within"].mean(), 0.99)
        self.assertIn("l1_within_proof_on_event", summary)

    def test_poisson_events(self):
        reps = 300
        report = simulate_poisson(500, 200, 3, L=1.0, B=1.0, A=2.0, k=0.5, reps=reps, threads=-1)
        rows = report.rows
        self.assertGreaterEqual(rows["l1_within"].mean(), _lower_limit(report.summary["probability_bound"], reps))
        self.assertTrue(rows.loc[rows["kkt_event"], "l1_within_4B"].all())


if __name__ == "__main__":
    unittest.main()
