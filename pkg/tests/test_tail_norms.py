import math
import unittest

import numpy as np
import scipy.integrate
from parameterized import parameterized

from conc_toolbox.utils.distributions import make_spec
from conc_toolbox.utils.errors import InfiniteNormError, ParameterDomainError
from conc_toolbox.utils.numerics import solve_decreasing
from conc_toolbox.utils.tail_norms import (OrliczSpec, TailClassParams,
                                          gbo_exponent, gbo_function,
                                          gbo_inverse, gbo_norm_from_sample,
                                          psi2_sup_moment, psi_norm,
                                          psi_theta_tail, subg_moment_bound,
                                          subg_moment_root_bound)

"""
Orlicz and generalized Bernstein-Orlicz norms
python3 -m unittest tests.test_tail_norms
"""


class TestPsiNorms(unittest.TestCase):
    @parameterized.expand([[0.5], [1.0], [3.0]])
    def test_gaussian_psi2_closed_form(self, sigma):
        estimate = psi_norm(make_spec("gaussian", mu=0.0, sigma=sigma), OrliczSpec.psi(2))
        self.assertAlmostEqual(estimate.value, math.sqrt(8.0 / 3.0) * sigma, places=12)
        self.assertEqual(estimate.method, "closed_form")

    @parameterized.expand(
        [
            [family, params, theta, expected]
            for m in (0.5, 1.0, 3.0)
            for family, params, theta, expected in (
                ("rademacher", {"M": m}, 2.0, m / math.sqrt(math.log(2.0))),
                ("rademacher", {"M": m}, 1.0, m / math.log(2.0)),
                ("gaussian", {"mu": 0.0, "sigma": m}, 2.0, math.sqrt(8.0 / 3.0) * m),
                ("poisson", {"lam": m}, 1.0, 1.0 / math.log(math.log(2.0) / m + 1.0)),
            )
        ]
    )
    def test_closed_forms_agree_with_bisection(self, family, params, theta, expected):
        spec = make_spec(family, **params)
        self.assertLess(abs(psi_norm(spec, OrliczSpec.psi(theta)).value / expected - 1.0), 1e-6)
        solved = solve_decreasing(lambda t: spec.orlicz_expectation(theta, t), 2.0, x0=1.0)
        self.assertLess(abs(solved / expected - 1.0), 1e-6)

    def test_exponential_psi1(self):
        self.assertAlmostEqual(psi_norm(make_spec("exponential", mu=1.5), OrliczSpec.psi(1)).value, 3.0)

    def test_uniform_psi2_solves_the_defining_equation(self):
        t = psi_norm(make_spec("uniform", a=-1.0, b=1.0), OrliczSpec.psi(2)).value
        # E exp(X^2 / t^2) = 2
        expectation = scipy.integrate.quad(lambda x: math.exp((x / t) ** 2), 0.0, 1.0)[0]
        self.assertAlmostEqual(expectation, 2.0, places=8)

    def test_lighter_tails_sit_in_more_classes(self):
        spec = make_spec("exponential", mu=1.0)
        self.assertTrue(math.isfinite(psi_norm(spec, OrliczSpec.psi(1)).value))
        self.assertTrue(math.isfinite(psi_norm(spec, OrliczSpec.psi(0.5)).value))
        with self.assertRaises(InfiniteNormError):
            psi_norm(spec, OrliczSpec.psi(2))

    def test_norm_increases_as_theta_decreases(self):
        spec = make_spec("exponential", mu=1.0)
        self.assertLess(psi_norm(spec, OrliczSpec.psi(1)).value, psi_norm(spec, OrliczSpec.psi(0.5)).value)

    def test_general_orlicz_function(self):
        # g(x) = x^2 gives the L2 norm
        estimate = psi_norm(make_spec("gaussian", mu=0.0, sigma=1.0), OrliczSpec(g=lambda x: x * x))
        self.assertAlmostEqual(estimate.value, 1.0, places=6)

    def test_orlicz_function_must_be_convex(self):
        with self.assertRaises(ParameterDomainError):
            OrliczSpec(g=math.sqrt)

    def test_orlicz_inverse(self):
        self.assertAlmostEqual(OrliczSpec.psi(2).inverse(math.e - 1.0), 1.0, places=12)
        self.assertAlmostEqual(OrliczSpec(g=lambda x: x * x).inverse(4.0), 2.0, places=8)

    def test_sup_moment_norm_of_standard_gaussian(self):
        value = psi2_sup_moment(make_spec("gaussian", mu=0.0, sigma=1.0))
        self.assertAlmostEqual(value, math.sqrt(2.0 / math.pi), places=10)

    def test_bernoulli_psi_norm_closed_form(self):
        p = 0.2
        value = psi_norm(make_spec("bernoulli", p=p), OrliczSpec.psi(2)).value
        self.assertAlmostEqual(1.0 - p + p * math.exp(value ** -2), 2.0, places=12)


class TestTailClassParams(unittest.TestCase):
    def test_parameters_validated(self):
        with self.assertRaises(ParameterDomainError):
            TailClassParams("subG", {"sigma2": -1.0})
        with self.assertRaises(ParameterDomainError):
            TailClassParams("subE", {"sigma2": 1.0})

    def test_sub_gamma_allows_zero_scale(self):
        self.assertEqual(TailClassParams.sub_gamma(1.0, 0.0)["c"], 0.0)

    def test_as_sub_gamma(self):
        self.assertEqual(TailClassParams.sub_exponential(2.0).as_sub_gamma().params, {"v": 4.0, "c": 2.0})
        self.assertEqual(TailClassParams.sub_gaussian(3.0).as_sub_gamma().params, {"v": 3.0, "c": 0.0})

    def test_normalized_drops_equal_window(self):
        self.assertEqual(TailClassParams.sub_exponential(2.0, alpha=2.0).normalized().tail_class, "subE")

    def test_dict_round_trip(self):
        term = TailClassParams.bernstein(2.0, 1.0)
        self.assertEqual(TailClassParams.from_dict(term.to_dict()), term)


class TestMomentBounds(unittest.TestCase):
    @parameterized.expand([[k] for k in range(2, 41)])
    def test_root_bound_dominates_gamma_form(self, k):
        sigma = 1.3
        self.assertLessEqual(subg_moment_bound(sigma, k) ** (1.0 / k), subg_moment_root_bound(sigma, k))

    def test_psi_theta_tail(self):
        self.assertEqual(psi_theta_tail(1.0, 2.0, 0.0), 1.0)
        self.assertAlmostEqual(psi_theta_tail(2.0, 1.0, 4.0), 2.0 * math.exp(-2.0), places=14)


class TestGBO(unittest.TestCase):
    @parameterized.expand(
        [[theta, L] for theta in (0.5, 1.0, 1.5, 2.0) for L in (0.0, 0.5, 2.0)]
    )
    def test_exponent_inverts_the_inverse(self, theta, L):
        t = 3.0
        x = gbo_inverse(theta, L, t)
        self.assertAlmostEqual(float(gbo_exponent(x, theta, L)) / math.log1p(t), 1.0, places=9)
        self.assertAlmostEqual(gbo_function(theta, L, x) / t, 1.0, places=8)

    def test_exponent_is_vectorized(self):
        x = np.array([0.5, 1.0, 2.0])
        values = gbo_exponent(x, 0.7, 1.0)
        self.assertEqual(values.shape, (3,))
        self.assertTrue(np.all(np.diff(values) > 0))

    def test_norm_of_a_constant(self):
        draws = np.full(1000, 2.0)
        estimate = gbo_norm_from_sample(draws, 1.5, 0.5)
        self.assertAlmostEqual(estimate.value, 2.0 / gbo_inverse(1.5, 0.5, 1.0), places=7)
        self.assertEqual(estimate.samples_used, 1000)

    def test_norm_of_zero_draws(self):
        self.assertEqual(gbo_norm_from_sample(np.zeros(10), 1.0, 1.0).value, 0.0)


if __name__ == "__main__":
    unittest.main()
