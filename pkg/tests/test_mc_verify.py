import os
import unittest

import numpy as np
from parameterized import parameterized

from conc_toolbox.bounds import catalog
from conc_toolbox.bounds.tail_bound import RIGHT, TailBound
from conc_toolbox.maxima import subg_max_expect
from conc_toolbox.utils.errors import IncompatibleExperimentError
from conc_toolbox.verification import mc_verify, models

"""
Monte-Carlo certification of tail bounds
python3 -m unittest tests.test_mc_verify

The full certification at 10^5 replications per family runs only with
CONC_TOOLBOX_SLOW=1 set.
"""

GAUSSIAN = {"statistic": "sum", "law": {"family": "gaussian", "params": {"mu": 0.0, "sigma": 1.0}}, "n": 1}
RADEMACHER = {"statistic": "sum", "law": {"family": "rademacher", "params": {"M": 1.0}}, "n": 1}
BERNOULLI_MEAN = {
    "statistic": "sum",
    "law": {"family": "bernoulli", "params": {"p": 0.3}},
    "n": 40,
    "weights": 0.025,
    "center": "mean",
}


class TestBinomialLimits(unittest.TestCase):
    @parameterized.expand([[1000], [100000]])
    def test_upper_limit_without_exceedances(self, R):
        level = 1e-4
        self.assertAlmostEqual(mc_verify.binomial_upper(0, R, level), 1.0 - level ** (1.0 / R), places=12)
        self.assertEqual(mc_verify.binomial_lower(0, R, level), 0.0)
        self.assertEqual(mc_verify.binomial_upper(R, R, level), 1.0)

    def test_limits_bracket_the_frequency(self):
        lower = mc_verify.binomial_lower(37, 1000)
        upper = mc_verify.binomial_upper(37, 1000)
        self.assertLess(lower, 0.037)
        self.assertGreater(upper, 0.037)

    def test_count_range(self):
        with self.assertRaises(ValueError):
            mc_verify.binomial_upper(11, 10)


class TestExperiment(unittest.TestCase):
    def test_minimum_replications(self):
        with self.assertRaises(IncompatibleExperimentError):
            mc_verify.Experiment(GAUSSIAN, (1.0,), replications=999)

    def test_grid_strictly_increasing(self):
        with self.assertRaises(IncompatibleExperimentError):
            mc_verify.Experiment(GAUSSIAN, (1.0, 1.0), replications=1000)

    def test_unknown_statistic(self):
        with self.assertRaises(IncompatibleExperimentError):
            mc_verify.Experiment({"statistic": "median", "law": GAUSSIAN["law"]}, (1.0,), replications=1000)

    def test_blocks(self):
        experiment = mc_verify.Experiment(GAUSSIAN, (1.0,), replications=25000)
        self.assertEqual(experiment.blocks(), [(0, 10000), (1, 10000), (2, 5000)])

    def test_dict_round_trip(self):
        experiment = mc_verify.Experiment(BERNOULLI_MEAN, (0.1, 0.2), replications=2000, seed=5)
        self.assertEqual(mc_verify.Experiment.from_dict(experiment.to_dict()), experiment)
        with self.assertRaises(IncompatibleExperimentError):
            mc_verify.Experiment.from_dict({**experiment.to_dict(), "level": 0.1})


class TestExceedances(unittest.TestCase):
    def test_counts_include_the_threshold(self):
        experiment = mc_verify.Experiment(RADEMACHER, (0.5, 1.0, 1.5), replications=3000)
        np.testing.assert_array_equal(mc_verify.exceedance_counts(experiment), [3000, 3000, 0])

    def test_right_side_keeps_the_sign(self):
        experiment = mc_verify.Experiment(RADEMACHER, (1.0,), replications=20000, side=RIGHT)
        count = int(mc_verify.exceedance_counts(experiment)[0])
        self.assertGreater(count, 9000)
        self.assertLess(count, 11000)

    def test_independent_of_threads(self):
        experiment = mc_verify.Experiment(BERNOULLI_MEAN, (0.05, 0.1, 0.15), replications=30000, seed=17)
        np.testing.assert_array_equal(
            mc_verify.exceedance_counts(experiment, threads=1), mc_verify.exceedance_counts(experiment, threads=2)
        )

    def test_simulation_is_blockwise_deterministic(self):
        experiment = mc_verify.Experiment(GAUSSIAN, (1.0,), replications=1000, seed=3)
        first = models.simulate(GAUSSIAN, experiment.stream.generator(4), 10)
        second = models.simulate(GAUSSIAN, experiment.stream.generator(4), 10)
        np.testing.assert_array_equal(first, second)


class TestCertification(unittest.TestCase):
    def test_valid_bound_passes(self):
        experiment = catalog.experiment("hoeffding", replications=20000)
        report = mc_verify.run(experiment, catalog.default_bound("hoeffding"))
        self.assertTrue(report.passed)
        self.assertEqual(report.failures, 0)
        self.assertEqual(
            list(report.rows.columns),
            ["t", "bound", "raw_bound", "exceedances", "empirical_freq", "binomial_lower", "binomial_upper", "verdict"],
        )

    def test_shrunk_bound_fails(self):
        experiment = mc_verify.Experiment(GAUSSIAN, (0.5, 1.0, 1.5), replications=20000)
        bound = catalog.build("mills_sharp")
        report = mc_verify.falsify(experiment, bound, 0.1)
        self.assertFalse(report.passed)
        self.assertTrue(mc_verify.shrink_expected_to_fail(report))

    def test_right_tail_bound_cannot_certify_two_sided(self):
        experiment = mc_verify.Experiment(GAUSSIAN, (1.0,), replications=1000)
        bound = TailBound("right_only", lambda t: 1.0, side=RIGHT)
        with self.assertRaises(IncompatibleExperimentError):
            mc_verify.run(experiment, bound)

    def test_grid_outside_domain(self):
        experiment = mc_verify.Experiment(GAUSSIAN, (0.5, 20.0), replications=1000)
        bound = TailBound("short", lambda t: 1.0, domain=(0.0, 10.0))
        with self.assertRaises(IncompatibleExperimentError):
            mc_verify.run(experiment, bound)

    def test_report_is_deterministic(self):
        experiment = catalog.experiment("dkw", replications=5000, seed=8)
        first = mc_verify.run(experiment, catalog.default_bound("dkw"))
        second = mc_verify.run(experiment, catalog.default_bound("dkw"), threads=2)
        self.assertTrue(first.rows.equals(second.rows))

    def test_expectation_check(self):
        model = {"statistic": "max", "law": GAUSSIAN["law"], "n": 100}
        check = mc_verify.expectation_check(model, subg_max_expect(1.0, 100)[0], replications=2000)
        self.assertTrue(check.passed)
        self.assertLess(check.mean, check.bound)

    def test_suite(self):
        entries = catalog.certification_entries(["hoeffding", "dkw"])
        frame, passed, reports = mc_verify.suite(entries, replications=5000, seed=12)
        self.assertTrue(passed)
        self.assertEqual([r.family for r in reports], ["hoeffding", "dkw"])
        self.assertEqual(set(frame["family"]), {"hoeffding", "dkw"})
        self.assertEqual(len(frame), 16)


@unittest.skipUnless(os.environ.get("CONC_TOOLBOX_SLOW") == "1", "set CONC_TOOLBOX_SLOW=1 to run")
class TestFullCertification(unittest.TestCase):
    def test_every_certified_family_passes(self):
        entries = catalog.certification_entries(replications=100000)
        frame, passed, reports = mc_verify.suite(entries, replications=100000, threads=-1)
        failed = sorted({r.family for r in reports if not r.passed})
        self.assertTrue(passed, f"failing families: {failed}")

    def test_every_shrunk_family_fails_where_it_can(self):
        entries = catalog.certification_entries(replications=100000)
        _, _, reports = mc_verify.suite(entries, replications=100000, threads=-1, shrink_factor=0.1)
        for report in reports:
            if mc_verify.shrink_expected_to_fail(report):
                self.assertFalse(report.passed, report.family)


if __name__ == "__main__":
    unittest.main()
