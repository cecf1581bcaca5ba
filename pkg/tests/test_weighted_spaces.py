"""
Test cases for exponential weights, weighted norms and growth estimates.
"""
import json
import math
import os

import numpy as np

import pyliouville
import tests


def line_metric(kind="combinatorial", scale=None):
    g = pyliouville.Lattice(1)
    return pyliouville.make_metric(g, kind, scale)


def symmetric_growing():
    lam = tests.LAMBDA_GOLDEN
    return pyliouville.GraphFunction.from_callable(
            lambda x: lam ** abs(x[0]) + lam ** -abs(x[0]))


class TestWeights(tests.PyliouvilleTestCase):

    def test_weight_value(self):
        w = pyliouville.WeightFamily(line_metric(), (0,), 1.0)
        self.assertRelClose(pyliouville.weight_value(w, (3,)), math.exp(-3), rtol=1e-14)
        self.assertEqual(pyliouville.weight_value(w, (0,)), 1)
        w = pyliouville.WeightFamily(line_metric("scaled", 1 / math.sqrt(2)), (0,), 2.0)
        self.assertRelClose(pyliouville.weight_value(w, (1,)), math.exp(-math.sqrt(2)),
                            rtol=1e-14)
        self.assertRelClose(pyliouville.weight_value(w, (1,)), 0.243117, rtol=1e-6)

    def test_bad_gamma(self):
        for gamma in [0, -1]:
            with self.assertRaises(ValueError):
                pyliouville.WeightFamily(line_metric(), (0,), gamma)

    def test_truncated_norm(self):
        w = pyliouville.WeightFamily(line_metric(), (0,), 1.0)
        one = pyliouville.GraphFunction.constant(1.0)
        value = pyliouville.truncated_lp_norm(one, 1, w, 1.5)
        self.assertRelClose(value, 1 + 2 * math.exp(-1), rtol=1e-14)
        self.assertRelClose(value, 1.735759, rtol=1e-6)

    def test_norm_scaling(self):
        w = pyliouville.WeightFamily(line_metric(), (0,), 0.5)
        u = pyliouville.GraphFunction.from_callable(lambda x: math.sin(x[0]) + 0.5)
        for p in [1, 1.5, 2, 3]:
            a = pyliouville.truncated_lp_norm(u, p, w, 10)
            b = pyliouville.truncated_lp_norm(3 * u, p, w, 10)
            self.assertRelClose(b, 3 ** p * a, rtol=1e-12)

    def test_norm_monotone(self):
        w = pyliouville.WeightFamily(pyliouville.default_metric(pyliouville.Lattice(2)),
                                     (0, 0), 1.0)
        u = pyliouville.GraphFunction.constant(-2.0)
        values = [pyliouville.truncated_lp_norm(u, 2, w, R) for R in range(0, 8)]
        self.assertEqual(values[0], 0)
        self.assertTrue(all(a <= b for a, b in zip(values, values[1:])))

    def test_bad_exponent(self):
        w = pyliouville.WeightFamily(line_metric(), (0,), 1.0)
        with self.assertRaises(ValueError):
            pyliouville.truncated_lp_norm(pyliouville.GraphFunction.constant(1), 0.5, w, 2)


class TestGrowth(tests.PyliouvilleTestCase):

    def test_zero(self):
        zero = pyliouville.GraphFunction.constant(0.0)
        est = pyliouville.growth_estimate(zero, 2, (0,), line_metric(), [1, 2, 3, 4])
        self.assertEqual(est.verdict, "bounded")
        self.assertEqual(est.beta_hat, 0)
        self.assertTrue(np.all(est.partial_sums == 0))

    def test_exponential_rate(self):
        m = line_metric("scaled", 1 / math.sqrt(2))
        radii = np.linspace(20, 80, 241)
        est = pyliouville.growth_estimate(symmetric_growing(), 2, (0,), m, radii)
        expected = 2 * math.sqrt(2) * math.log(tests.LAMBDA_GOLDEN)
        self.assertEqual(est.verdict, "exponential")
        self.assertRelClose(est.beta_hat, expected, rtol=0.02)
        self.assertRelClose(expected, 2.722, rtol=1e-3)
        self.assertTrue(np.all(np.isfinite(est.log_partial_sums)))

    def test_convergent_series(self):
        u = pyliouville.GraphFunction.from_callable(lambda x: 1 / (1 + x[0] ** 2))
        est = pyliouville.growth_estimate(u, 2, (0,), line_metric(), np.arange(10, 210, 10))
        self.assertEqual(est.verdict, "bounded")
        self.assertLess(est.beta_hat, pyliouville.BOUNDED_SLOPE)

    def test_constant(self):
        one = pyliouville.GraphFunction.constant(1.0)
        est = pyliouville.growth_estimate(one, 1, (0,), line_metric(), np.arange(10, 410, 10))
        self.assertLess(est.beta_hat, 0.05)

    def test_super_exponential(self):
        u = pyliouville.GraphFunction.from_callable(
                lambda x: math.inf if abs(x[0]) > 5 else 1.0)
        est = pyliouville.growth_estimate(u, 2, (0,), line_metric(), [2, 4, 6, 8, 10])
        self.assertEqual(est.verdict, "super-exponential")
        self.assertEqual(est.overflow_radius, 8)
        self.assertEqual(est.beta_hat, math.inf)
        self.assertTrue(np.isfinite(est.log_partial_sums[2]))

    def test_bad_radii(self):
        one = pyliouville.GraphFunction.constant(1.0)
        for radii in [[1, 2], [1, 3, 2], [-1, 2, 3], [1, 2, math.inf]]:
            with self.assertRaises(ValueError):
                pyliouville.growth_estimate(one, 2, (0,), line_metric(), radii)

    def test_membership(self):
        m = line_metric("scaled", 1 / math.sqrt(2))
        radii = np.linspace(20, 60, 161)
        heavy = pyliouville.WeightFamily(m, (0,), 4.0)
        est = pyliouville.membership_estimate(symmetric_growing(), 2, heavy, radii)
        self.assertEqual(est.verdict, "bounded")
        light = pyliouville.WeightFamily(m, (0,), 1.0)
        est = pyliouville.membership_estimate(symmetric_growing(), 2, light, radii)
        self.assertEqual(est.verdict, "exponential")
        expected = 2 * math.sqrt(2) * math.log(tests.LAMBDA_GOLDEN) - 1
        self.assertRelClose(est.beta_hat, expected, rtol=0.03)
        zero = pyliouville.GraphFunction.constant(0.0)
        self.assertEqual(
            pyliouville.membership_estimate(zero, 2, light, radii).verdict, "bounded")

    def test_output(self):
        m = line_metric()
        est = pyliouville.growth_estimate(symmetric_growing(), 2, (0,), m, [2, 4, 6, 8])
        d = self.temp_dir()
        est.write_csv(os.path.join(d, "growth.csv"))
        with open(os.path.join(d, "growth.csv")) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "R,partial_sum,log_partial_sum")
        self.assertEqual(len(lines), 5)
        est.write_json(os.path.join(d, "growth.json"))
        with open(os.path.join(d, "growth.json")) as f:
            summary = json.load(f)
        self.assertEqual(summary["verdict"], "exponential")
        self.assertEqual(summary["p"], 2)


class TestSummability(tests.PyliouvilleTestCase):

    def test_line(self):
        w = pyliouville.WeightFamily(line_metric(), (0,), 1.0)
        check = pyliouville.summable_weight_check(w, np.arange(1, 41))
        self.assertTrue(check.summable)
        e = math.exp(-1)
        self.assertRelClose(check.total_estimate, (1 + e) / (1 - e), rtol=1e-10)
        self.assertRelClose(check.total_estimate, 2.163953, rtol=1e-6)
        self.assertTrue(np.all(check.ratios < 1))

    def test_square_lattice(self):
        g = pyliouville.Lattice(2)
        w = pyliouville.WeightFamily(pyliouville.make_metric(g, "combinatorial"), (0, 0), 0.1)
        check = pyliouville.summable_weight_check(w, np.arange(1, 61))
        self.assertEqual(check.verdict, "summable")
        self.assertGreater(check.total_estimate, check.partial_sums[-1])

    def test_tree(self):
        g = pyliouville.RegularTree(3)
        w = pyliouville.WeightFamily(pyliouville.make_metric(g, "combinatorial"), (), 0.5)
        check = pyliouville.summable_weight_check(w, np.arange(1, 12))
        self.assertEqual(check.verdict, "not summable")
        self.assertFalse(check.summable)
        self.assertIsNone(check.total_estimate)

    def test_too_few_radii(self):
        w = pyliouville.WeightFamily(line_metric(), (0,), 1.0)
        with self.assertRaises(ValueError):
            pyliouville.summable_weight_check(w, [1, 2, 3, 4, 5, 6], window=5)
