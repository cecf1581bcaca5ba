"""
Common code for the pyliouville test cases.
"""
import math
import os
import tempfile
import unittest

import numpy as np

import pyliouville

LAMBDA_GOLDEN = (3 + math.sqrt(5)) / 2

# (name, graph, radius) for the balls the estimate suites run on
example_graphs = {
    "lattice1": (lambda: pyliouville.Lattice(1), 40.0),
    "lattice2": (lambda: pyliouville.Lattice(2), 15.0),
    "tree3": (lambda: pyliouville.RegularTree(3), 8.0),
}


class PyliouvilleTestCase(unittest.TestCase):
    '''
    Base class for test cases in pyliouville.
    '''

    def assertArrayEqual(self, x, y):
        self.assertListEqual(list(x), list(y))

    def assertArrayAlmostEqual(self, x, y):
        self.assertEqual(len(x), len(y))
        for a, b in zip(x, y):
            self.assertAlmostEqual(a, b)

    def assertRelClose(self, x, y, rtol=1e-12, atol=0.0):
        self.assertLessEqual(abs(x - y), atol + rtol * max(abs(x), abs(y)),
                             msg="{} != {} (rtol={})".format(x, y, rtol))

    def assertPasses(self, report):
        self.assertTrue(report.passed,
                        msg="{} failed: min margin {}, failing {}, failures {}".format(
                            report.check_name, report.min_margin,
                            report.failing_locations[:5], report.failures[:5]))

    def get_examples(self, radius=None):
        '''
        Yields ``(name, g, m, region)`` for each example graph with its
        default (intrinsic) metric, on the ball around the origin.
        '''
        for name, (make, r) in example_graphs.items():
            g = make()
            m = pyliouville.default_metric(g)
            rad = r if radius is None else radius
            region = pyliouville.materialize(
                    g, pyliouville.ball(g, m, g.origin, rad), seed=g.origin)
            yield name, g, m, region

    def line_region(self, R):
        g = pyliouville.Lattice(1)
        return g, pyliouville.materialize(g, [(n,) for n in range(-R, R + 1)], seed=(0,))

    def line_solution(self, R, c0=1.0):
        g, region = self.line_region(R)
        V = pyliouville.Potential.constant(c0)
        problem = pyliouville.DirichletProblem(
                region, pyliouville.GraphFunction.constant(1.0), V)
        return g, region, V, pyliouville.dirichlet_solve(problem)

    def write_temp_file(self, text, suffix=".txt"):
        fd, path = tempfile.mkstemp(suffix=suffix)
        with os.fdopen(fd, "w") as f:
            f.write(text)
        self.addCleanup(os.remove, path)
        return path

    def temp_dir(self):
        d = tempfile.TemporaryDirectory()
        self.addCleanup(d.cleanup)
        return d.name

    def rng(self, seed=23):
        return np.random.default_rng(seed)
