"""
Test cases for verification reports and provenance records.
"""
import csv
import json
import math
import os

import numpy as np
import pytest

import pyliouville
import tests


class TestVerificationReport(tests.PyliouvilleTestCase):

    def example_report(self):
        return pyliouville.VerificationReport(
                "example", [(0,), (1,), (2,)], [1.0, -1e-12, -0.5], slack=1e-9,
                params={"alpha": 0.5}, details={"K": np.float64(2.0)})

    def test_margins(self):
        r = self.example_report()
        self.assertEqual(r.n_vertices, 3)
        self.assertEqual(r.min_margin, -0.5)
        self.assertEqual(r.tolerance, 1e-9)
        self.assertEqual(r.failing_locations, [(2,)])
        self.assertFalse(r.passed)
        self.assertEqual(r.verdict, "fail")
        self.assertEqual(r.margin_at((1,)), -1e-12)

    def test_slack_rescues(self):
        r = pyliouville.VerificationReport("ok", [(0,), (1,)], [0.0, -1e-12], slack=1e-9)
        self.assertTrue(r.passed)
        self.assertEqual(r.verdict, "pass")
        r.add_failure("precondition rejected")
        self.assertFalse(r.passed)
        self.assertEqual(r.failing_locations, [])

    def test_empty(self):
        r = pyliouville.VerificationReport("empty")
        self.assertTrue(r.passed)
        self.assertIsNone(r.min_margin)
        self.assertEqual(r.tolerance, 0)

    def test_mismatched_lengths(self):
        with self.assertRaises(ValueError):
            pyliouville.VerificationReport("bad", [(0,), (1,)], [0.0])

    def test_inequality_slack(self):
        slack = pyliouville.inequality_slack([1.0, -1e6], [2.0, 0.0])
        self.assertArrayAlmostEqual(slack, [1e-9 + 2e-9, 1e-9 + 1e-3])

    def test_to_dict(self):
        g = pyliouville.Lattice(1)
        d = self.example_report().to_dict(g.format_vertex)
        self.assertEqual(d["failing_vertices"], ["2"])
        self.assertEqual(d["verdict"], "fail")
        self.assertEqual(d["params"], {"alpha": 0.5})
        self.assertEqual(d["details"], {"K": 2.0})
        self.assertEqual(d["min_margin"], -0.5)
        json.dumps(d)

    def test_infinite_values(self):
        r = pyliouville.VerificationReport(
                "inf", [pyliouville.GLOBAL], [math.inf], details={"x": -math.inf})
        d = r.to_dict()
        self.assertIsNone(d["min_margin"])
        self.assertIsNone(d["details"]["x"])
        self.assertEqual(d["failing_vertices"], [])

    def test_write(self):
        g = pyliouville.Lattice(2)
        fmt = pyliouville.location_formatter(g)
        r = pyliouville.VerificationReport(
                "write", [(0, 0), ((0, 0), (1, 0)), pyliouville.GLOBAL], [0.5, 1 / 3, -2.0])
        d = self.temp_dir()
        r.write_json(os.path.join(d, "r.json"), fmt)
        r.write_csv(os.path.join(d, "r.csv"), fmt)
        with open(os.path.join(d, "r.json")) as f:
            out = json.load(f)
        self.assertEqual(out["failing_vertices"], ["global"])
        with open(os.path.join(d, "r.csv")) as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], ["vertex", "margin"])
        self.assertEqual([row[0] for row in rows[1:]], ["0,0", "0,0 1,0", "global"])
        self.assertEqual(float(rows[2][1]), 1 / 3)

    def test_location_formatter(self):
        fmt = pyliouville.location_formatter(pyliouville.RegularTree(3))
        self.assertEqual(fmt(()), "r")
        self.assertEqual(fmt((2, 1)), "r.2.1")
        self.assertEqual(fmt(((), (0,))), "r r.0")
        self.assertEqual(fmt("ibp:3"), "ibp:3")
        fmt = pyliouville.location_formatter(pyliouville.Lattice(1))
        self.assertEqual(fmt(((1,), (0,), (-1,))), "1 0 -1")

    def test_failed_report(self):
        r = pyliouville.failed_report("energy_estimate", "u must have finite support.",
                                      params={"p": 2})
        self.assertFalse(r.passed)
        self.assertEqual(r.n_vertices, 0)
        self.assertEqual(r.to_dict()["failures"], ["u must have finite support."])

    def test_merge(self):
        a = pyliouville.VerificationReport("x", [(0,)], [1.0], params={"beta": 0.5})
        b = pyliouville.VerificationReport("x", [(0,), (1,)], [2.0, -1.0], slack=0.5,
                                           params={"beta": 0.9}, failures=["oops"])
        r = pyliouville.merge_reports("x", [a, b])
        self.assertEqual(r.n_vertices, 3)
        self.assertEqual(r.params, {"runs": [{"beta": 0.5}, {"beta": 0.9}]})
        self.assertEqual(r.details["num_runs"], 2)
        self.assertEqual(r.failures, ["oops"])
        self.assertEqual(r.failing_locations, [(1,)])
        self.assertArrayEqual(r.slack, [0, 0.5, 0.5])
        empty = pyliouville.merge_reports("x", [])
        self.assertTrue(empty.passed)
        self.assertEqual(empty.details["num_runs"], 0)


class TestProvenance(tests.PyliouvilleTestCase):

    def test_make_provenance(self):
        d = pyliouville.make_provenance_dict(["pyliouville", "verify"], {"p": 2.0})
        self.assertEqual(d["software"]["name"], "pyliouville")
        self.assertEqual(d["software"]["version"], pyliouville.__version__)
        self.assertEqual(d["parameters"]["command"], ["pyliouville", "verify"])
        self.assertEqual(d["parameters"]["config"], {"p": 2.0})
        self.assertIn("numpy", d["environment"]["libraries"])
        self.assertIn("scipy", d["environment"]["libraries"])
        json.dumps(d)

    def test_defaults(self):
        d = pyliouville.make_provenance_dict()
        self.assertEqual(d["parameters"]["command"], [])
        self.assertEqual(d["parameters"]["config"], {})

    def test_version(self):
        d = pyliouville.make_provenance_dict()
        self.assertEqual(pyliouville.provenance_version(d), (True, pyliouville.__version__))
        self.assertEqual(pyliouville.provenance_version(json.dumps(d)),
                         (True, pyliouville.__version__))
        other = {"software": {"name": "othersim", "version": "3.3"}}
        self.assertEqual(pyliouville.provenance_version(other), (False, "3.3"))
        self.assertEqual(pyliouville.provenance_version({"program": "x"}), (False, "unknown"))
        self.assertEqual(pyliouville.provenance_version([]), (False, "unknown"))

    def test_parse(self):
        d = pyliouville.make_provenance_dict(["pyliouville", "decay"], {"radii": [3.0]})
        for record in [d, json.dumps(d)]:
            prov = pyliouville.parse_provenance(record)
            self.assertEqual(prov.version, pyliouville.__version__)
            self.assertEqual(prov.command, ["pyliouville", "decay"])
            self.assertEqual(prov.config, {"radii": [3.0]})

    def test_parse_foreign(self):
        for record in [{"software": {"name": "othersim", "version": "1.0"}}, "{}"]:
            with pytest.raises(ValueError, match="Not a pyliouville"):
                pyliouville.parse_provenance(record)

    def test_write(self):
        path = os.path.join(self.temp_dir(), "provenance.json")
        config = pyliouville.ExperimentConfig().to_dict()
        pyliouville.write_provenance(path, ["pyliouville", "certify"], config)
        with open(path) as f:
            prov = pyliouville.parse_provenance(f.read())
        self.assertEqual(pyliouville.ExperimentConfig.from_dict(prov.config),
                         pyliouville.ExperimentConfig())
