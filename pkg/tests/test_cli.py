"""
Test cases for the command line interface and experiment configuration.
"""
import csv
import json
import math
import os

import pytest

import pyliouville
import tests
from pyliouville import cli


class CliTestCase(tests.PyliouvilleTestCase):

    def run_cli(self, command, config=None, extra=()):
        out_dir = self.temp_dir()
        argv = [command, "-o", out_dir, "-q"]
        if config is not None:
            argv += ["-c", self.write_temp_file(json.dumps(config), suffix=".json")]
        status = cli.main(argv + list(extra))
        return status, out_dir

    def read_json(self, out_dir, name):
        with open(os.path.join(out_dir, name)) as f:
            return json.load(f)


class TestCertify(CliTestCase):

    def test_default_metric(self):
        status, out_dir = self.run_cli("certify")
        self.assertEqual(status, cli.EXIT_OK)
        out = self.read_json(out_dir, "certify.json")
        self.assertRelClose(out["s"], 1 / math.sqrt(2), rtol=1e-14)
        self.assertRelClose(out["C0"], math.sqrt(2), rtol=1e-14)
        self.assertRelClose(out["beta_star"], 0.99, rtol=0.01)
        self.assertRelClose(
            out["beta_star"], pyliouville.beta_threshold(1, 2, 1 / math.sqrt(2)), rtol=1e-12)
        self.assertTrue(out["uniqueness_certified"])
        self.assertTrue(out["constants_exact"])
        self.assertEqual(out["refusals"], [])
        self.assertTrue(os.path.exists(os.path.join(out_dir, "provenance.json")))

    def test_tree(self):
        status, out_dir = self.run_cli(
                "certify", {"family": {"kind": "regular_tree", "branching": 3}})
        self.assertEqual(status, cli.EXIT_OK)
        out = self.read_json(out_dir, "certify.json")
        self.assertRelClose(out["s"], 1 / math.sqrt(3), rtol=1e-14)
        self.assertRelClose(out["intrinsic_bound"], 1.0, rtol=1e-12)
        self.assertRelClose(out["beta_star"], 1.0751, rtol=1e-3)
        self.assertTrue(out["constants_exact"])
        self.assertTrue(out["uniqueness_certified"])

    def test_file_potential(self):
        path = self.write_temp_file("0 2.0\n1 0.5\n")
        config = {"potential": {"kind": "file", "file": path, "default": 1.0}}
        status, out_dir = self.run_cli("certify", config)
        self.assertEqual(status, cli.EXIT_OK)
        out = self.read_json(out_dir, "certify.json")
        self.assertEqual(out["c0"], 0.5)
        self.assertTrue(out["c0_exact"])
        self.assertRelClose(
            out["beta_star"], pyliouville.beta_threshold(0.5, 2, 1 / math.sqrt(2)), rtol=1e-12)

    def test_combinatorial_metric_refused(self):
        status, out_dir = self.run_cli("certify", {"metric": {"kind": "combinatorial"}})
        self.assertEqual(status, cli.EXIT_FAILED)
        out = self.read_json(out_dir, "certify.json")
        self.assertFalse(out["uniqueness_certified"])
        self.assertEqual(len(out["refusals"]), 1)
        self.assertIn("not intrinsic", out["refusals"][0])
        self.assertRelClose(out["intrinsic_bound"], 2.0, rtol=1e-14)

    def test_beta_too_large(self):
        status, out_dir = self.run_cli("certify", {"beta": 5})
        self.assertEqual(status, cli.EXIT_FAILED)
        out = self.read_json(out_dir, "certify.json")
        self.assertFalse(out["uniqueness_certified"])
        self.assertIn("beta", out["refusals"][0])

    def test_p_below_two(self):
        status, out_dir = self.run_cli("certify", {"p": 1})
        self.assertEqual(status, cli.EXIT_OK)
        out = self.read_json(out_dir, "certify.json")
        self.assertIsNone(out["beta_star"])
        self.assertFalse(out["uniqueness_certified"])
        self.assertRelClose(
            out["alpha_star"],
            pyliouville.alpha_threshold(1, 1, 1 / math.sqrt(2), math.sqrt(2)), rtol=1e-12)

    def test_bad_potential(self):
        status, out_dir = self.run_cli("certify", {"potential": {"c0": 0}})
        self.assertEqual(status, cli.EXIT_FAILED)


class TestVerify(CliTestCase):
    checks = ["region", "potential", "exponent_bound", "compatibility"]

    def test_passes(self):
        status, out_dir = self.run_cli("verify", {"radius": 10, "checks": self.checks})
        self.assertEqual(status, cli.EXIT_OK)
        summary = self.read_json(out_dir, "summary.json")
        self.assertEqual(sorted(summary), sorted(self.checks))
        for name in self.checks:
            self.assertEqual(summary[name]["verdict"], "pass")
            r = self.read_json(out_dir, "{}.json".format(name))
            self.assertEqual(r["check_name"], name)
            with open(os.path.join(out_dir, "{}.csv".format(name))) as f:
                rows = list(csv.reader(f))
            self.assertEqual(rows[0], ["vertex", "margin"])
            self.assertEqual(len(rows), r["n_vertices"] + 1)

    def test_default_suite(self):
        status, out_dir = self.run_cli("verify")
        self.assertEqual(status, cli.EXIT_OK)
        summary = self.read_json(out_dir, "summary.json")
        self.assertEqual(sorted(summary), sorted(pyliouville.CHECK_NAMES))
        for name, entry in summary.items():
            self.assertEqual(entry["verdict"], "pass", msg=name)
            self.assertEqual(entry["failures"], [], msg=name)

    def test_bad_potential(self):
        config = {"radius": 6, "checks": ["potential", "exponent_bound"],
                  "potential": {"c0": 0}}
        status, out_dir = self.run_cli("verify", config)
        self.assertEqual(status, cli.EXIT_FAILED)
        summary = self.read_json(out_dir, "summary.json")
        self.assertEqual(summary["potential"]["verdict"], "fail")
        self.assertEqual(summary["exponent_bound"]["verdict"], "fail")

    def test_no_admissible_parameters(self):
        config = {"radius": 6, "checks": ["region", "supersolution"], "cutoff_radius": 0.5}
        status, out_dir = self.run_cli("verify", config)
        self.assertEqual(status, cli.EXIT_FAILED)
        summary = self.read_json(out_dir, "summary.json")
        self.assertEqual(summary["region"]["verdict"], "pass")
        self.assertEqual(summary["supersolution"]["verdict"], "fail")
        self.assertEqual(len(summary["supersolution"]["failures"]), 1)


class TestSharpness(CliTestCase):

    def test_default(self):
        status, out_dir = self.run_cli("sharpness")
        self.assertEqual(status, cli.EXIT_OK)
        out = self.read_json(out_dir, "sharpness.json")
        self.assertTrue(out["consistent"])
        self.assertGreater(out["beta_hat"], out["beta_star"])
        self.assertEqual(out["zero_membership_verdict"], "bounded")
        self.assertRelClose(out["lambda_plus"], tests.LAMBDA_GOLDEN, rtol=1e-14)
        with open(os.path.join(out_dir, "growth.csv")) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "R,partial_sum,log_partial_sum")
        self.assertEqual(len(lines), len(cli.DEFAULT_SHARPNESS_RADII) + 1)
        self.assertEqual(self.read_json(out_dir, "growth.json")["verdict"], "exponential")

    def test_needs_line(self):
        config = {"family": {"kind": "lattice", "dimension": 2}}
        status, out_dir = self.run_cli("sharpness", config)
        self.assertEqual(status, cli.EXIT_FAILED)
        self.assertFalse(os.path.exists(os.path.join(out_dir, "sharpness.json")))


class TestDecay(CliTestCase):

    def test_decay(self):
        status, out_dir = self.run_cli("decay")
        self.assertEqual(status, cli.EXIT_OK)
        with open(os.path.join(out_dir, "decay.csv")) as f:
            rows = list(csv.DictReader(f))
        self.assertEqual([int(row["R"]) for row in rows], cli.DEFAULT_DECAY_RADII)
        for row in rows:
            self.assertRelClose(float(row["normalized"]), 1, rtol=1e-8)
        u0 = [float(row["u0"]) for row in rows]
        self.assertTrue(all(a > b for a, b in zip(u0, u0[1:])))

    def test_radii(self):
        status, out_dir = self.run_cli("decay", {"radii": [5]})
        self.assertEqual(status, cli.EXIT_OK)
        with open(os.path.join(out_dir, "decay.csv")) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "R,u0,normalized")
        self.assertEqual(len(lines), 2)
        R, u0, normalized = lines[1].split(",")
        self.assertEqual(R, "5")
        self.assertRelClose(float(u0), 2 / 123, rtol=1e-8)
        self.assertRelClose(float(normalized), 1, rtol=1e-8)

    def test_bad_radius(self):
        status, out_dir = self.run_cli("decay", {"radii": [0]})
        self.assertEqual(status, cli.EXIT_FAILED)


class TestSolve(CliTestCase):

    def test_solve(self):
        status, out_dir = self.run_cli("solve", {"radius": 5})
        self.assertEqual(status, cli.EXIT_OK)
        g = pyliouville.Lattice(1)
        u = pyliouville.load_function(os.path.join(out_dir, "solution.txt"), g)
        # the ball of radius 5 in the metric with steps 1/sqrt(2)
        self.assertEqual(len(u.support), 15)
        self.assertEqual(u((7,)), 1)
        self.assertTrue(0 < u((0,)) < 1)
        residual = self.read_json(out_dir, "residual.json")
        self.assertEqual(residual["verdict"], "pass")
        self.assertEqual(residual["n_vertices"], 13)

    def test_output(self):
        path = os.path.join(self.temp_dir(), "u.txt")
        status, out_dir = self.run_cli("solve", {"radius": 3}, extra=["--output", path])
        self.assertEqual(status, cli.EXIT_OK)
        self.assertTrue(os.path.exists(path))
        self.assertFalse(os.path.exists(os.path.join(out_dir, "solution.txt")))


class TestMain(CliTestCase):

    def test_unknown_key(self):
        status, out_dir = self.run_cli("certify", {"raduis": 3})
        self.assertEqual(status, cli.EXIT_USAGE)
        self.assertFalse(os.path.exists(os.path.join(out_dir, "certify.json")))

    def test_invalid_json(self):
        out_dir = self.temp_dir()
        path = self.write_temp_file("{not json", suffix=".json")
        self.assertEqual(cli.main(["verify", "-o", out_dir, "-c", path]), cli.EXIT_USAGE)

    def test_missing_config(self):
        out_dir = self.temp_dir()
        path = os.path.join(out_dir, "nonexistent.json")
        self.assertEqual(cli.main(["decay", "-o", out_dir, "-c", path]), cli.EXIT_USAGE)

    def test_version(self):
        with pytest.raises(SystemExit) as e:
            cli.main(["--version"])
        self.assertEqual(e.value.code, 0)

    def test_no_command(self):
        with pytest.raises(SystemExit) as e:
            cli.main([])
        self.assertEqual(e.value.code, 2)

    def test_provenance(self):
        status, out_dir = self.run_cli("decay", {"radii": [3, 4]})
        self.assertEqual(status, cli.EXIT_OK)
        record = self.read_json(out_dir, "provenance.json")
        prov = pyliouville.parse_provenance(record)
        self.assertEqual(prov.version, pyliouville.__version__)
        self.assertEqual(prov.command[:2], ["pyliouville", "decay"])
        self.assertEqual(prov.config["radii"], [3.0, 4.0])
        config = pyliouville.ExperimentConfig.from_dict(prov.config)
        self.assertEqual(config.radii, [3.0, 4.0])


class TestConfig(tests.PyliouvilleTestCase):

    def test_defaults(self):
        config = pyliouville.ExperimentConfig()
        self.assertEqual(config.family, pyliouville.FamilyDescriptor.lattice(1))
        self.assertEqual(config.metric.kind, "default")
        self.assertEqual(config.potential.c0, 1.0)
        self.assertEqual(config.p, 2.0)
        self.assertEqual(config.radius, 20.0)
        self.assertEqual(config.selected_checks(), list(pyliouville.CHECK_NAMES))

    def test_round_trip(self):
        config = pyliouville.ExperimentConfig.from_dict({
            "family": {"kind": "regular_tree", "branching": 3},
            "metric": {"kind": "scaled", "scale": 0.5},
            "potential": {"kind": "perturbed", "c0": 0.5, "amplitude": 1},
            "p": 3, "radii": [1, 2, 3], "checks": ["region"], "tol": {"identity": 1e-10},
        })
        d = config.to_dict()
        self.assertEqual(d["family"]["branching"], 3)
        self.assertEqual(d["tol"]["identity"], 1e-10)
        self.assertEqual(pyliouville.ExperimentConfig.from_dict(d), config)
        self.assertEqual(pyliouville.ExperimentConfig.from_dict(json.loads(json.dumps(d))),
                         config)

    def test_selected_checks(self):
        checks = pyliouville.ExperimentConfig(p=1.5).selected_checks()
        for name in pyliouville.P2_CHECKS:
            self.assertNotIn(name, checks)
        self.assertIn("adjoint_estimate", checks)
        config = pyliouville.ExperimentConfig(p=1.5, checks=["ball_decay"])
        self.assertEqual(config.selected_checks(), ["ball_decay"])

    def test_unknown_keys(self):
        for d in [{"raduis": 1}, {"metric": {"kind": "default", "scael": 1}},
                  {"potential": {"c": 1}}, {"family": {"kind": "lattice", "dim": 1}},
                  {"tol": {"identiy": 1}}, {"boundary": {"values": 1}}]:
            with self.assertRaises(ValueError):
                pyliouville.ExperimentConfig.from_dict(d)

    def test_bad_values(self):
        for d in [{"p": 0.5}, {"delta": 0}, {"delta": 1}, {"radius": 0},
                  {"beta": -1}, {"metric": {"kind": "hyperbolic"}},
                  {"potential": {"kind": "random"}}, {"checks": ["everything"]},
                  {"tol": {"inequality": 0}}, {"samples": 0}, {"metric": 3}]:
            with self.assertRaises(ValueError):
                pyliouville.ExperimentConfig.from_dict(d)

    def test_load_config(self):
        path = self.write_temp_file(json.dumps({"p": 1, "delta": 0.25}), suffix=".json")
        config = pyliouville.load_config(path)
        self.assertEqual(config.p, 1.0)
        self.assertEqual(config.delta, 0.25)
        path = self.write_temp_file("[1, 2", suffix=".json")
        with pytest.raises(ValueError, match="not valid JSON"):
            pyliouville.load_config(path)

    def test_make_objects(self):
        config = pyliouville.ExperimentConfig.from_dict({
            "family": {"kind": "lattice", "dimension": 2},
            "metric": {"kind": "combinatorial"},
            "x0": "1,2",
        })
        g = config.make_graph()
        self.assertEqual(g.dimension, 2)
        self.assertEqual(config.make_metric(g).kind, "combinatorial")
        self.assertEqual(config.base_point(g), (1, 2))
        self.assertEqual(config.make_potential(g)((0, 0)), 1.0)
        self.assertEqual(config.make_boundary(g)((5, 5)), 1.0)

    def test_potential_file(self):
        g = pyliouville.Lattice(1)
        path = self.write_temp_file("0 2.0\n1 3.0\n")
        config = pyliouville.ExperimentConfig.from_dict(
                {"potential": {"kind": "file", "file": path, "default": 1.5}})
        V = config.make_potential(g)
        self.assertEqual(V((1,)), 3.0)
        self.assertEqual(V((9,)), 1.5)
        config = pyliouville.ExperimentConfig.from_dict({"potential": {"kind": "file"}})
        with pytest.raises(ValueError, match="potential.file"):
            config.make_potential(g)
