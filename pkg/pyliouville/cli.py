"""
The ``pyliouville`` command line interface.
"""
import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import _version
from . import calculus
from . import config as config_
from . import estimates
from . import graph
from . import metric
from . import provenance
from . import report
from . import schrodinger
from . import weighted_spaces
from .util import format_float

# Exit statuses.
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

DEFAULT_SHARPNESS_RADII = np.linspace(10, 40, 121)
DEFAULT_DECAY_RADII = list(range(3, 13))


def _echo(args, message):
    if args.verbose:
        print(message, file=sys.stderr)


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report._jsonable(obj), f, indent=2, sort_keys=True)
        f.write("\n")


def _out_dir(args, config):
    out = args.out_dir if args.out_dir is not None else config.out_dir
    os.makedirs(out, exist_ok=True)
    return out


def _region_around(g, x0, steps):
    return graph.materialize(g, graph.closed_neighborhood(g, [x0], steps), seed=x0)


def _certify_region(g, m, x0, radius):
    # one vertex and its neighbors determine the constants of a homogeneous
    # metric; finite graphs are taken whole
    if m.homogeneous:
        return _region_around(g, x0, 2)
    if g.is_finite:
        return graph.materialize(g, g.vertices(), seed=x0)
    return graph.materialize(g, metric.ball(g, m, x0, radius), seed=x0)


def _metric_constants(g, m, region):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = metric.jump_size(g, m, region)
        C0 = metric.intrinsic_bound(g, m, 1, region)
        C2 = metric.intrinsic_bound(g, m, 2, region)
    return s, C0, C2


def _require_line(g, command):
    if not (isinstance(g, graph.Lattice) and g.dimension == 1):
        raise ValueError("The {} experiment needs the one-dimensional lattice.".format(command))


def _constant_c0(config):
    if config.potential.kind != "constant":
        raise ValueError("This experiment needs a constant potential.")
    return config.potential.c0


def cmd_certify(config, args):
    '''
    Computes the metric constants and the thresholds for the configured
    graph, metric and potential. Certification of the weighted uniqueness
    class (p >= 2) is refused if the metric is not intrinsic.
    '''
    g = config.make_graph()
    m = config.make_metric(g)
    x0 = config.base_point(g)
    V = config.make_potential(g)
    region = _certify_region(g, m, x0, config.radius)
    s, C0, C2 = _metric_constants(g, m, region)
    c0, c0_exact = V.infimum(region.vertices)
    p = config.p
    out = {
        "s": s.value,
        "C0": C0.value,
        "intrinsic_bound": C2.value,
        "constants_exact": s.exact and C0.exact and C2.exact,
        "c0": c0,
        "c0_exact": c0_exact,
        "p": p,
        "metric": m.describe(),
        "alpha_star": (estimates.alpha_threshold(c0, p, s.value, C0.value)
                       if C0.value > 0 else math.inf),
        "beta_star": None,
        "uniqueness_certified": False,
        "supersolution_certified": True,
        "refusals": [],
    }
    status = EXIT_OK
    if p >= 2:
        out["beta_star"] = estimates.beta_threshold(c0, p, s.value)
        if C2.value > 1 + 1e-12:
            out["refusals"].append(
                "metric is not intrinsic: 2-intrinsic bound {} > 1".format(C2.value))
            status = EXIT_FAILED
        else:
            out["uniqueness_certified"] = True
    if config.beta is not None and out["beta_star"] is not None:
        if not config.beta < out["beta_star"]:
            out["refusals"].append("beta^2 exp(2 s beta) < 2 c0 p fails: beta = {} >= {}".format(
                                   config.beta, out["beta_star"]))
            out["uniqueness_certified"] = False
            status = EXIT_FAILED
    if config.alpha is not None and p < 2:
        if not config.alpha < out["alpha_star"]:
            out["refusals"].append("C0 alpha exp(s alpha) < c0 p fails: alpha = {} >= {}".format(
                                   config.alpha, out["alpha_star"]))
            out["supersolution_certified"] = False
            status = EXIT_FAILED
    out_dir = _out_dir(args, config)
    _write_json(os.path.join(out_dir, "certify.json"), out)
    print(json.dumps(report._jsonable(out), indent=2, sort_keys=True))
    return status


def _test_params(config, c0, s, C0, x0, R):
    if config.alpha is not None or config.delta is not None:
        if config.alpha is None or config.delta is None:
            raise estimates.ParameterError(
                "alpha and delta", "alpha and delta must be given together.")
        tp = estimates.TestFunctionParams(
                x0, config.alpha, R, config.delta, s, p=config.p, c0=c0, C0=C0,
                beta=config.beta if config.p >= 2 else None)
        if config.p >= 2 and tp.beta is not None:
            tp.validate_uniqueness()
        tp.validate_cutoff()
        return [tp]
    if config.beta is not None and config.p >= 2:
        return [estimates.select_parameters(c0, config.p, s, x0, R=R, beta=config.beta, C0=C0)]
    grid = estimates.parameter_grid(c0, config.p, s, x0, R, C0=C0)
    if len(grid) == 0:
        raise estimates.ParameterError(
                "R > max(2s/(1 - 2 delta), 1)",
                "No admissible parameters with cutoff radius {}.".format(R))
    return grid


class _Suite(object):
    '''
    The objects shared by the checks of a verification run.
    '''

    def __init__(self, config):
        self.config = config
        self.g = config.make_graph()
        self.m = config.make_metric(self.g)
        self.x0 = config.base_point(self.g)
        self.region = graph.materialize(
                self.g, metric.ball(self.g, self.m, self.x0, config.radius), seed=self.x0)
        self.potential_error = None
        try:
            self.V = config.make_potential(self.g)
        except ValueError as e:
            self.V = None
            self.potential_error = str(e)
        self._grid = None
        self._solution = None

    def rng(self):
        return np.random.default_rng(self.config.seed)

    def potential(self):
        if self.V is None:
            raise ValueError("No valid potential: {}".format(self.potential_error))
        return self.V

    def grid(self):
        if self._grid is None:
            V = self.potential()
            s, C0, _ = _metric_constants(self.g, self.m, self.region)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                c0, _ = V.infimum(self.region.vertices)
            R = self.config.cutoff_radius
            if R is None:
                R = self.config.radius - 2 * s.value
            self._grid = _test_params(self.config, c0, s.value, C0.value, self.x0, R)
        return self._grid

    def solution(self):
        if self._solution is None:
            problem = schrodinger.DirichletProblem(
                    self.region, self.config.make_boundary(self.g), self.potential())
            self._solution = schrodinger.dirichlet_solve(problem)
        return self._solution

    def over_grid(self, name, func):
        return report.merge_reports(name, [func(tp) for tp in self.grid()])

    def run(self, name):
        g, m, region, x0 = self.g, self.m, self.region, self.x0
        tol = self.config.tol
        if name == "region":
            return graph.validate_region(region)
        if name == "triangle":
            return metric.check_triangle_inequality(m, region, self.config.samples, self.rng())
        if name == "potential":
            if self.V is None:
                return report.failed_report("potential", self.potential_error)
            return schrodinger.check_potential(self.V, region.vertices)
        if name == "distance_laplacian":
            return metric.check_distance_laplacian(g, m, x0, region)
        if name == "identities":
            return calculus.check_operator_identities(
                    g, region, self.config.samples, self.rng(), tol=tol.identity)
        if name == "convexity":
            p = self.config.p
            maps = [calculus.phi_alpha(p, a) for a in (1e-3, 1.0)]
            if p >= 2:
                maps += [calculus.pi_alpha(p, a) for a in (1e-3, 1.0)]
            rng = self.rng()
            return report.merge_reports("convexity", [
                    calculus.check_convexity(g, psi, region, rng=rng, tol=tol.convexity)
                    for psi in maps])
        V = self.potential() if name != "cutoff_gradient" else None
        if name == "exponent_bound":
            return self.over_grid(name, lambda tp: estimates.check_exponent_bound(
                                  g, m, V, tp, region))
        if name == "cutoff_gradient":
            return self.over_grid(name, lambda tp: estimates.check_cutoff_gradient(
                                  g, m, tp, region))
        if name == "supersolution":
            return self.over_grid(name, lambda tp: estimates.check_supersolution(
                                  g, m, V, tp, region))
        if name == "compatibility":
            return self.over_grid(name, lambda tp: estimates.check_compatibility(
                                  estimates.cutoff_eta(tp, m), estimates.exponent_xi(tp, m),
                                  region))
        u = self.solution()
        if name == "energy_estimate":
            return self.over_grid(name, lambda tp: estimates.check_energy_estimate(
                                  g, u, V, estimates.cutoff_eta(tp, m),
                                  estimates.exponent_xi(tp, m), tp.p, region))
        if name == "adjoint_estimate":
            return self.over_grid(name, lambda tp: estimates.check_adjoint_estimate(
                                  g, u, V, estimates.cutoff_eta(tp, m)
                                  * estimates.supersolution_zeta(tp, m), tp.p, region))
        if name == "ball_decay":
            return self.over_grid(name, lambda tp: estimates.check_ball_decay(
                                  g, m, u, tp, region))
        raise ValueError("Unknown check '{}'.".format(name))


def _apply_inequality_tolerance(r, tol):
    # Inequality slacks are built from the default tolerance; rescale them.
    if tol != report.INEQUALITY_ABS_TOL and r.check_name not in (
            "identities", "convexity", "region", "triangle", "potential"):
        r.slack = r.slack * (tol / report.INEQUALITY_ABS_TOL)
    return r


def cmd_verify(config, args):
    '''
    Runs the selected checks and writes a JSON report and a CSV margin table
    for each. A check whose preconditions fail is reported as failed, and
    the remaining checks still run.
    '''
    suite = _Suite(config)
    out_dir = _out_dir(args, config)
    fmt = report.location_formatter(suite.g)
    summary = {}
    status = EXIT_OK
    for name in config.selected_checks():
        _echo(args, "running check {}".format(name))
        try:
            r = suite.run(name)
        except (ValueError, schrodinger.SolverError) as e:
            r = report.failed_report(name, str(e))
        r = _apply_inequality_tolerance(r, config.tol.inequality)
        r.write_json(os.path.join(out_dir, "{}.json".format(name)), fmt)
        r.write_csv(os.path.join(out_dir, "{}.csv".format(name)), fmt)
        summary[name] = {"verdict": r.verdict, "min_margin": r.min_margin,
                         "n_vertices": r.n_vertices, "failures": r.failures}
        if not r.passed:
            status = EXIT_FAILED
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    print(json.dumps(report._jsonable(summary), indent=2, sort_keys=True))
    return status


def cmd_sharpness(config, args):
    '''
    Compares the growth rate of the explicit growing solution on the
    one-dimensional lattice with the threshold of the uniqueness class
    (``beta*`` for p >= 2, ``alpha*`` otherwise). The result is consistent
    if the growth rate exceeds the threshold. Also checks that the zero
    function belongs to the weighted space for a rate below the threshold.
    '''
    g = config.make_graph()
    _require_line(g, "sharpness")
    m = config.make_metric(g)
    x0 = g.origin
    c0 = _constant_c0(config)
    region = _region_around(g, x0, 2)
    s, C0, _ = _metric_constants(g, m, region)
    p = config.p
    if p >= 2:
        threshold = estimates.beta_threshold(c0, p, s.value)
        threshold_name = "beta_star"
    else:
        threshold = estimates.alpha_threshold(c0, p, s.value, C0.value)
        threshold_name = "alpha_star"
    radii = DEFAULT_SHARPNESS_RADII if config.radii is None else config.radii
    u = schrodinger.make_symmetric_growing_solution(c0)
    growth = weighted_spaces.growth_estimate(u, p, x0, m, radii)
    rate = config.beta if config.beta is not None and config.beta < threshold else threshold / 2
    zero = calculus.GraphFunction.constant(0.0)
    membership = weighted_spaces.membership_estimate(
            zero, p, weighted_spaces.WeightFamily(m, x0, rate), radii)
    lam_plus, _ = schrodinger.lattice_characteristic_roots(c0)
    consistent = bool(growth.beta_hat > threshold)
    out = {
        "beta_hat": growth.beta_hat,
        "residual": growth.residual,
        "growth_verdict": growth.verdict,
        threshold_name: threshold,
        "lambda_plus": lam_plus,
        "s": s.value,
        "C0": C0.value,
        "c0": c0,
        "p": p,
        "consistent": consistent,
        "zero_membership_rate": rate,
        "zero_membership_verdict": membership.verdict,
    }
    out_dir = _out_dir(args, config)
    growth.write_csv(os.path.join(out_dir, "growth.csv"))
    growth.write_json(os.path.join(out_dir, "growth.json"))
    _write_json(os.path.join(out_dir, "sharpness.json"), out)
    print(json.dumps(report._jsonable(out), indent=2, sort_keys=True))
    ok = consistent and membership.verdict == "bounded"
    return EXIT_OK if ok else EXIT_FAILED


def cmd_decay(config, args):
    '''
    For each radius R (in steps), solves the Dirichlet problem on
    ``{-R, ..., R}`` with boundary values 1 and records ``u(0)`` and the
    normalized value ``u(0) (lam^R + lam^-R) / 2``, which is 1 exactly.
    '''
    g = config.make_graph()
    _require_line(g, "decay")
    c0 = _constant_c0(config)
    V = schrodinger.Potential.constant(c0)
    lam_plus, _ = schrodinger.lattice_characteristic_roots(c0)
    radii = DEFAULT_DECAY_RADII if config.radii is None else [int(r) for r in config.radii]
    one = calculus.GraphFunction.constant(1.0)
    rows = []
    for R in radii:
        if R < 1:
            raise ValueError("Decay radii must be at least 1, got {}.".format(R))
        region = graph.materialize(g, [(n,) for n in range(-R, R + 1)], seed=(0,))
        u = schrodinger.dirichlet_solve(schrodinger.DirichletProblem(region, one, V))
        u0 = u((0,))
        rows.append((R, u0, u0 * (lam_plus ** R + lam_plus ** -R) / 2))
    out_dir = _out_dir(args, config)
    with open(os.path.join(out_dir, "decay.csv"), "w", encoding="utf-8") as f:
        f.write("R,u0,normalized\n")
        for R, u0, norm in rows:
            f.write("{},{},{}\n".format(R, format_float(u0),
                                        format_float(norm)))
    out = [{"R": R, "u0": u0, "normalized": norm} for R, u0, norm in rows]
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_solve(config, args):
    '''
    Solves the Dirichlet problem on the configured ball and writes the
    solution in the vertex function file format.
    '''
    g = config.make_graph()
    m = config.make_metric(g)
    x0 = config.base_point(g)
    V = config.make_potential(g)
    region = graph.materialize(g, metric.ball(g, m, x0, config.radius), seed=x0)
    problem = schrodinger.DirichletProblem(region, config.make_boundary(g), V)
    u = schrodinger.dirichlet_solve(problem)
    out_dir = _out_dir(args, config)
    output = args.output if args.output is not None else os.path.join(out_dir, "solution.txt")
    calculus.save_function(u, region.vertices, output, g)
    r = schrodinger.residual_report(g, V, u, problem.interior, relative=True)
    fmt = report.location_formatter(g)
    r.write_json(os.path.join(out_dir, "residual.json"), fmt)
    out = {"output": output, "n_vertices": len(region), "n_interior": len(problem.interior),
           "max_residual": r.details["max_residual"], "verdict": r.verdict}
    print(json.dumps(report._jsonable(out), indent=2, sort_keys=True))
    return EXIT_OK if r.passed else EXIT_FAILED


COMMANDS = {
    "certify": cmd_certify,
    "verify": cmd_verify,
    "sharpness": cmd_sharpness,
    "decay": cmd_decay,
    "solve": cmd_solve,
}


def get_parser():
    parser = argparse.ArgumentParser(
            prog="pyliouville",
            description="Schrodinger equations and uniqueness classes on weighted graphs.")
    parser.add_argument("-V", "--version", action="version",
                        version="%(prog)s {}".format(_version.pyliouville_version))
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True
    helps = {
        "certify": "Compute metric constants and uniqueness thresholds.",
        "verify": "Run verification checks and write reports.",
        "sharpness": "Compare an explicit growing solution with the threshold.",
        "decay": "Tabulate Dirichlet solutions on growing intervals.",
        "solve": "Solve a Dirichlet problem on a ball and write the solution.",
    }
    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=helps[name])
        sub.add_argument("-c", "--config", default=None,
                         help="Experiment configuration (JSON).")
        sub.add_argument("-o", "--out-dir", default=None,
                         help="Output directory (overrides the configuration).")
        sub.add_argument("-v", "--verbose", action="store_true")
        sub.add_argument("-q", "--quiet", action="store_true",
                         help="Do not show warnings.")
        if name == "solve":
            sub.add_argument("--output", default=None,
                             help="Where to write the solution.")
    return parser


def main(argv=None):
    parser = get_parser()
    args = parser.parse_args(argv)
    command_line = ["pyliouville"] + list(sys.argv[1:] if argv is None else argv)
    with warnings.catch_warnings():
        if args.quiet:
            warnings.simplefilter("ignore")
        try:
            if args.config is None:
                config = config_.ExperimentConfig()
            else:
                config = config_.load_config(args.config)
        except (OSError, ValueError, TypeError) as e:
            print("pyliouville: error: {}".format(e), file=sys.stderr)
            return EXIT_USAGE
        try:
            status = COMMANDS[args.command](config, args)
        except estimates.ParameterError as e:
            print("pyliouville: error: {}".format(e), file=sys.stderr)
            return EXIT_FAILED
        except (ValueError, schrodinger.SolverError) as e:
            print("pyliouville: error: {}".format(e), file=sys.stderr)
            return EXIT_FAILED
        provenance.write_provenance(
                os.path.join(_out_dir(args, config), "provenance.json"),
                command=command_line, config=config.to_dict())
    return status
