import csv
import json
import math

import attr
import numpy as np

from .util import format_float

# Default tolerances. Identities are compared relative to their size, and
# inequalities get an absolute plus a relative allowance against the larger
# side.
IDENTITY_TOL = 1e-12
INEQUALITY_ABS_TOL = 1e-9
INEQUALITY_REL_TOL = 1e-9
CONVEXITY_TOL = 1e-10

GLOBAL = "global"


def inequality_slack(lhs, rhs, abs_tol=INEQUALITY_ABS_TOL, rel_tol=INEQUALITY_REL_TOL):
    '''
    The allowance granted to a numerically evaluated inequality ``lhs <= rhs``:
    ``abs_tol + rel_tol * max(|lhs|, |rhs|)``, elementwise.
    '''
    lhs = np.abs(np.asarray(lhs, dtype="float64"))
    rhs = np.abs(np.asarray(rhs, dtype="float64"))
    return abs_tol + rel_tol * np.maximum(lhs, rhs)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    if obj is None or isinstance(obj, str):
        return obj
    if attr.has(type(obj)):
        return _jsonable(attr.asdict(obj, recurse=False))
    return str(obj)


@attr.s(eq=False)
class VerificationReport(object):
    '''
    The outcome of checking an inequality (or an invariant) at a collection of
    locations, usually vertices.

    Each location carries a *margin*, the right-hand side minus the left-hand
    side of the inequality being checked, and a *slack*, the numerical
    allowance for that location. A location fails if its margin is below
    minus its slack, and the report passes if no location fails and there are
    no other recorded ``failures`` (e.g., structural violations or rejected
    preconditions).

    Inequalities that are only meaningful as a whole (sums over the graph) are
    reported at the single location ``"global"``.

    :ivar str check_name: The name of the check.
    :ivar list locations: The locations, in canonical order.
    :ivar numpy.ndarray margins: The margin at each location.
    :ivar numpy.ndarray slack: The allowance at each location.
    :ivar dict params: The parameters the check ran with.
    :ivar list failures: Messages describing failures not captured by margins.
    :ivar dict details: Any further numbers worth recording.
    '''
    check_name = attr.ib()
    locations = attr.ib(factory=list, converter=list)
    margins = attr.ib(factory=lambda: np.zeros(0),
                      converter=lambda x: np.asarray(x, dtype="float64").reshape(-1))
    slack = attr.ib(default=0.0)
    params = attr.ib(factory=dict)
    failures = attr.ib(factory=list, converter=list)
    details = attr.ib(factory=dict)

    def __attrs_post_init__(self):
        self.slack = np.broadcast_to(
                np.asarray(self.slack, dtype="float64"), self.margins.shape).copy()
        if len(self.locations) != len(self.margins):
            raise ValueError("Need exactly one margin per location.")

    @property
    def n_vertices(self):
        return len(self.locations)

    @property
    def min_margin(self):
        '''
        The smallest margin, or None if there are no locations.
        '''
        if len(self.margins) == 0:
            return None
        return float(np.min(self.margins))

    @property
    def tolerance(self):
        '''
        The largest allowance used at any location.
        '''
        if len(self.slack) == 0:
            return 0.0
        return float(np.max(self.slack))

    @property
    def failing_locations(self):
        bad = self.margins < -self.slack
        return [x for x, b in zip(self.locations, bad) if b]

    @property
    def passed(self):
        return len(self.failures) == 0 and not np.any(self.margins < -self.slack)

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"

    def margin_at(self, location):
        return float(self.margins[self.locations.index(location)])

    def add_failure(self, message):
        self.failures.append(message)

    def to_dict(self, format_vertex=str):
        '''
        Returns a dictionary suitable for writing out as JSON.

        :param callable format_vertex: Converts locations to strings.
        '''
        fmt = lambda x: x if x == GLOBAL else format_vertex(x)
        return {
            "check_name": self.check_name,
            "params": _jsonable(self.params),
            "min_margin": _jsonable(self.min_margin),
            "n_vertices": self.n_vertices,
            "failing_vertices": [fmt(x) for x in self.failing_locations],
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "failures": list(self.failures),
            "details": _jsonable(self.details),
        }

    def write_json(self, path, format_vertex=str):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(format_vertex), f, indent=2, sort_keys=True)
            f.write("\n")

    def write_csv(self, path, format_vertex=str):
        '''
        Writes the per-location margin table, with header ``vertex,margin``.
        '''
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["vertex", "margin"])
            for x, m in zip(self.locations, self.margins):
                writer.writerow([x if x == GLOBAL else format_vertex(x),
                                 format_float(m)])


def failed_report(check_name, message, params=None):
    '''
    Returns a report with no locations that fails with the given message;
    used when a check's preconditions reject its input.
    '''
    return VerificationReport(check_name, params=params or {}, failures=[message])


def location_formatter(graph):
    '''
    Returns a function converting report locations to strings: vertices of
    ``graph`` use its vertex tokens, tuples of vertices (edges, triples) are
    joined by spaces, and labels are passed through.
    '''
    def fmt(loc):
        if graph.is_vertex(loc):
            return graph.format_vertex(loc)
        if isinstance(loc, tuple):
            return " ".join(fmt(a) for a in loc)
        return str(loc)

    return fmt


def merge_reports(check_name, reports):
    '''
    Combines reports of the same check run with different parameters into
    one; its parameters are the list of the individual parameters.
    '''
    locations, margins, slack, failures, params = [], [], [], [], []
    for r in reports:
        locations.extend(r.locations)
        margins.extend(r.margins)
        slack.extend(r.slack)
        failures.extend(r.failures)
        params.append(r.params)
    return VerificationReport(check_name, locations, margins, slack=slack,
                              params={"runs": params}, failures=failures,
                              details={"num_runs": len(reports)})
