import json

import attr

from .calculus import GraphFunction, load_function
from .graph import FamilyDescriptor, make_family
from .metric import METRIC_KINDS, make_metric
from .report import IDENTITY_TOL, INEQUALITY_ABS_TOL, CONVEXITY_TOL
from .schrodinger import Potential

POTENTIAL_KINDS = ("constant", "perturbed", "file")
BOUNDARY_KINDS = ("constant", "file")

CHECK_NAMES = (
    "region", "triangle", "potential", "distance_laplacian", "identities",
    "convexity", "exponent_bound", "cutoff_gradient", "supersolution",
    "compatibility", "energy_estimate", "adjoint_estimate", "ball_decay",
)

# Checks that belong to the p >= 2 argument only.
P2_CHECKS = ("energy_estimate", "ball_decay")


def _from_dict(cls, d, name):
    if isinstance(d, cls):
        return d
    if not isinstance(d, dict):
        raise ValueError("'{}' must be an object, got {!r}.".format(name, d))
    known = [a.name for a in attr.fields(cls) if a.init]
    for k in d:
        if k not in known:
            raise ValueError("Unknown key '{}.{}'; expected one of {}.".format(name, k, known))
    return cls(**d)


def _in(options, name):
    def check(instance, attribute, value):
        if value not in options:
            raise ValueError("{} must be one of {}, got {!r}.".format(name, options, value))
    return check


def _optional_number(x):
    return None if x is None else float(x)


@attr.s(frozen=True)
class MetricDescriptor(object):
    kind = attr.ib(default="default", validator=_in(METRIC_KINDS, "metric.kind"))
    scale = attr.ib(default=None, converter=_optional_number)

    @classmethod
    def from_dict(cls, d):
        return _from_dict(cls, d, "metric")


@attr.s(frozen=True)
class PotentialDescriptor(object):
    kind = attr.ib(default="constant", validator=_in(POTENTIAL_KINDS, "potential.kind"))
    c0 = attr.ib(default=1.0, converter=_optional_number)
    amplitude = attr.ib(default=0.0, converter=float)
    file = attr.ib(default=None)
    default = attr.ib(default=None, converter=_optional_number)

    @classmethod
    def from_dict(cls, d):
        return _from_dict(cls, d, "potential")


@attr.s(frozen=True)
class BoundaryDescriptor(object):
    kind = attr.ib(default="constant", validator=_in(BOUNDARY_KINDS, "boundary.kind"))
    value = attr.ib(default=1.0, converter=float)
    file = attr.ib(default=None)

    @classmethod
    def from_dict(cls, d):
        return _from_dict(cls, d, "boundary")


@attr.s(frozen=True)
class Tolerances(object):
    identity = attr.ib(default=IDENTITY_TOL, converter=float)
    inequality = attr.ib(default=INEQUALITY_ABS_TOL, converter=float)
    convexity = attr.ib(default=CONVEXITY_TOL, converter=float)

    @classmethod
    def from_dict(cls, d):
        out = _from_dict(cls, d, "tol")
        for a in attr.fields(cls):
            if not getattr(out, a.name) > 0:
                raise ValueError("tol.{} must be positive.".format(a.name))
        return out


def _positive_or_none(instance, attribute, value):
    if value is not None and not value > 0:
        raise ValueError("{} must be positive, got {}.".format(attribute.name, value))


def _check_checks(instance, attribute, value):
    if value is None:
        return
    for name in value:
        if name not in CHECK_NAMES:
            raise ValueError("Unknown check '{}'; expected one of {}.".format(
                             name, list(CHECK_NAMES)))


@attr.s(frozen=True)
class ExperimentConfig(object):
    '''
    The description of an experiment, usually read from a JSON file by
    :func:`load_config`. Every key is optional; unknown keys are rejected.

    :ivar FamilyDescriptor family: The graph.
    :ivar MetricDescriptor metric: The metric ("default" is the intrinsic
        metric of the family).
    :ivar PotentialDescriptor potential: The potential.
    :ivar float p: The exponent.
    :ivar float beta: The weight rate (p >= 2), or None for the default.
    :ivar float alpha: The test function rate, or None for the default.
    :ivar float delta: The cutoff shape parameter, or None for the default.
    :ivar float cutoff_radius: The cutoff radius R, or None for the default
        (the region radius minus twice the jump size).
    :ivar float radius: The radius of the ball the checks run on.
    :ivar list radii: The radii for growth and decay experiments.
    :ivar list checks: The checks to run, or None for all that apply.
    :ivar Tolerances tol: Tolerances.
    :ivar str out_dir: Where output files go.
    :ivar int seed: The random seed.
    :ivar int samples: The number of random samples for sampled checks.
    :ivar BoundaryDescriptor boundary: Boundary data for Dirichlet problems.
    :ivar str x0: The base point, as a vertex token (default: the origin).
    '''
    family = attr.ib(factory=lambda: FamilyDescriptor.lattice(1),
                     converter=FamilyDescriptor.from_dict)
    metric = attr.ib(factory=MetricDescriptor, converter=MetricDescriptor.from_dict)
    potential = attr.ib(factory=PotentialDescriptor, converter=PotentialDescriptor.from_dict)
    p = attr.ib(default=2.0, converter=float)
    beta = attr.ib(default=None, converter=_optional_number, validator=_positive_or_none)
    alpha = attr.ib(default=None, converter=_optional_number, validator=_positive_or_none)
    delta = attr.ib(default=None, converter=_optional_number)
    cutoff_radius = attr.ib(default=None, converter=_optional_number,
                            validator=_positive_or_none)
    radius = attr.ib(default=20.0, converter=float, validator=_positive_or_none)
    radii = attr.ib(default=None, converter=attr.converters.optional(
                    lambda x: [float(r) for r in x]))
    checks = attr.ib(default=None, converter=attr.converters.optional(list),
                     validator=_check_checks)
    tol = attr.ib(factory=Tolerances, converter=Tolerances.from_dict)
    out_dir = attr.ib(default="pyliouville_out")
    seed = attr.ib(default=1, converter=int)
    samples = attr.ib(default=100, converter=int, validator=_positive_or_none)
    boundary = attr.ib(factory=BoundaryDescriptor, converter=BoundaryDescriptor.from_dict)
    x0 = attr.ib(default=None)

    @p.validator
    def _check_p(self, attribute, value):
        if not value >= 1:
            raise ValueError("p must be at least 1, got {}.".format(value))

    @delta.validator
    def _check_delta(self, attribute, value):
        if value is not None and not 0 < value < 1:
            raise ValueError("delta must be in (0, 1), got {}.".format(value))

    @classmethod
    def from_dict(cls, d):
        return _from_dict(cls, d, "config")

    def to_dict(self):
        out = attr.asdict(self, recurse=False)
        for k in ("family", "metric", "potential", "tol", "boundary"):
            out[k] = {a: v for a, v in attr.asdict(out[k]).items()}
        return out

    def selected_checks(self):
        if self.checks is not None:
            return list(self.checks)
        if self.p >= 2:
            return list(CHECK_NAMES)
        return [c for c in CHECK_NAMES if c not in P2_CHECKS]

    def make_graph(self):
        return make_family(self.family)

    def make_metric(self, g):
        return make_metric(g, self.metric.kind, self.metric.scale)

    def make_potential(self, g):
        d = self.potential
        if d.kind == "constant":
            return Potential.constant(d.c0)
        if d.kind == "perturbed":
            return Potential.perturbed(d.c0, d.amplitude, seed=self.seed)
        if d.file is None:
            raise ValueError("potential.file is needed for a potential of kind 'file'.")
        f = load_function(d.file, g)
        return Potential.from_values({x: f(x) for x in f.support}, default=d.default)

    def make_boundary(self, g):
        d = self.boundary
        if d.kind == "constant":
            return GraphFunction.constant(d.value)
        if d.file is None:
            raise ValueError("boundary.file is needed for boundary data of kind 'file'.")
        return load_function(d.file, g)

    def base_point(self, g):
        if self.x0 is None:
            return g.origin
        return g.parse_vertex(str(self.x0))


def load_config(path):
    '''
    Reads an :class:`ExperimentConfig` from a JSON file.

    :rtype ExperimentConfig:
    '''
    with open(path, "r", encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError("{}: not valid JSON: {}".format(path, e))
    return ExperimentConfig.from_dict(d)
