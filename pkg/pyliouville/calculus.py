import math
import warnings

import attr
import numpy as np

from .graph import closed_neighborhood
from .report import VerificationReport, IDENTITY_TOL, CONVEXITY_TOL
from .util import canonical_order, format_float, pairwise_sum

PROVENANCES = ("closed-form", "solver", "file", "random", "derived")


@attr.s(frozen=True, eq=False)
class GraphFunction(object):
    '''
    A real-valued function on the vertices of a graph.

    The values come from ``oracle``. If ``support`` is given, the function is
    zero outside it (and the oracle is not consulted there); if ``domain`` is
    given, the function may only be evaluated on it, and evaluating elsewhere
    raises a :class:`ValueError`.

    :ivar callable oracle: Maps a vertex to a number.
    :ivar frozenset support: A finite set outside which the function is zero,
        or None.
    :ivar frozenset domain: The set on which the function is defined, or None
        if it is defined everywhere.
    :ivar str provenance: Where the values came from ("closed-form",
        "solver", "file", "random", or "derived").
    '''
    oracle = attr.ib()
    support = attr.ib(default=None,
                      converter=attr.converters.optional(frozenset))
    domain = attr.ib(default=None,
                     converter=attr.converters.optional(frozenset))
    provenance = attr.ib(default="closed-form",
                         validator=attr.validators.in_(PROVENANCES))

    def __call__(self, x):
        if self.domain is not None and x not in self.domain:
            raise ValueError("{} is outside the domain of this {} function.".format(
                             x, self.provenance))
        if self.support is not None and x not in self.support:
            return 0.0
        return float(self.oracle(x))

    @classmethod
    def from_callable(cls, f, support=None, provenance="closed-form"):
        return cls(f, support=support, provenance=provenance)

    @classmethod
    def from_dict(cls, values, provenance="file"):
        '''
        The function with the given values, and zero at every vertex not
        listed (so it has finite support).
        '''
        values = {x: float(v) for x, v in values.items()}
        return cls(values.__getitem__, support=frozenset(values), provenance=provenance)

    @classmethod
    def on_domain(cls, values, provenance="solver"):
        '''
        The function with the given values, defined only on the listed
        vertices.
        '''
        values = {x: float(v) for x, v in values.items()}
        return cls(values.__getitem__, domain=frozenset(values), provenance=provenance)

    @classmethod
    def constant(cls, c):
        c = float(c)
        return cls(lambda x: c)

    @classmethod
    def indicator(cls, vertices):
        vertices = frozenset(vertices)
        return cls(lambda x: 1.0, support=vertices)

    @property
    def has_finite_support(self):
        return self.support is not None

    def is_evaluable(self, x):
        return self.domain is None or x in self.domain

    def values(self, vertices):
        return np.array([self(x) for x in vertices], dtype="float64")

    def _combined(self, other, op):
        if self.support is not None and other.support is not None:
            support = self.support & other.support
        else:
            support = self.support if self.support is not None else other.support
        if self.domain is not None and other.domain is not None:
            domain = self.domain & other.domain
        else:
            domain = self.domain if self.domain is not None else other.domain
        return GraphFunction(lambda x: op(self(x), other(x)), support=support,
                             domain=domain, provenance="derived")

    def __mul__(self, other):
        if isinstance(other, GraphFunction):
            return self._combined(other, lambda a, b: a * b)
        c = float(other)
        return GraphFunction(lambda x: c * self(x), support=self.support,
                             domain=self.domain, provenance="derived")

    __rmul__ = __mul__

    def compose(self, func):
        '''
        Returns ``func(self(x))``. The result keeps the domain, and keeps
        finite support only if ``func(0) == 0``.
        '''
        support = self.support if (self.support is not None and func(0.0) == 0) else None
        if self.support is not None and support is None:
            f = self
            return GraphFunction(lambda x: func(f(x)), domain=self.domain,
                                 provenance="derived")
        return GraphFunction(lambda x: func(self.oracle(x)), support=support,
                             domain=self.domain, provenance="derived")


def load_function(path, graph):
    '''
    Reads a function from a file with lines ``X value``, where ``X`` is a
    vertex token of ``graph``. Unlisted vertices are zero.

    :rtype GraphFunction:
    '''
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            stripped = line.strip()
            if len(stripped) == 0 or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) != 2:
                raise ValueError("{}, line {}: '{}': expected 2 fields.".format(
                                 path, n, stripped))
            try:
                x = graph.parse_vertex(tokens[0])
                v = float(tokens[1])
            except ValueError as e:
                raise ValueError("{}, line {}: '{}': {}".format(path, n, stripped, e))
            if x in values:
                raise ValueError("{}, line {}: '{}': vertex listed twice.".format(
                                 path, n, stripped))
            values[x] = v
    return GraphFunction.from_dict(values, provenance="file")


def save_function(f, vertices, path, graph):
    '''
    Writes the values of ``f`` on ``vertices`` (in canonical order) to a file
    readable by :func:`load_function`.
    '''
    with open(path, "w", encoding="utf-8") as out:
        for x in canonical_order(vertices):
            out.write("{} {}\n".format(graph.format_vertex(x), format_float(f(x))))


def difference(f, x, y):
    '''
    The difference operator: ``f(y) - f(x)``.
    '''
    return f(y) - f(x)


def product_rule(f, h, x, y):
    '''
    Returns both sides of the product rule for the difference operator,
    ``(difference(fh, x, y), f(x) difference(h, x, y) + difference(f, x, y) h(y))``.
    '''
    lhs = f(y) * h(y) - f(x) * h(x)
    rhs = f(x) * difference(h, x, y) + difference(f, x, y) * h(y)
    return lhs, rhs


def gradient_squared(g, f, x):
    '''
    Returns ``(1/mu(x)) sum_y omega(x, y) (f(y) - f(x))^2``.
    '''
    fx = f(x)
    terms = [w * (f(y) - fx) ** 2 for y, w in g.neighbors(x)]
    return pairwise_sum(terms) / g.measure(x)


def laplacian(g, f, x):
    '''
    Returns the weighted Laplacian ``(1/mu(x)) sum_y (f(y) - f(x)) omega(x, y)``.
    '''
    fx = f(x)
    terms = [(f(y) - fx) * w for y, w in g.neighbors(x)]
    return pairwise_sum(terms) / g.measure(x)


def laplacian_of_product(g, f, h, x):
    '''
    Returns the two sides of the formula for the Laplacian of a product at ``x``:
    ``lhs = Laplacian(fh)(x)`` and
    ``rhs = f(x) Laplacian(h)(x) + h(x) Laplacian(f)(x)
    + (1/mu(x)) sum_y (f(y) - f(x)) (h(y) - h(x)) omega(x, y)``.
    '''
    lhs = laplacian(g, f * h, x)
    fx, hx = f(x), h(x)
    cross = [(f(y) - fx) * (h(y) - hx) * w for y, w in g.neighbors(x)]
    rhs = (fx * laplacian(g, h, x) + hx * laplacian(g, f, x)
           + pairwise_sum(cross) / g.measure(x))
    return lhs, rhs


def integration_by_parts(g, f, h, region):
    '''
    Returns the two sides of the integration by parts formula,
    ``lhs = sum_x Laplacian(f)(x) h(x) mu(x)`` and
    ``rhs = -(1/2) sum_{x, y} (f(y) - f(x)) (h(y) - h(x)) omega(x, y)``,
    the second sum over ordered pairs of neighbors with ``x`` in the region
    (including edges leaving it).

    At least one of ``f``, ``h`` must have finite support, and ``region`` must
    contain that support together with all its neighbors.

    :rtype tuple:
    '''
    test = None
    for t in (h, f):
        if t.has_finite_support:
            if all(y in region for y in closed_neighborhood(g, t.support)):
                test = t
                break
    if test is None:
        if not (f.has_finite_support or h.has_finite_support):
            raise ValueError("Integration by parts needs a function with finite support.")
        raise ValueError("The region does not contain the support and its neighbors.")
    lhs_terms, rhs_terms = [], []
    for x in region.vertices:
        hx = h(x)
        if test is h and hx == 0:
            continue
        lhs_terms.append(laplacian(g, f, x) * hx * g.measure(x))
    for x in region.vertices:
        tx = test(x)
        for y, w in g.neighbors(x):
            if tx == 0 and test(y) == 0:
                continue
            rhs_terms.append((f(y) - f(x)) * (h(y) - h(x)) * w)
    return pairwise_sum(lhs_terms), -0.5 * pairwise_sum(rhs_terms)


@attr.s(frozen=True, eq=False)
class ConvexMap(object):
    '''
    A convex, continuously differentiable map of the real line, with its
    derivative. Maps built by :func:`pi_alpha`, :func:`phi_alpha` and
    :func:`linear_map` are convex by construction (``certified``); others are
    checked numerically on the range where they are used.
    '''
    name = attr.ib()
    value = attr.ib()
    derivative = attr.ib()
    params = attr.ib(factory=dict)
    certified = attr.ib(default=False)

    def __call__(self, t):
        return self.value(t)


def pi_alpha(p, alpha):
    '''
    The map ``t -> (t^2 + alpha)^(p/4)``, convex for ``p >= 2``.
    '''
    if not p >= 2:
        raise ValueError("pi_alpha needs p >= 2, got {}.".format(p))
    if not alpha > 0:
        raise ValueError("alpha must be positive, got {}.".format(alpha))
    return ConvexMap(
            "pi_alpha",
            lambda t: (t * t + alpha) ** (p / 4),
            lambda t: (p / 2) * t * (t * t + alpha) ** (p / 4 - 1),
            params={"p": p, "alpha": alpha}, certified=True)


def phi_alpha(p, alpha):
    '''
    The map ``t -> (t^2 + alpha)^(p/2)``, convex for ``p >= 1``.
    '''
    if not p >= 1:
        raise ValueError("phi_alpha needs p >= 1, got {}.".format(p))
    if not alpha > 0:
        raise ValueError("alpha must be positive, got {}.".format(alpha))
    return ConvexMap(
            "phi_alpha",
            lambda t: (t * t + alpha) ** (p / 2),
            lambda t: p * t * (t * t + alpha) ** (p / 2 - 1),
            params={"p": p, "alpha": alpha}, certified=True)


def linear_map(a=1.0, b=0.0):
    return ConvexMap("linear", lambda t: a * t + b, lambda t: a,
                     params={"a": a, "b": b}, certified=True)


def certify_convexity(psi, lower, upper, num_points=1000):
    '''
    Checks that ``psi`` is convex on ``[lower, upper]`` by requiring the second
    differences on a grid of ``num_points`` points to be nonnegative (up to
    1e-12, relative to the size of ``psi``). Raises a :class:`ValueError`
    naming the first point where this fails.
    '''
    if upper - lower < 1e-6:
        mid = 0.5 * (lower + upper)
        lower, upper = mid - 0.5, mid + 0.5
    t = np.linspace(lower, upper, num_points)
    v = np.array([psi(a) for a in t], dtype="float64")
    second = v[:-2] - 2 * v[1:-1] + v[2:]
    allowed = -1e-12 * (1 + np.abs(v[1:-1]))
    bad = np.where(second < allowed)[0]
    if len(bad) > 0:
        raise ValueError("{} is not convex near t = {}.".format(psi.name, t[bad[0] + 1]))


def convexity_inequality(g, u, psi, x):
    '''
    Returns the two sides of the convexity inequality
    ``Laplacian(psi(u))(x) >= psi'(u(x)) Laplacian(u)(x)``, which holds for
    convex ``psi``. Maps that are not convex by construction are first
    checked on the range of ``u`` over ``x`` and its neighbors.

    :rtype tuple:
    '''
    if not psi.certified:
        vals = [u(x)] + [u(y) for y, _ in g.neighbors(x)]
        certify_convexity(psi, min(vals), max(vals))
    lhs = laplacian(g, u.compose(psi.value), x)
    rhs = psi.derivative(u(x)) * laplacian(g, u, x)
    if lhs < rhs - CONVEXITY_TOL * max(1.0, abs(lhs), abs(rhs)):
        warnings.warn("Convexity inequality fails at {}: {} < {}.".format(x, lhs, rhs))
    return lhs, rhs


def random_function(rng, vertices, low=-1.0, high=1.0):
    '''
    Returns a function with independent uniform values on ``vertices`` and
    zero elsewhere.
    '''
    vertices = canonical_order(vertices)
    vals = rng.uniform(low, high, size=len(vertices))
    return GraphFunction.from_dict(dict(zip(vertices, vals)), provenance="random")


def _interior(region):
    return [x for x in region.vertices if len(region.halo.get(x, ())) == 0]


def check_operator_identities(g, region, num_pairs=100, rng=None, tol=IDENTITY_TOL):
    '''
    Checks the integration by parts formula, the formula for the Laplacian of
    a product, and the product rule for differences, on ``num_pairs`` pairs
    of random finitely supported functions in ``region``. Supports are random
    subsets of the vertices all of whose neighbors lie in the region.

    Each identity gets margin ``-|lhs - rhs|`` and slack ``tol * (1 + |lhs|)``.

    :rtype VerificationReport:
    '''
    if rng is None:
        rng = np.random.default_rng(23)
    interior = _interior(region)
    if len(interior) == 0:
        raise ValueError("The region has no vertex with all its neighbors inside.")
    locations, margins, slack = [], [], []

    def record(label, lhs, rhs):
        locations.append(label)
        margins.append(-abs(lhs - rhs))
        slack.append(tol * (1 + abs(lhs)))

    for k in range(num_pairs):
        size = int(rng.integers(1, len(interior) + 1))
        pick = rng.choice(len(interior), size=size, replace=False)
        f = random_function(rng, [interior[j] for j in pick])
        h = random_function(rng, region.vertices)
        lhs, rhs = integration_by_parts(g, f, h, region)
        record("ibp:{}".format(k), lhs, rhs)
        x = interior[int(rng.integers(0, len(interior)))]
        lhs, rhs = laplacian_of_product(g, f, h, x)
        record("product:{}".format(k), lhs, rhs)
        y = g.neighbors(x)[int(rng.integers(0, len(g.neighbors(x))))][0]
        lhs, rhs = product_rule(f, h, x, y)
        record("product_rule:{}".format(k), lhs, rhs)
    return VerificationReport("identities", locations, margins, slack=slack,
                              params={"num_pairs": num_pairs, "tol": tol})


def check_convexity(g, psi, region, num_functions=10, rng=None, value_range=10.0,
                    tol=CONVEXITY_TOL):
    '''
    Checks the convexity inequality for ``psi`` at every vertex of ``region``
    that has all its neighbors inside, for ``num_functions`` random functions
    with values in ``[-value_range, value_range]``. The margin is
    ``lhs - rhs``, with slack ``tol * max(1, |lhs|, |rhs|)``.

    :rtype VerificationReport:
    '''
    if rng is None:
        rng = np.random.default_rng(17)
    interior = _interior(region)
    locations, margins, slack = [], [], []
    for k in range(num_functions):
        u = random_function(rng, region.vertices, -value_range, value_range)
        for x in interior:
            lhs, rhs = convexity_inequality(g, u, psi, x)
            locations.append(x)
            margins.append(lhs - rhs)
            slack.append(tol * max(1.0, abs(lhs), abs(rhs)))
    params = dict(psi.params)
    params["map"] = psi.name
    return VerificationReport("convexity", locations, margins, slack=slack, params=params)
