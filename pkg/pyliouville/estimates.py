import math
import warnings

import attr
import numpy as np

from .calculus import GraphFunction, laplacian
from .graph import closed_neighborhood
from .metric import ball, intrinsic_bound
from .report import (VerificationReport, GLOBAL, INEQUALITY_ABS_TOL,
                     INEQUALITY_REL_TOL, inequality_slack)
from .schrodinger import apply_operator
from .util import canonical_order, increasing_root, pairwise_sum

# Tolerance on the equation residual where the energy estimates use it,
# relative to the size of the terms of the equation.
EQUATION_TOL = 1e-10

COMPATIBILITY_TOL = 1e-12


class ParameterError(ValueError):
    '''
    Raised when parameters violate a constraint; ``inequality`` is the
    violated inequality, written out.
    '''
    def __init__(self, inequality, message=None):
        self.inequality = inequality
        if message is None:
            message = "Parameter constraint violated: {}".format(inequality)
        super(ParameterError, self).__init__(message)


class HypothesisError(ValueError):
    '''
    Raised when the data given to a check fail one of its hypotheses. The
    offending edge or vertex is in ``pair`` or ``vertex``.
    '''
    def __init__(self, message, pair=None, vertex=None):
        self.pair = pair
        self.vertex = vertex
        super(HypothesisError, self).__init__(message)


def _require(condition, inequality, values):
    if not condition:
        raise ParameterError(inequality, "Parameter constraint violated: {} ({})".format(
                             inequality, values))


def h_constant(alpha, s, c0, p):
    '''
    Returns ``alpha^2 / 2 exp(2 s alpha) - c0 p``, which is negative exactly
    when ``alpha^2 exp(2 s alpha) < 2 c0 p``.
    '''
    return alpha ** 2 / 2 * math.exp(2 * s * alpha) - c0 * p


def k_constant(alpha, s, C0, c0, p):
    '''
    Returns ``C0 alpha exp(s alpha) - p c0``, which is negative exactly when
    ``C0 alpha exp(s alpha) < c0 p``.
    '''
    return C0 * alpha * math.exp(alpha * s) - p * c0


def beta_threshold(c0, p, s):
    '''
    Returns the largest admissible weight rate: the unique ``beta > 0`` with
    ``beta^2 exp(2 s beta) = 2 c0 p``. Every smaller ``beta`` satisfies the
    strict inequality.
    '''
    if s == 0:
        return math.sqrt(2 * c0 * p)
    return increasing_root(lambda b: b * b * math.exp(2 * s * b), 2 * c0 * p)


def alpha_threshold(c0, p, s, C0):
    '''
    Returns the unique ``alpha > 0`` with ``C0 alpha exp(s alpha) = c0 p``.
    Every smaller ``alpha`` satisfies the strict inequality.
    '''
    if s == 0:
        return c0 * p / C0
    return increasing_root(lambda a: C0 * a * math.exp(s * a), c0 * p)


def _positive(instance, attribute, value):
    if not value > 0:
        raise ParameterError("{} > 0".format(attribute.name),
                             "{} must be positive, got {}.".format(attribute.name, value))


def _optional_positive(instance, attribute, value):
    if value is not None:
        _positive(instance, attribute, value)


@attr.s(frozen=True)
class TestFunctionParams(object):
    '''
    The parameters of the test functions used in the energy estimates.

    :ivar x0: The base point.
    :ivar float alpha: The rate of the exponential factors.
    :ivar float R: The cutoff radius.
    :ivar float delta: The shape parameter, in (0, 1).
    :ivar float s: The jump size of the metric.
    :ivar float p: The exponent.
    :ivar float c0: The lower bound of the potential.
    :ivar float C0: The 1-intrinsic bound of the metric, if needed.
    :ivar float beta: The weight rate of the uniqueness class, if any.
    '''
    # Not a pytest test class.
    __test__ = False

    x0 = attr.ib()
    alpha = attr.ib(converter=float, validator=_positive)
    R = attr.ib(converter=float, validator=_positive)
    delta = attr.ib(converter=float)
    s = attr.ib(converter=float)
    p = attr.ib(default=2.0, converter=float)
    c0 = attr.ib(default=1.0, converter=float, validator=_positive)
    C0 = attr.ib(default=None, converter=attr.converters.optional(float),
                 validator=_optional_positive)
    beta = attr.ib(default=None, converter=attr.converters.optional(float),
                   validator=_optional_positive)

    @delta.validator
    def _check_delta(self, attribute, value):
        _require(0 < value < 1, "0 < delta < 1", "delta = {}".format(value))

    @s.validator
    def _check_s(self, attribute, value):
        _require(value >= 0, "s >= 0", "s = {}".format(value))

    @p.validator
    def _check_p(self, attribute, value):
        _require(value >= 1, "p >= 1", "p = {}".format(value))

    def validate_cutoff(self):
        _require(self.R > self.s, "R > s", "R = {}, s = {}".format(self.R, self.s))

    def validate_exponent(self):
        '''
        Checks ``alpha^2 exp(2 s alpha) < 2 c0 p``.
        '''
        lhs = self.alpha ** 2 * math.exp(2 * self.s * self.alpha)
        _require(lhs < 2 * self.c0 * self.p, "alpha^2 exp(2 s alpha) < 2 c0 p",
                 "{} >= {}".format(lhs, 2 * self.c0 * self.p))

    def validate_uniqueness(self):
        '''
        Checks all the constraints of the weighted uniqueness argument for
        ``p >= 2``: the exponent constraint, ``beta^2 exp(2 s beta) < 2 c0 p``,
        ``alpha > beta``, ``delta < 1/2 - beta/(2 alpha)`` and
        ``R > max(2s/(1 - 2 delta), 1)``.
        '''
        _require(self.p >= 2, "p >= 2", "p = {}".format(self.p))
        if self.beta is None:
            raise ParameterError("beta > 0", "A weight rate beta is needed.")
        b = self.beta
        lhs = b * b * math.exp(2 * self.s * b)
        _require(lhs < 2 * self.c0 * self.p, "beta^2 exp(2 s beta) < 2 c0 p",
                 "{} >= {}".format(lhs, 2 * self.c0 * self.p))
        _require(self.alpha > b, "alpha > beta", "alpha = {}, beta = {}".format(self.alpha, b))
        bound = 0.5 - b / (2 * self.alpha)
        _require(self.delta < bound, "delta < 1/2 - beta/(2 alpha)",
                 "delta = {}, bound = {}".format(self.delta, bound))
        floor = self.radius_floor()
        _require(self.R > floor, "R > max(2s/(1 - 2 delta), 1)",
                 "R = {}, floor = {}".format(self.R, floor))
        self.validate_exponent()

    def validate_supersolution(self):
        '''
        Checks ``C0 alpha exp(s alpha) < c0 p``.
        '''
        if self.C0 is None:
            raise ParameterError("C0 > 0", "A 1-intrinsic bound C0 is needed.")
        lhs = self.C0 * self.alpha * math.exp(self.s * self.alpha)
        _require(lhs < self.c0 * self.p, "C0 alpha exp(s alpha) < c0 p",
                 "{} >= {}".format(lhs, self.c0 * self.p))

    def radius_floor(self):
        return max(2 * self.s / (1 - 2 * self.delta), 1.0)

    @property
    def H(self):
        return h_constant(self.alpha, self.s, self.c0, self.p)

    @property
    def K(self):
        if self.C0 is None:
            raise ParameterError("C0 > 0", "A 1-intrinsic bound C0 is needed.")
        return k_constant(self.alpha, self.s, self.C0, self.c0, self.p)

    def describe(self):
        return {k: v for k, v in attr.asdict(self).items() if v is not None}


def select_parameters(c0, p, s, x0, R=None, beta=None, C0=None):
    '''
    Picks admissible test function parameters deterministically.

    For ``p >= 2``: ``beta`` defaults to half the threshold ``beta*``, then
    ``alpha = (beta + beta*)/2``, ``delta = (1/2 - beta/(2 alpha))/2``, and
    ``R`` defaults to twice the smallest admissible radius. For ``p < 2``
    (which needs ``C0``): ``alpha = alpha*/2`` and ``delta = 1/4``, with
    ``R`` defaulting to ``max(4 s, 2)``.

    :rtype TestFunctionParams:
    '''
    if p >= 2:
        b_star = beta_threshold(c0, p, s)
        if beta is None:
            beta = b_star / 2
        if not beta < b_star:
            raise ParameterError("beta^2 exp(2 s beta) < 2 c0 p",
                                 "beta = {} is not below the threshold {}.".format(
                                 beta, b_star))
        alpha = (beta + b_star) / 2
        delta = 0.5 * (0.5 - beta / (2 * alpha))
        floor = max(2 * s / (1 - 2 * delta), 1.0)
        tp = TestFunctionParams(x0, alpha, 2 * floor if R is None else R, delta, s,
                                p=p, c0=c0, C0=C0, beta=beta)
        tp.validate_uniqueness()
    else:
        if C0 is None:
            raise ParameterError("C0 > 0", "p < 2 needs the 1-intrinsic bound C0.")
        alpha = alpha_threshold(c0, p, s, C0) / 2
        tp = TestFunctionParams(x0, alpha, max(4 * s, 2.0) if R is None else R, 0.25, s,
                                p=p, c0=c0, C0=C0)
        tp.validate_supersolution()
    tp.validate_cutoff()
    return tp


def parameter_grid(c0, p, s, x0, R, C0=None, fractions=(0.5, 0.9)):
    '''
    Returns a list of admissible parameter sets with cutoff radius ``R``:
    for ``p >= 2``, one per ``beta = f beta*`` with ``f`` in ``fractions``;
    for ``p < 2``, one per ``alpha = f alpha*``. Combinations for which ``R``
    is too small are skipped.
    '''
    out = []
    for f in fractions:
        try:
            if p >= 2:
                out.append(select_parameters(c0, p, s, x0, R=R,
                                             beta=f * beta_threshold(c0, p, s), C0=C0))
            else:
                if C0 is None:
                    raise ParameterError("C0 > 0", "p < 2 needs the 1-intrinsic bound C0.")
                alpha = f * alpha_threshold(c0, p, s, C0)
                tp = TestFunctionParams(x0, alpha, R, 0.25, s, p=p, c0=c0, C0=C0)
                tp.validate_supersolution()
                tp.validate_cutoff()
                out.append(tp)
        except ParameterError:
            continue
    return out


def cutoff_eta(tp, m):
    '''
    Returns the cutoff function
    ``eta(x) = min([R - s - d(x, x0)]_+ / (delta R), 1)``, which is 1 near
    ``x0`` and vanishes outside the ball of radius ``R - s``.

    :rtype GraphFunction:
    '''
    tp.validate_cutoff()
    R, s, dR, x0 = tp.R, tp.s, tp.delta * tp.R, tp.x0
    support = ball(m.graph, m, x0, R - s)

    def eta(x):
        return min(max(R - s - m.distance(x, x0), 0.0) / dR, 1.0)

    return GraphFunction(eta, support=support, provenance="closed-form")


def exponent_xi(tp, m):
    '''
    Returns ``xi(x) = -alpha [d(x, x0) - delta R]_+``.

    :rtype GraphFunction:
    '''
    alpha, dR, x0 = tp.alpha, tp.delta * tp.R, tp.x0

    def xi(x):
        return -alpha * max(m.distance(x, x0) - dR, 0.0)

    return GraphFunction(xi, provenance="closed-form")


def supersolution_zeta(tp, m):
    '''
    Returns ``zeta(x) = exp(-alpha d(x, x0))``.

    :rtype GraphFunction:
    '''
    alpha, x0 = tp.alpha, tp.x0
    return GraphFunction(lambda x: math.exp(-alpha * m.distance(x, x0)),
                         provenance="closed-form")


def check_exponent_bound(g, m, V, tp, region):
    '''
    Checks, at every vertex of ``region``, that
    ``(1/2) sum_y omega(x, y) (1 - exp(xi(y) - xi(x)))^2 - p V(x) mu(x)``
    is at most ``H mu(x)``, where ``H = alpha^2/2 exp(2 s alpha) - c0 p``.
    The sum runs over all neighbors, including those outside the region.

    Parameters must satisfy ``alpha^2 exp(2 s alpha) < 2 c0 p`` (and the
    remaining uniqueness constraints if ``tp.beta`` is set).

    :rtype VerificationReport:
    '''
    if tp.beta is not None:
        tp.validate_uniqueness()
    else:
        tp.validate_exponent()
    xi = exponent_xi(tp, m)
    H = tp.H
    margins, slack = [], []
    for x in region.vertices:
        mu = g.measure(x)
        xi_x = xi(x)
        terms = [w * (1 - math.exp(xi(y) - xi_x)) ** 2 for y, w in g.neighbors(x)]
        lhs = 0.5 * pairwise_sum(terms) - tp.p * V(x) * mu
        rhs = H * mu
        margins.append(rhs - lhs)
        slack.append(float(inequality_slack(lhs, rhs)))
    return VerificationReport("exponent_bound", region.vertices, margins, slack=slack,
                              params=tp.describe(), details={"H": H})


def check_cutoff_gradient(g, m, tp, region, C0=None):
    '''
    Checks the gradient bounds for the cutoff function ``eta``. At a vertex
    ``x`` in the annulus ``(1 - delta) R - 2s <= d(x, x0) <= R``:

    (a) ``|eta(y) - eta(x)| <= d(x, y) / (delta R)`` for every neighbor ``y``;
    (b) ``sum_y (eta(y) - eta(x))^2 omega(x, y) <= C2 mu(x) / (delta R)^2``,
        where ``C2`` is the 2-intrinsic bound of ``m`` on the region (at most
        1 for an intrinsic metric);
    (c) ``|Laplacian(eta)(x)| <= C0 / (delta R)``, with ``C0`` the 1-intrinsic
        bound (``tp.C0``, or measured on the region).

    Off the annulus, all three quantities must vanish. The margin at ``x`` is
    the smallest of the three sub-check margins.

    :rtype VerificationReport:
    '''
    tp.validate_cutoff()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        C2 = intrinsic_bound(g, m, 2, region).value
        if C0 is None:
            C0 = tp.C0 if tp.C0 is not None else intrinsic_bound(g, m, 1, region).value
    eta = cutoff_eta(tp, m)
    dR = tp.delta * tp.R
    inner = (1 - tp.delta) * tp.R - 2 * tp.s
    margins, slack = [], []
    worst = {"gradient": np.inf, "energy": np.inf, "laplacian": np.inf}
    for x in region.vertices:
        mu = g.measure(x)
        dx = m.distance(x, tp.x0)
        eta_x = eta(x)
        annulus = inner <= dx <= tp.R
        grad_margin = np.inf
        energy = 0.0
        for y, w in g.neighbors(x):
            diff = abs(eta(y) - eta_x)
            bound = m.distance(x, y) / dR if annulus else 0.0
            grad_margin = min(grad_margin, bound - diff)
            energy += diff * diff * w
        lap = abs(laplacian(g, eta, x))
        if annulus:
            energy_margin = C2 * mu / dR ** 2 - energy
            lap_margin = C0 / dR - lap
        else:
            energy_margin = -energy
            lap_margin = -lap
        worst["gradient"] = min(worst["gradient"], grad_margin)
        worst["energy"] = min(worst["energy"], energy_margin)
        worst["laplacian"] = min(worst["laplacian"], lap_margin)
        margins.append(min(grad_margin, energy_margin, lap_margin))
        slack.append(INEQUALITY_ABS_TOL + INEQUALITY_REL_TOL * max(1.0, C0 / dR, mu / dR ** 2))
    params = tp.describe()
    params.update({"C0": C0, "C2": C2})
    return VerificationReport("cutoff_gradient", region.vertices, margins, slack=slack,
                              params=params, details=worst)


def check_supersolution(g, m, V, tp, region):
    '''
    Checks that ``zeta = exp(-alpha d(., x0))`` satisfies
    ``Laplacian(zeta)(x) - p V(x) zeta(x) <= K zeta(x)`` at every vertex of
    ``region``, where ``K = C0 alpha exp(alpha s) - p c0``. This holds for
    every ``alpha > 0``.

    :rtype VerificationReport:
    '''
    zeta = supersolution_zeta(tp, m)
    K = tp.K
    margins, slack = [], []
    for x in region.vertices:
        zx = zeta(x)
        lhs = laplacian(g, zeta, x) - tp.p * V(x) * zx
        rhs = K * zx
        margins.append(rhs - lhs)
        slack.append(float(inequality_slack(lhs, rhs)))
    return VerificationReport("supersolution", region.vertices, margins, slack=slack,
                              params=tp.describe(), details={"K": K})


def _region_pairs(region):
    for x in region.vertices:
        for y, w in region.full_neighbors(x):
            if w > 0 and (y not in region or x < y):
                yield x, y


def check_compatibility(eta, xi, region):
    '''
    Checks ``[eta(y)^2 - eta(x)^2] [exp(xi(y)) - exp(xi(x))] >= 0`` on every
    edge of ``region`` (including edges leaving it). Locations are edges.

    :rtype VerificationReport:
    '''
    locations, margins, slack = [], [], []
    for x, y in _region_pairs(region):
        a = eta(y) ** 2 - eta(x) ** 2
        b = math.exp(xi(y)) - math.exp(xi(x))
        locations.append((x, y))
        margins.append(a * b)
        slack.append(COMPATIBILITY_TOL * (1 + abs(a) + abs(b)))
    return VerificationReport("compatibility", locations, margins, slack=slack)


def _check_equation(g, u, V, vertices, what):
    for x in canonical_order(vertices):
        try:
            r = abs(apply_operator(g, V, u, x))
            ux = abs(u(x))
            scale = max(1.0, abs(V(x)) * ux,
                        pairwise_sum([w * abs(u(y)) for y, w in g.neighbors(x)]) / g.measure(x))
        except ValueError as e:
            raise HypothesisError("The equation cannot be evaluated at {} ({}): {}".format(
                                  x, what, e), vertex=x)
        if not r <= EQUATION_TOL * scale:
            raise HypothesisError("The equation fails at {} ({}): residual {}.".format(
                                  x, what, r), vertex=x)


def _check_subsolution(g, u, c0, vertices, what):
    for x in canonical_order(vertices):
        try:
            ux = u(x)
            lap = laplacian(g, u, x)
            scale = max(1.0, c0 * abs(ux),
                        pairwise_sum([w * abs(u(y)) for y, w in g.neighbors(x)]) / g.measure(x))
        except ValueError as e:
            raise HypothesisError("The subsolution cannot be evaluated at {} ({}): {}".format(
                                  x, what, e), vertex=x)
        if ux < 0:
            raise HypothesisError("The subsolution is negative at {} ({}).".format(
                                  x, what), vertex=x)
        if not lap - c0 * ux >= -EQUATION_TOL * scale:
            raise HypothesisError("The subsolution inequality fails at {} ({}): "
                                  "Laplacian {} < c0 u = {}.".format(x, what, lap, c0 * ux),
                                  vertex=x)


def _hypothesis_potential(g, u, V, vertices, what, subsolution):
    # returns the potential the estimate is evaluated with
    if not subsolution:
        _check_equation(g, u, V, vertices, what)
        return V
    c0, _ = V.infimum(vertices)
    _check_subsolution(g, u, c0, vertices, what)
    return lambda x: c0


def _check_support(g, f, region, steps, name):
    if not f.has_finite_support:
        raise HypothesisError("{} must have finite support.".format(name))
    for x in canonical_order(f.support):
        if f(x) < 0:
            raise HypothesisError("{} is negative at {}.".format(name, x), vertex=x)
    for y in canonical_order(closed_neighborhood(g, f.support, steps)):
        if y not in region:
            raise HypothesisError("The region does not contain {}, within {} steps of "
                                  "the support of {}.".format(y, steps, name), vertex=y)


def check_energy_estimate(g, u, V, eta, xi, p, region, subsolution=False):
    '''
    Checks the weighted energy estimate for a solution ``u``:
    ``(1/2) sum_x |u|^p eta^2 e^xi {p V mu - (1/2) sum_y omega (1 - e^{xi(y) - xi(x)})^2}``
    is at most ``sum_{x, y} |u(x)|^p e^{xi(y)} (eta(y) - eta(x))^2 omega(x, y)``.

    Hypotheses, checked in order (a :class:`HypothesisError` is raised if one
    fails): ``p >= 2``; ``eta >= 0`` with finite support, which together with
    its neighbors lies in ``region``; ``[eta^2(y) - eta^2(x)][e^xi(y) - e^xi(x)]
    >= 0`` on every edge of the region; and ``u`` solves the equation on the
    support of ``eta`` and its neighbors.

    With ``subsolution`` set, ``u`` need only be a nonnegative subsolution
    there, ``u >= 0`` and ``Laplacian(u) >= c0 u`` with ``c0`` the lower
    bound of ``V``, and the estimate is checked with ``c0`` in place of ``V``.

    The report has the single location "global"; the details also give the
    margin of the equivalent form with the left side doubled against twice
    the right side.

    :rtype VerificationReport:
    '''
    if not p >= 2:
        raise ParameterError("p >= 2", "The energy estimate needs p >= 2, got {}.".format(p))
    _check_support(g, eta, region, 1, "eta")
    compat = check_compatibility(eta, xi, region)
    bad = compat.failing_locations
    if len(bad) > 0:
        raise HypothesisError("eta and xi are not compatible on the edge {}.".format(bad[0]),
                              pair=bad[0])
    near = closed_neighborhood(g, eta.support)
    V = _hypothesis_potential(g, u, V, near, "support of eta and its neighbors", subsolution)
    lhs_terms = []
    for x in canonical_order(eta.support):
        ex = eta(x)
        if ex == 0:
            continue
        xi_x = xi(x)
        inner = [w * (1 - math.exp(xi(y) - xi_x)) ** 2 for y, w in g.neighbors(x)]
        bracket = p * V(x) * g.measure(x) - 0.5 * pairwise_sum(inner)
        lhs_terms.append(abs(u(x)) ** p * ex * ex * math.exp(xi_x) * bracket)
    rhs_terms = []
    for x in canonical_order(near):
        ux = abs(u(x)) ** p
        ex = eta(x)
        for y, w in g.neighbors(x):
            rhs_terms.append(ux * math.exp(xi(y)) * (eta(y) - ex) ** 2 * w)
    lhs = 0.5 * pairwise_sum(lhs_terms)
    rhs = pairwise_sum(rhs_terms)
    margin = rhs - lhs
    slack = INEQUALITY_ABS_TOL * (1 + abs(rhs))
    return VerificationReport(
            "energy_estimate", [GLOBAL], [margin], slack=slack,
            params={"p": p, "subsolution": subsolution},
            details={"lhs": lhs, "rhs": rhs, "doubled_margin": 2 * margin,
                     "support_size": len(eta.support)})


def check_adjoint_estimate(g, u, V, v, p, region, subsolution=False):
    '''
    Checks ``sum_x |u(x)|^p {-Laplacian(v)(x) + p V(x) v(x)} mu(x) <= 0`` for
    a solution ``u`` and a nonnegative ``v`` of finite support. The sum runs
    over the support of ``v`` and its neighbors.

    Hypotheses (a :class:`HypothesisError` is raised if one fails): ``v >= 0``
    with finite support, ``region`` contains every vertex within two steps of
    the support, and ``u`` solves the equation on the support. With
    ``subsolution`` set, ``u >= 0`` and ``Laplacian(u) >= c0 u`` on the
    support suffice, and ``c0`` replaces ``V`` in the sum.

    :rtype VerificationReport:
    '''
    if not p >= 1:
        raise ParameterError("p >= 1", "The adjoint estimate needs p >= 1, got {}.".format(p))
    _check_support(g, v, region, 2, "v")
    V = _hypothesis_potential(g, u, V, v.support, "support of v", subsolution)
    terms, sizes = [], []
    for x in canonical_order(closed_neighborhood(g, v.support)):
        ux = abs(u(x)) ** p
        lap = laplacian(g, v, x)
        pv = p * V(x) * v(x)
        mu = g.measure(x)
        terms.append(ux * (pv - lap) * mu)
        sizes.append(ux * (abs(lap) + pv) * mu)
    S = pairwise_sum(terms)
    scale = pairwise_sum(sizes)
    slack = INEQUALITY_ABS_TOL + INEQUALITY_REL_TOL * scale
    return VerificationReport("adjoint_estimate", [GLOBAL], [-S], slack=slack,
                              params={"p": p, "subsolution": subsolution},
                              details={"sum": S, "scale": scale})


def check_ball_decay(g, m, u, tp, region):
    '''
    Checks the ball estimate that concludes the weighted energy argument:
    ``|H| sum_{d <= delta R} |u|^p mu`` is at most
    ``2 C2/(delta R)^2 exp(3 s alpha - (1 - 2 delta) alpha R) sum_{d <= R} |u|^p mu``,
    where ``C2`` is the 2-intrinsic bound of ``m`` on the region (1 for an
    intrinsic metric). The ball of radius ``R`` must lie in ``region``.

    :rtype VerificationReport:
    '''
    tp.validate_exponent()
    tp.validate_cutoff()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        C2 = intrinsic_bound(g, m, 2, region).value
    dist = m.distances_within(tp.x0, np.nextafter(tp.R, np.inf))
    inner_terms, outer_terms = [], []
    for x in canonical_order(dist):
        if x not in region:
            raise HypothesisError("The region does not contain {}, in the ball of "
                                  "radius R.".format(x), vertex=x)
        t = abs(u(x)) ** tp.p * g.measure(x)
        outer_terms.append(t)
        if dist[x] <= tp.delta * tp.R:
            inner_terms.append(t)
    H = abs(tp.H)
    dR = tp.delta * tp.R
    lhs = H * pairwise_sum(inner_terms)
    factor = 2 * C2 / dR ** 2 * math.exp(
            3 * tp.s * tp.alpha - (1 - 2 * tp.delta) * tp.alpha * tp.R)
    rhs = factor * pairwise_sum(outer_terms)
    params = tp.describe()
    params["C2"] = C2
    return VerificationReport("ball_decay", [GLOBAL], [rhs - lhs],
                              slack=float(inequality_slack(lhs, rhs)), params=params,
                              details={"lhs": lhs, "rhs": rhs, "H": tp.H})
