import math
import warnings

import attr
import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .calculus import GraphFunction, laplacian
from .report import VerificationReport, inequality_slack
from .util import canonical_order, pairwise_sum, vertex_seed

# Regions up to this size are solved by sparse factorization, larger ones by
# conjugate gradients.
DIRECT_SOLVE_LIMIT = 2 * 10**4

RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    '''
    Raised when a Dirichlet problem could not be solved to the required
    accuracy.
    '''
    pass


@attr.s(frozen=True, eq=False)
class Potential(object):
    '''
    A positive potential ``V`` on the vertices.

    :ivar callable oracle: Maps a vertex to ``V(x)``.
    :ivar float c0: A declared lower bound for ``V`` over the whole graph, or
        None if none is known (then :meth:`infimum` uses the minimum over a
        region, which is only region-local).
    :ivar str name: A short description.
    '''
    oracle = attr.ib()
    c0 = attr.ib(default=None)
    name = attr.ib(default="custom")
    params = attr.ib(factory=dict)

    @c0.validator
    def _check_c0(self, attribute, value):
        if value is not None and not value > 0:
            raise ValueError("The potential lower bound c0 must be positive, got {}.".format(
                             value))

    def __call__(self, x):
        v = float(self.oracle(x))
        if not v > 0:
            raise ValueError("The potential must be positive, but V({}) = {}.".format(x, v))
        return v

    @classmethod
    def constant(cls, c0):
        c0 = float(c0)
        return cls(lambda x: c0, c0=c0, name="constant", params={"c0": c0})

    @classmethod
    def from_callable(cls, f, c0=None, name="custom"):
        return cls(f, c0=c0, name=name)

    @classmethod
    def perturbed(cls, c0, amplitude, seed=0):
        '''
        The potential ``c0 + amplitude * U(x)``, where ``U(x)`` is uniform on
        [0, 1) and depends only on ``seed`` and the vertex.
        '''
        c0 = float(c0)
        if not amplitude >= 0:
            raise ValueError("The perturbation amplitude must be nonnegative.")

        def oracle(x):
            rng = np.random.default_rng(vertex_seed(seed, x))
            return c0 + amplitude * rng.random()

        return cls(oracle, c0=c0, name="perturbed",
                   params={"c0": c0, "amplitude": amplitude, "seed": seed})

    @classmethod
    def from_values(cls, values, default=None):
        '''
        The potential with the given values, and ``default`` elsewhere (if
        ``default`` is None, evaluating at an unlisted vertex is an error).
        With a default, the smallest value (if positive) is the declared
        lower bound ``c0``.
        '''
        values = {x: float(v) for x, v in values.items()}
        c0 = None
        if default is not None:
            lower = min(list(values.values()) + [float(default)])
            if lower > 0:
                c0 = lower

        def oracle(x):
            if x in values:
                return values[x]
            if default is None:
                raise ValueError("No potential value given for {}.".format(x))
            return default

        return cls(oracle, c0=c0, name="file", params={"default": default})

    def infimum(self, vertices=None):
        '''
        Returns ``(c0, exact)``: the declared lower bound if there is one, and
        otherwise the minimum over ``vertices`` (with ``exact`` False, and a
        warning).
        '''
        if self.c0 is not None:
            return self.c0, True
        if vertices is None:
            raise ValueError("The potential has no declared lower bound; "
                             "need vertices to compute a region-local one.")
        c0 = min(self(x) for x in vertices)
        warnings.warn("Using the minimum of the potential over a region ({}) as c0; "
                      "thresholds depending on it are region-local.".format(c0))
        return c0, False


def check_potential(V, vertices):
    '''
    Checks that ``V(x) >= c0 > 0`` at the given vertices. Margins are
    ``V(x) - c0``.

    :rtype VerificationReport:
    '''
    vertices = canonical_order(vertices)
    failures = []
    values = []
    for x in vertices:
        v = float(V.oracle(x))
        values.append(v)
        if not v > 0:
            failures.append("V({}) = {} is not positive".format(x, v))
    if V.c0 is not None:
        c0, exact = V.c0, True
    else:
        c0, exact = (min(values) if len(values) > 0 else math.nan), False
    margins = np.array(values) - c0
    return VerificationReport("potential", vertices, margins, slack=0.0,
                              failures=failures,
                              params={"c0": c0, "c0_exact": exact, "name": V.name})


@attr.s(frozen=True, eq=False)
class DirichletProblem(object):
    '''
    The equation ``Laplacian(u) = V u`` on the interior of a region (the
    vertices all of whose neighbors are in the region), with ``u`` given on
    the rest of the region (the boundary).

    :ivar GraphRegion region: The region.
    :ivar GraphFunction boundary_data: Values on the boundary.
    :ivar Potential potential: The potential.
    '''
    region = attr.ib()
    boundary_data = attr.ib()
    potential = attr.ib()
    interior = attr.ib(init=False)
    boundary = attr.ib(init=False)

    @interior.default
    def _interior_default(self):
        return tuple(x for x in self.region.vertices
                     if len(self.region.halo.get(x, ())) == 0)

    @boundary.default
    def _boundary_default(self):
        inside = set(self.interior)
        return tuple(x for x in self.region.vertices if x not in inside)


def _operator_residual(region, V, values, x):
    # mu(x) (Laplacian(u) - V u)(x), using only region data
    ux = values[x]
    terms = [w * (values[y] - ux) for y, w in region.adjacency.get(x, ())]
    return pairwise_sum(terms) - V(x) * region.measure[x] * ux


def dirichlet_solve(problem):
    '''
    Solves a :class:`DirichletProblem`. Writing ``I`` for the interior, the
    system ``(V(x) mu(x) + deg(x)) u(x) - sum_{y in I} omega(x, y) u(y) =
    sum_{y not in I} omega(x, y) u(y)`` for ``x`` in ``I`` is symmetric
    positive definite; it is solved by sparse LU factorization for regions
    of up to 20000 vertices and by conjugate gradients beyond.

    The result is defined on the region only, and equals the boundary data
    on the boundary.

    :rtype GraphFunction:
    '''
    region, V = problem.region, problem.potential
    interior = problem.interior
    if len(interior) == 0:
        raise ValueError("The region has no interior vertices.")
    index = {x: j for j, x in enumerate(interior)}
    values = {x: float(problem.boundary_data(x)) for x in problem.boundary}
    n = len(interior)
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    for x in interior:
        i = index[x]
        diag = V(x) * region.measure[x]
        for y, w in region.adjacency.get(x, ()):
            diag += w
            if y in index:
                rows.append(i)
                cols.append(index[y])
                vals.append(-w)
            else:
                rhs[i] += w * values[y]
        rows.append(i)
        cols.append(i)
        vals.append(diag)
    A = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    if n <= DIRECT_SOLVE_LIMIT:
        solution = scipy.sparse.linalg.spsolve(A.tocsc(), rhs)
    else:
        solution, info = scipy.sparse.linalg.cg(A, rhs, rtol=1e-12, maxiter=10 * n)
        if info != 0:
            raise SolverError("Conjugate gradients did not converge (info = {}).".format(info))
    solution = np.atleast_1d(solution)
    for x in interior:
        values[x] = float(solution[index[x]])
    scale = 1 + max(abs(v) for v in values.values())
    worst = max(abs(_operator_residual(region, V, values, x)) for x in interior)
    if not worst <= RESIDUAL_TOL * scale:
        raise SolverError("Residual {} exceeds tolerance {}.".format(
                          worst, RESIDUAL_TOL * scale))
    return GraphFunction.on_domain(values, provenance="solver")


def apply_operator(g, V, u, x):
    '''
    Returns ``Laplacian(u)(x) - V(x) u(x)``.
    '''
    return laplacian(g, u, x) - V(x) * u(x)


def _residual_scale(g, V, u, x):
    return max(1.0, abs(V(x) * u(x)),
               pairwise_sum([w * abs(u(y)) for y, w in g.neighbors(x)]) / g.measure(x))


def residual_report(g, V, u, vertices, tol=RESIDUAL_TOL, relative=False):
    '''
    Reports ``|Laplacian(u) - V u|`` at each vertex. The margin is minus the
    residual, and the slack is ``tol``, or with ``relative`` set, ``tol``
    times the size of the terms in the equation at that vertex.

    :rtype VerificationReport:
    '''
    vertices = canonical_order(vertices)
    residuals = np.array([abs(apply_operator(g, V, u, x)) for x in vertices])
    if relative:
        slack = np.array([tol * _residual_scale(g, V, u, x) for x in vertices])
    else:
        slack = tol
    max_residual = float(np.max(residuals)) if len(residuals) > 0 else 0.0
    return VerificationReport("residual", vertices, -residuals, slack=slack,
                              params={"tol": tol, "relative": relative},
                              details={"max_residual": max_residual})


def subsolution_report(g, V, u, vertices, c0=None):
    '''
    Checks that ``u`` is a nonnegative subsolution, ``u >= 0`` and
    ``Laplacian(u) >= c0 u``, at each vertex. The margin is the smaller of
    ``u(x)`` and ``Laplacian(u)(x) - c0 u(x)``.

    :rtype VerificationReport:
    '''
    vertices = canonical_order(vertices)
    if c0 is None:
        c0, _ = V.infimum(vertices)
    margins, slack = [], []
    for x in vertices:
        ux = u(x)
        lap = laplacian(g, u, x)
        margins.append(min(ux, lap - c0 * ux))
        slack.append(float(inequality_slack(lap, c0 * ux)))
    return VerificationReport("subsolution", vertices, margins, slack=slack,
                              params={"c0": c0})


def lattice_characteristic_roots(c0):
    '''
    Returns the roots ``(lam_plus, lam_minus)`` of
    ``lam^2 - (2 + c0) lam + 1 = 0``, with ``lam_plus > 1 > lam_minus`` and
    ``lam_plus * lam_minus = 1``.
    '''
    if not c0 > 0:
        raise ValueError("c0 must be positive, got {}.".format(c0))
    b = 2.0 + c0
    lam_plus = (b + math.sqrt(c0 * (4.0 + c0))) / 2
    return lam_plus, 1 / lam_plus


def _check_line_vertex(x):
    if not (isinstance(x, tuple) and len(x) == 1):
        raise ValueError("{} is not a vertex of the one-dimensional lattice.".format(x))
    return int(x[0])


def make_symmetric_growing_solution(c0):
    '''
    Returns ``U(n) = lam^|n| + lam^-|n|`` on the one-dimensional lattice,
    where ``lam`` is the larger characteristic root; ``U`` solves
    ``Laplacian(U) = c0 U`` everywhere, including at 0. Values too large for
    a float are ``inf``.

    :rtype GraphFunction:
    '''
    log_lam = math.log(lattice_characteristic_roots(c0)[0])

    def U(x):
        n = abs(_check_line_vertex(x))
        with np.errstate(over="ignore"):
            return float(np.exp(n * log_lam) + np.exp(-n * log_lam))

    return GraphFunction(U, provenance="closed-form")


def make_two_sided_solution(c0, R):
    '''
    Returns ``u(n) = (lam^n + lam^-n) / (lam^R + lam^-R)`` on the
    one-dimensional lattice, the solution of ``Laplacian(u) = c0 u`` with
    ``u(-R) = u(R) = 1``.

    :rtype GraphFunction:
    '''
    log_lam = math.log(lattice_characteristic_roots(c0)[0])
    R = int(R)

    def u(x):
        n = abs(_check_line_vertex(x))
        return ((math.exp((n - R) * log_lam) + math.exp(-(n + R) * log_lam))
                / (1 + math.exp(-2 * R * log_lam)))

    return GraphFunction(u, provenance="closed-form")
