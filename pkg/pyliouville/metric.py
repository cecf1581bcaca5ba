import collections
import functools
import heapq
import math
import warnings

import attr
import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .graph import Lattice, RegularTree
from .report import VerificationReport
from .util import canonical_order, pairwise_sum

DEFAULT_BALL_BUDGET = 10**7

METRIC_KINDS = ("default", "combinatorial", "scaled", "edge_length", "constant")


class BallBudgetError(ValueError):
    '''
    Raised when enumerating a ball visits more vertices than allowed, which
    usually means the metric does not have finite balls.
    '''
    pass


@attr.s(frozen=True)
class MetricBound(object):
    '''
    A supremum over the graph computed on a region. If ``exact`` is False the
    value is only known to be a lower bound for the supremum over the whole
    graph.
    '''
    value = attr.ib()
    exact = attr.ib()
    vertex = attr.ib(default=None)

    def __float__(self):
        return float(self.value)


class PseudoMetric(object):
    '''
    A pseudo metric d on the vertices of a graph: symmetric, satisfying the
    triangle inequality, and with ``d(x, x) = 0``, but possibly vanishing
    between distinct vertices.

    :ivar Graph graph: The graph.
    :ivar int budget: The largest number of vertices a ball may contain
        before :class:`BallBudgetError` is raised.
    '''
    kind = None

    def __init__(self, graph, budget=DEFAULT_BALL_BUDGET):
        self.graph = graph
        self.budget = budget

    def __call__(self, x, y):
        return self.distance(x, y)

    def distance(self, x, y):
        raise NotImplementedError

    def distances_within(self, x0, r):
        '''
        Returns a dictionary mapping each vertex ``x`` with ``d(x, x0) < r`` to
        ``d(x, x0)``.
        '''
        raise NotImplementedError

    @property
    def homogeneous(self):
        '''
        Whether every vertex looks the same with respect to both the graph and
        the metric, so that suprema are attained at every vertex.
        '''
        return False

    def describe(self):
        return {"kind": self.kind}

    def _over_budget(self, count, x0, r):
        if count > self.budget:
            raise BallBudgetError(
                    "Ball of radius {} about {} has more than {} vertices.".format(
                        r, x0, self.budget))


class CombinatorialMetric(PseudoMetric):
    '''
    The hop-count (graph) distance multiplied by ``scale``. With ``scale = 1``
    this is the usual combinatorial distance.
    '''

    def __init__(self, graph, scale=1.0, budget=DEFAULT_BALL_BUDGET):
        if not (math.isfinite(scale) and scale > 0):
            raise ValueError("Metric scale must be positive, got {}.".format(scale))
        super(CombinatorialMetric, self).__init__(graph, budget=budget)
        self.scale = float(scale)
        self._bfs_cache = functools.lru_cache(maxsize=64)(self._all_hops)

    @property
    def kind(self):
        return "combinatorial" if self.scale == 1.0 else "scaled"

    @property
    def homogeneous(self):
        return self.graph.homogeneous

    def describe(self):
        return {"kind": self.kind, "scale": self.scale}

    def hops(self, x, y):
        '''
        The number of edges on a shortest path from ``x`` to ``y``.
        '''
        g = self.graph
        g.check_vertex(x)
        g.check_vertex(y)
        if isinstance(g, Lattice):
            return sum(abs(a - b) for a, b in zip(x, y))
        if isinstance(g, RegularTree):
            k = 0
            while k < min(len(x), len(y)) and x[k] == y[k]:
                k += 1
            return len(x) + len(y) - 2 * k
        if g.is_finite:
            hops = self._bfs_cache(x)
            if y not in hops:
                raise ValueError("{} and {} are not connected.".format(x, y))
            return hops[y]
        return self._search_hops(x, y)

    def _all_hops(self, x):
        hops = {x: 0}
        queue = collections.deque([x])
        while queue:
            z = queue.popleft()
            for y, w in self.graph.neighbors(z):
                if w > 0 and y not in hops:
                    hops[y] = hops[z] + 1
                    queue.append(y)
        return hops

    def _search_hops(self, x, y):
        hops = {x: 0}
        queue = collections.deque([x])
        while queue:
            z = queue.popleft()
            if z == y:
                return hops[z]
            for v, w in self.graph.neighbors(z):
                if w > 0 and v not in hops:
                    hops[v] = hops[z] + 1
                    queue.append(v)
            self._over_budget(len(hops), x, "d({}, {})".format(x, y))
        raise ValueError("{} and {} are not connected.".format(x, y))

    def distance(self, x, y):
        return self.scale * self.hops(x, y)

    def distances_within(self, x0, r):
        self.graph.check_vertex(x0)
        out = {}
        if not (r > 0):
            return out
        # breadth-first, one layer per hop; each hop moves the distance by
        # exactly `scale`, so stopping at the first layer outside is complete
        hops = {x0: 0}
        layer = [x0]
        h = 0
        while len(layer) > 0 and self.scale * h < r:
            for x in layer:
                out[x] = self.scale * h
            self._over_budget(len(out), x0, r)
            next_layer = []
            for x in layer:
                for y, w in self.graph.neighbors(x):
                    if w > 0 and y not in hops:
                        hops[y] = h + 1
                        next_layer.append(y)
            layer = next_layer
            h += 1
        return out


class EdgeLengthMetric(PseudoMetric):
    '''
    The shortest-path distance for positive edge lengths. By default the
    length of an edge of weight ``w`` is ``1 / w``; otherwise ``length`` is
    called as ``length(x, y, w)``.

    On finite graphs distances come from :func:`scipy.sparse.csgraph.dijkstra`
    on the matrix of edge lengths; infinite graphs are searched lazily.
    '''
    kind = "edge_length"

    def __init__(self, graph, length=None, budget=DEFAULT_BALL_BUDGET):
        super(EdgeLengthMetric, self).__init__(graph, budget=budget)
        if length is None:
            length = lambda x, y, w: 1.0 / w
        self.length = length
        self._lengths = None
        self._rows = functools.lru_cache(maxsize=64)(self._all_distances)

    def _edge_length(self, x, y, w):
        ell = float(self.length(x, y, w))
        if not (math.isfinite(ell) and ell > 0):
            raise ValueError("Edge {} -- {} has length {}; lengths must be positive.".format(
                             x, y, ell))
        return ell

    def _length_matrix(self):
        if self._lengths is None:
            order = self.graph.vertices()
            index = {x: j for j, x in enumerate(order)}
            rows, cols, data = [], [], []
            for x in order:
                for y, w in self.graph.neighbors(x):
                    if w > 0:
                        rows.append(index[x])
                        cols.append(index[y])
                        data.append(self._edge_length(x, y, w))
            n = len(order)
            L = scipy.sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
            self._lengths = (order, index, L)
        return self._lengths

    def _all_distances(self, x0):
        order, index, L = self._length_matrix()
        dist = scipy.sparse.csgraph.dijkstra(L, directed=True, indices=index[x0])
        return {x: float(d) for x, d in zip(order, dist) if np.isfinite(d)}

    def _dijkstra(self, x0, stop):
        dist = {x0: 0.0}
        done = {}
        heap = [(0.0, 0, x0)]
        counter = 1
        while heap:
            dx, _, x = heapq.heappop(heap)
            if x in done:
                continue
            if stop(x, dx):
                break
            done[x] = dx
            self._over_budget(len(done), x0, "search")
            for y, w in self.graph.neighbors(x):
                if w > 0 and y not in done:
                    dy = dx + self._edge_length(x, y, w)
                    if dy < dist.get(y, math.inf):
                        dist[y] = dy
                        heapq.heappush(heap, (dy, counter, y))
                        counter += 1
        return done, dist

    def distance(self, x, y):
        self.graph.check_vertex(x)
        self.graph.check_vertex(y)
        if x == y:
            return 0.0
        # search from the canonically smaller vertex so d(x, y) == d(y, x)
        # holds bit for bit
        a, b = canonical_order([x, y])
        if self.graph.is_finite:
            found = self._rows(a)
        else:
            found = {}

            def stop(z, dz):
                if z == b:
                    found[b] = dz
                    return True
                return False

            self._dijkstra(a, stop)
        if b not in found:
            raise ValueError("{} and {} are not connected.".format(x, y))
        return found[b]

    def distances_within(self, x0, r):
        self.graph.check_vertex(x0)
        if not (r > 0):
            return {}
        if self.graph.is_finite:
            out = {x: d for x, d in self._rows(x0).items() if d < r}
            self._over_budget(len(out), x0, r)
            return out
        done, _ = self._dijkstra(x0, lambda z, dz: dz >= r)
        return done


class ConstantMetric(PseudoMetric):
    '''
    The degenerate pseudo metric d = 0, with jump size 0.
    '''
    kind = "constant"

    @property
    def homogeneous(self):
        return True

    def distance(self, x, y):
        self.graph.check_vertex(x)
        self.graph.check_vertex(y)
        return 0.0

    def distances_within(self, x0, r):
        self.graph.check_vertex(x0)
        if not (r > 0):
            return {}
        if not self.graph.is_finite:
            raise BallBudgetError("Every ball of positive radius is the whole (infinite) "
                                  "graph for the constant pseudo metric.")
        return {x: 0.0 for x in self.graph.vertices()}


def default_metric(g):
    '''
    Returns the default intrinsic metric for the family of ``g``: the scaled
    combinatorial metric with scale ``1/sqrt(2d)`` on the lattice Z^d,
    ``1/sqrt(b)`` on the regular tree with branching b, and
    ``1/sqrt(max Deg)`` on a finite edge-list graph.
    '''
    if isinstance(g, Lattice):
        scale = 1 / math.sqrt(2 * g.dimension)
    elif isinstance(g, RegularTree):
        scale = 1 / math.sqrt(g.branching)
    elif g.is_finite:
        max_deg = max(g.degree(x)[1] for x in g.vertices())
        scale = 1 / math.sqrt(max_deg)
    else:
        raise ValueError("No default metric for this graph.")
    return CombinatorialMetric(g, scale=scale)


def make_metric(g, kind="default", scale=None, budget=DEFAULT_BALL_BUDGET):
    '''
    Returns a metric on ``g`` of the given kind: "default" (see
    :func:`default_metric`), "combinatorial" (hop count), "scaled" (hop count
    times ``scale``), "edge_length" (shortest path with edge length
    ``scale / w``), or "constant" (d = 0).
    '''
    if kind not in METRIC_KINDS:
        raise ValueError("Unknown metric kind '{}'; should be one of {}.".format(
                         kind, METRIC_KINDS))
    if kind == "default":
        m = default_metric(g)
        m.budget = budget
        return m
    elif kind == "combinatorial":
        return CombinatorialMetric(g, 1.0, budget=budget)
    elif kind == "scaled":
        if scale is None:
            raise ValueError("A scaled metric needs a scale.")
        return CombinatorialMetric(g, scale, budget=budget)
    elif kind == "edge_length":
        c = 1.0 if scale is None else float(scale)
        return EdgeLengthMetric(g, length=lambda x, y, w: c / w, budget=budget)
    else:
        return ConstantMetric(g, budget=budget)


def _check_metric(g, m):
    if m.graph is not g:
        raise ValueError("The metric is defined on a different graph.")


def ball(g, m, x0, r):
    '''
    Returns the ball ``{x : d(x, x0) < r}`` as a frozenset. Vertices at
    distance exactly ``r`` are not included.

    :param Graph g: The graph.
    :param PseudoMetric m: A metric on ``g`` with finite balls.
    :param x0: The center.
    :param float r: The radius (finite, nonnegative).
    '''
    _check_metric(g, m)
    if not (math.isfinite(r) and r >= 0):
        raise ValueError("Ball radius must be finite and nonnegative, got {}.".format(r))
    return frozenset(m.distances_within(x0, r))


def _region_exact(g, m, region):
    return m.homogeneous or (g.is_finite and len(region) == len(g.vertices()))


def _warn_lower_bound(name):
    warnings.warn("The {} was computed on a finite region of a graph that is not "
                  "homogeneous; it is only a lower bound for the supremum over the "
                  "whole graph.".format(name))


def jump_size(g, m, region):
    '''
    Returns the largest distance between the endpoints of an edge of positive
    weight within ``region``, as a :class:`MetricBound`. This is exact for
    homogeneous graphs and metrics (and for finite graphs covered by the
    region); otherwise it is a lower bound, and a warning is issued.

    :param Graph g: The graph.
    :param PseudoMetric m: The metric.
    :param GraphRegion region: A materialized region of ``g``.
    '''
    _check_metric(g, m)
    best, where = None, None
    for x, y, w in region.internal_edges():
        if w > 0:
            dxy = m.distance(x, y)
            if best is None or dxy > best:
                best, where = dxy, (x, y)
    if best is None:
        raise ValueError("The region has no edges, so the jump size is undefined.")
    exact = _region_exact(g, m, region)
    if not exact:
        _warn_lower_bound("jump size")
    return MetricBound(best, exact, where)


def intrinsic_sum(g, m, q, x):
    '''
    Returns ``(1/mu(x)) sum_y omega(x, y) d(x, y)^q``.
    '''
    terms = [w * m.distance(x, y) ** q for y, w in g.neighbors(x)]
    return pairwise_sum(terms) / g.measure(x)


def intrinsic_bound(g, m, q, region):
    '''
    Returns the maximum over vertices ``x`` of ``region`` of
    ``(1/mu(x)) sum_y omega(x, y) d(x, y)^q``, using all neighbors of ``x``
    (including those outside the region), as a :class:`MetricBound`. The
    metric is "q-intrinsic with bound C0" if this is at most C0 everywhere;
    "intrinsic" means q = 2 and C0 = 1.

    :param float q: The exponent, at least 1.
    '''
    _check_metric(g, m)
    if not q >= 1:
        raise ValueError("The exponent q must be at least 1, got {}.".format(q))
    best, where = 0.0, None
    for x in region.vertices:
        v = intrinsic_sum(g, m, q, x)
        if where is None or v > best:
            best, where = v, x
    exact = _region_exact(g, m, region)
    if not exact:
        _warn_lower_bound("intrinsic bound")
    return MetricBound(best, exact, where)


def distance_laplacian(g, m, x0, x):
    '''
    Returns the Laplacian of ``d(., x0)`` evaluated at ``x``.
    '''
    dx = m.distance(x, x0)
    terms = [w * (m.distance(y, x0) - dx) for y, w in g.neighbors(x)]
    return pairwise_sum(terms) / g.measure(x)


def _distance_gradient_squared(g, m, x0, x):
    dx = m.distance(x, x0)
    terms = [w * (m.distance(y, x0) - dx) ** 2 for y, w in g.neighbors(x)]
    return pairwise_sum(terms) / g.measure(x)


def distance_laplacian_bound(g, m, x0, region):
    '''
    Returns the maximum over ``region`` of ``|Laplacian d(., x0)|``. By the
    triangle inequality this is at most the 1-intrinsic bound of the metric,
    which is checked; a :class:`ValueError` means that ``m`` is not a pseudo
    metric.
    '''
    _check_metric(g, m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c0 = intrinsic_bound(g, m, 1, region).value
    best = 0.0
    for x in region.vertices:
        best = max(best, abs(distance_laplacian(g, m, x0, x)))
    if best > c0 + 1e-12 * (1 + c0):
        raise ValueError("|Laplacian d| = {} exceeds the 1-intrinsic bound {}: "
                         "the triangle inequality fails.".format(best, c0))
    return best


def distance_gradient_bound(g, m, x0, region):
    '''
    Returns the maximum over ``region`` of ``|grad d(., x0)|^2``, which is at
    most the 2-intrinsic bound of the metric (checked as for
    :func:`distance_laplacian_bound`). For an intrinsic metric this is at
    most 1.
    '''
    _check_metric(g, m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c2 = intrinsic_bound(g, m, 2, region).value
    best = 0.0
    for x in region.vertices:
        best = max(best, _distance_gradient_squared(g, m, x0, x))
    if best > c2 + 1e-12 * (1 + c2):
        raise ValueError("|grad d|^2 = {} exceeds the 2-intrinsic bound {}: "
                         "the triangle inequality fails.".format(best, c2))
    return best


def check_triangle_inequality(m, region, num_samples=1000, rng=None):
    '''
    Checks ``d(x, y) <= d(x, z) + d(z, y)`` and symmetry on randomly sampled
    triples of vertices of ``region``. The margin of a triple is
    ``d(x, z) + d(z, y) - d(x, y)``; exact arithmetic is required for the
    combinatorial metric, and a relative tolerance of 1e-12 otherwise.

    :rtype VerificationReport:
    '''
    if rng is None:
        rng = np.random.default_rng(5)
    vertices = region.vertices
    n = len(vertices)
    if n == 0:
        return VerificationReport("triangle")
    idx = rng.integers(0, n, size=(num_samples, 3))
    rel = 0.0 if m.kind == "combinatorial" else 1e-12
    locations, margins, slack, failures = [], [], [], []
    for i, k, j in idx:
        x, z, y = vertices[i], vertices[k], vertices[j]
        if m.distance(x, x) != 0:
            failures.append("d({}, {}) is not zero".format(x, x))
        dxy = m.distance(x, y)
        if dxy != m.distance(y, x):
            failures.append("d({}, {}) != d({}, {})".format(x, y, y, x))
        rhs = m.distance(x, z) + m.distance(z, y)
        locations.append((x, z, y))
        margins.append(rhs - dxy)
        slack.append(rel * max(abs(rhs), abs(dxy)))
    return VerificationReport("triangle", locations, margins, slack=slack,
                              failures=failures, params=m.describe())


def check_distance_laplacian(g, m, x0, region):
    '''
    Checks ``|Laplacian d(., x0)|(x) <= C0`` at every vertex of ``region``,
    where ``C0`` is the 1-intrinsic bound of ``m`` on the region. Margins are
    ``C0 - |Laplacian d(., x0)(x)|``.

    :rtype VerificationReport:
    '''
    _check_metric(g, m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c0 = intrinsic_bound(g, m, 1, region).value
    margins = [c0 - abs(distance_laplacian(g, m, x0, x)) for x in region.vertices]
    return VerificationReport("distance_laplacian", region.vertices, margins,
                              slack=1e-12 * (1 + c0), params={"C0": c0})
