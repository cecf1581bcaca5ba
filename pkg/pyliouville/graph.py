import collections
import math
import warnings

import attr
import numpy as np
import scipy.sparse

from .report import VerificationReport
from .util import canonical_order

FAMILY_KINDS = ("lattice", "regular_tree", "edge_list")


@attr.s(frozen=True)
class FamilyDescriptor(object):
    '''
    Describes a family of weighted graphs:

    - ``lattice`` of dimension ``dimension``: the integer lattice with unit
      edge weights and unit measure;
    - ``regular_tree`` with branching ``branching``: the infinite tree in which
      every vertex has ``branching`` neighbors, unit weights and measure;
    - ``edge_list``: a finite graph read from the file ``edges`` (and
      optionally the measure file ``measures``).
    '''
    kind = attr.ib(validator=attr.validators.in_(FAMILY_KINDS))
    dimension = attr.ib(default=None)
    branching = attr.ib(default=None)
    edges = attr.ib(default=None)
    measures = attr.ib(default=None)

    @classmethod
    def lattice(cls, dimension):
        return cls("lattice", dimension=dimension)

    @classmethod
    def regular_tree(cls, branching):
        return cls("regular_tree", branching=branching)

    @classmethod
    def edge_list(cls, edges, measures=None):
        return cls("edge_list", edges=edges, measures=measures)

    @classmethod
    def from_dict(cls, d):
        '''
        Builds a descriptor from a dictionary such as
        ``{"kind": "lattice", "dimension": 2}``.
        '''
        if isinstance(d, cls):
            return d
        if not isinstance(d, dict):
            raise ValueError("A graph family must be an object, got {!r}.".format(d))
        unknown = set(d) - {f.name for f in attr.fields(cls)}
        if len(unknown) > 0:
            raise ValueError("Unknown graph family keys: {}".format(sorted(unknown)))
        return cls(**d)


class Graph(object):
    '''
    A locally finite weighted graph (G, omega, mu), given by two oracles:
    :meth:`.neighbors` returns the neighbors of a vertex together with the
    (positive) edge weights, and :meth:`.measure` returns the vertex measure.
    Infinite graphs are never stored; finite pieces are produced by
    :func:`materialize`.

    Oracle calls are pure: repeated calls return identical results.

    :ivar FamilyDescriptor family: The family this graph belongs to.
    :ivar bool homogeneous: Whether every vertex looks the same (so that
        suprema over the graph are determined by a single vertex).
    '''
    homogeneous = False
    is_finite = False

    def __init__(self, family):
        self.family = family

    def is_vertex(self, x):
        raise NotImplementedError

    def _neighbors(self, x):
        raise NotImplementedError

    def neighbors(self, x):
        '''
        Returns the neighbors of ``x`` as a tuple of ``(y, omega(x, y))`` pairs,
        in canonical order of ``y``.

        :param x: A vertex.
        '''
        self.check_vertex(x)
        return self._neighbors(x)

    def measure(self, x):
        self.check_vertex(x)
        return 1.0

    def degree(self, x):
        '''
        Returns ``(deg, Deg)``: the sum of the edge weights at ``x``, and that
        sum divided by the measure of ``x``.
        '''
        deg = math.fsum(w for _, w in self.neighbors(x))
        return deg, deg / self.measure(x)

    def check_vertex(self, x):
        if not self.is_vertex(x):
            raise ValueError("{} is not a vertex of this {} graph.".format(
                             repr(x), self.family.kind))

    @property
    def origin(self):
        '''
        The default base point.
        '''
        raise NotImplementedError

    def format_vertex(self, x):
        '''
        Returns the token used for ``x`` in text files.
        '''
        return str(x)

    def parse_vertex(self, token):
        '''
        Inverse of :meth:`.format_vertex`.
        '''
        x = self._parse_vertex(token.strip())
        self.check_vertex(x)
        return x

    def _parse_vertex(self, token):
        return token


class Lattice(Graph):
    '''
    The integer lattice Z^d, with vertices the integer tuples of length ``d``,
    ``omega(x, y) = 1`` if ``x`` and ``y`` differ by one in a single coordinate,
    and ``mu = 1``.
    '''
    homogeneous = True

    def __init__(self, dimension):
        if (type(dimension) is not int) or dimension < 1:
            raise ValueError("Lattice dimension must be an integer, at least 1.")
        super(Lattice, self).__init__(FamilyDescriptor.lattice(dimension))
        self.dimension = dimension

    def is_vertex(self, x):
        return (isinstance(x, tuple) and len(x) == self.dimension
                and all(isinstance(a, (int, np.integer)) for a in x))

    def _neighbors(self, x):
        out = []
        for k in range(self.dimension):
            for step in (-1, 1):
                y = x[:k] + (x[k] + step,) + x[k + 1:]
                out.append((y, 1.0))
        return tuple(sorted(out))

    @property
    def origin(self):
        return (0,) * self.dimension

    def format_vertex(self, x):
        return ",".join(str(a) for a in x)

    def _parse_vertex(self, token):
        try:
            return tuple(int(a) for a in token.split(","))
        except ValueError:
            raise ValueError("'{}' is not a lattice vertex token.".format(token))


class RegularTree(Graph):
    '''
    The infinite tree in which every vertex has ``branching`` neighbors, with
    unit edge weights and measure. Vertices are words (tuples) describing the
    path from the root ``()``: the root has children ``0, ..., b-1`` and every
    other vertex has children ``0, ..., b-2``, so that every vertex other than
    the root has ``b - 1`` children and one parent.
    '''
    homogeneous = True

    def __init__(self, branching):
        if (type(branching) is not int) or branching < 2:
            raise ValueError("Tree branching must be an integer, at least 2.")
        super(RegularTree, self).__init__(FamilyDescriptor.regular_tree(branching))
        self.branching = branching

    def is_vertex(self, x):
        if not isinstance(x, tuple):
            return False
        for j, a in enumerate(x):
            limit = self.branching if j == 0 else self.branching - 1
            if not (isinstance(a, (int, np.integer)) and 0 <= a < limit):
                return False
        return True

    def _neighbors(self, x):
        out = []
        if len(x) > 0:
            out.append((x[:-1], 1.0))
        num_children = self.branching if len(x) == 0 else self.branching - 1
        for k in range(num_children):
            out.append((x + (k,), 1.0))
        return tuple(out)

    @property
    def origin(self):
        return ()

    def format_vertex(self, x):
        return ".".join(["r"] + [str(a) for a in x])

    def _parse_vertex(self, token):
        parts = token.split(".")
        if parts[0] != "r":
            raise ValueError("'{}' is not a tree vertex token.".format(token))
        try:
            return tuple(int(a) for a in parts[1:])
        except ValueError:
            raise ValueError("'{}' is not a tree vertex token.".format(token))


class EdgeListGraph(Graph):
    '''
    A finite weighted graph given by an explicit list of undirected edges.
    Each edge is listed once; the adjacency is mirrored internally, so the
    weights are symmetric by construction. Vertices are string tokens.
    '''
    is_finite = True

    def __init__(self, adjacency, measures, family=None):
        if family is None:
            family = FamilyDescriptor.edge_list(None)
        super(EdgeListGraph, self).__init__(family)
        self._adjacency = {x: tuple(sorted(nbrs.items())) for x, nbrs in adjacency.items()}
        self._measures = dict(measures)

    @classmethod
    def from_edges(cls, edges, measures=None, family=None):
        '''
        Builds the graph from an iterable of ``(x, y, w)`` triples, and an
        optional dictionary of vertex measures (unlisted vertices get 1).
        '''
        adjacency = collections.defaultdict(dict)
        for x, y, w in edges:
            _check_edge(x, y, w)
            if y in adjacency[x]:
                raise ValueError("Edge {} -- {} is listed more than once "
                                 "(asymmetric or duplicate edge).".format(x, y))
            adjacency[x][y] = float(w)
            adjacency[y][x] = float(w)
        mu = {x: 1.0 for x in adjacency}
        for x, m in (measures or {}).items():
            if x not in adjacency:
                raise ValueError("Measure given for {}, which is not in the edge list.".format(x))
            _check_measure(x, m)
            mu[x] = float(m)
        return cls(adjacency, mu, family=family)

    def is_vertex(self, x):
        return x in self._measures

    def _neighbors(self, x):
        return self._adjacency[x]

    def measure(self, x):
        self.check_vertex(x)
        return self._measures[x]

    def vertices(self):
        return canonical_order(self._measures)

    @property
    def origin(self):
        return self.vertices()[0]


def _check_edge(x, y, w):
    if x == y:
        raise ValueError("Loop at {}: loops are not allowed.".format(x))
    if not (math.isfinite(w) and w > 0):
        raise ValueError("Edge {} -- {} has weight {}; weights must be positive.".format(x, y, w))


def _check_measure(x, m):
    if not (math.isfinite(m) and m > 0):
        raise ValueError("Vertex {} has measure {}; measures must be positive.".format(x, m))


def _read_records(path, num_fields):
    '''
    Yields ``(line_number, line, tokens)`` for the non-comment, non-blank
    lines of a whitespace-separated text file.
    '''
    with open(path, "r", encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            stripped = line.strip()
            if len(stripped) == 0 or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) != num_fields:
                raise ValueError("{}, line {}: '{}': expected {} fields.".format(
                                 path, n, stripped, num_fields))
            yield n, stripped, tokens


def _read_number(path, n, line, token):
    try:
        return float(token)
    except ValueError:
        raise ValueError("{}, line {}: '{}': '{}' is not a number.".format(path, n, line, token))


def load_edge_list(edges, measures=None):
    '''
    Loads a graph from an edge-list file, with lines ``X Y W``, and an optional
    measure file, with lines ``X M``. Lines beginning with ``#`` are comments.
    Each undirected edge must be listed exactly once; vertices absent from the
    measure file get measure 1.

    :param str edges: The path to the edge-list file.
    :param str measures: The path to the measure file, or None.
    :rtype EdgeListGraph:
    '''
    adjacency = collections.defaultdict(dict)
    for n, line, (x, y, w) in _read_records(edges, 3):
        w = _read_number(edges, n, line, w)
        try:
            _check_edge(x, y, w)
        except ValueError as e:
            raise ValueError("{}, line {}: '{}': {}".format(edges, n, line, e))
        if y in adjacency[x]:
            raise ValueError("{}, line {}: '{}': edge listed more than once "
                             "(asymmetric or duplicate edge).".format(edges, n, line))
        adjacency[x][y] = w
        adjacency[y][x] = w
    mu = {x: 1.0 for x in adjacency}
    if measures is not None:
        for n, line, (x, m) in _read_records(measures, 2):
            m = _read_number(measures, n, line, m)
            if x not in adjacency:
                raise ValueError("{}, line {}: '{}': vertex not in the edge list.".format(
                                 measures, n, line))
            try:
                _check_measure(x, m)
            except ValueError as e:
                raise ValueError("{}, line {}: '{}': {}".format(measures, n, line, e))
            mu[x] = m
    return EdgeListGraph(adjacency, mu, family=FamilyDescriptor.edge_list(edges, measures))


def make_family(descriptor):
    '''
    Returns the graph described by ``descriptor``.

    :param descriptor: A :class:`FamilyDescriptor`, or a dictionary as
        accepted by :meth:`FamilyDescriptor.from_dict`.
    :rtype Graph:
    '''
    if isinstance(descriptor, dict):
        descriptor = FamilyDescriptor.from_dict(descriptor)
    if descriptor.kind == "lattice":
        return Lattice(descriptor.dimension)
    elif descriptor.kind == "regular_tree":
        return RegularTree(descriptor.branching)
    else:
        if descriptor.edges is None:
            raise ValueError("An edge_list family needs an edge file.")
        return load_edge_list(descriptor.edges, descriptor.measures)


def degree(g, x):
    '''
    Returns ``(deg, Deg)`` at ``x``; see :meth:`Graph.degree`.
    '''
    return g.degree(x)


@attr.s(frozen=True, eq=False)
class GraphRegion(object):
    '''
    A finite piece of a graph: a set of vertices, the edges between them
    (``adjacency``), the edges leaving the set (``halo``), and the measure.

    :ivar tuple vertices: The vertices, in canonical order.
    :ivar dict adjacency: Maps each vertex to a tuple of ``(y, w)`` pairs,
        for its neighbors ``y`` inside the region.
    :ivar dict halo: Maps each vertex to a tuple of ``(y, w)`` pairs, for its
        neighbors ``y`` outside the region.
    :ivar dict measure: Maps each vertex to its measure.
    :ivar seed: The vertex the region was grown from (used to check
        connectivity); defaults to the first vertex.
    '''
    vertices = attr.ib(converter=tuple)
    adjacency = attr.ib()
    halo = attr.ib()
    measure = attr.ib()
    seed = attr.ib(default=None)
    index = attr.ib(init=False, repr=False)

    @index.default
    def _index_default(self):
        return {x: j for j, x in enumerate(self.vertices)}

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __contains__(self, x):
        return x in self.index

    def internal_edges(self):
        '''
        Returns the unordered internal edges as ``(x, y, w)`` triples with ``x``
        before ``y`` in canonical order.
        '''
        out = []
        for x in self.vertices:
            i = self.index[x]
            for y, w in self.adjacency.get(x, ()):
                if self.index.get(y, -1) > i:
                    out.append((x, y, w))
        return out

    def halo_edges(self):
        '''
        Returns the edges leaving the region as ``(x, y, w)`` triples, with
        ``x`` inside and ``y`` outside.
        '''
        return [(x, y, w) for x in self.vertices for y, w in self.halo.get(x, ())]

    @property
    def num_internal_edges(self):
        return len(self.internal_edges())

    @property
    def num_halo_edges(self):
        return len(self.halo_edges())

    def measure_vector(self):
        return np.array([self.measure[x] for x in self.vertices])

    def weight_matrix(self):
        '''
        Returns the symmetric matrix of internal edge weights, indexed by
        position in ``vertices``, as a :class:`scipy.sparse.csr_matrix`.
        '''
        rows, cols, vals = [], [], []
        for x in self.vertices:
            for y, w in self.adjacency.get(x, ()):
                rows.append(self.index[x])
                cols.append(self.index[y])
                vals.append(w)
        n = len(self.vertices)
        return scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()

    def full_neighbors(self, x):
        '''
        All neighbors of ``x`` recorded in the region, internal and halo.
        '''
        return tuple(self.adjacency.get(x, ())) + tuple(self.halo.get(x, ()))

    def is_connected(self):
        '''
        Whether every vertex of the region can be reached from the seed using
        internal edges.
        '''
        if len(self.vertices) == 0:
            return True
        seed = self.vertices[0] if self.seed is None else self.seed
        seen = {seed}
        queue = collections.deque([seed])
        while queue:
            x = queue.popleft()
            for y, w in self.adjacency.get(x, ()):
                if w > 0 and y in self.index and y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == len(self.vertices)


def materialize(g, vertices, seed=None):
    '''
    Returns the :class:`GraphRegion` of ``g`` on the given finite set of
    vertices.

    :param Graph g: The graph.
    :param vertices: A finite iterable of distinct vertices.
    :param seed: The vertex the region is grown from, if any.
    :rtype GraphRegion:
    '''
    vertices = list(vertices)
    inside = set(vertices)
    if len(inside) != len(vertices):
        counts = collections.Counter(vertices)
        dups = canonical_order(x for x, c in counts.items() if c > 1)
        raise ValueError("Duplicate vertices: {}".format(list(dups)))
    adjacency, halo, measure = {}, {}, {}
    for x in canonical_order(inside):
        nbrs = g.neighbors(x)
        adjacency[x] = tuple((y, w) for y, w in nbrs if y in inside)
        halo[x] = tuple((y, w) for y, w in nbrs if y not in inside)
        measure[x] = g.measure(x)
    return GraphRegion(canonical_order(inside), adjacency, halo, measure, seed=seed)


def closed_neighborhood(g, vertices, steps=1):
    '''
    Returns the set of vertices within ``steps`` graph steps of ``vertices``
    (including ``vertices`` themselves).
    '''
    out = set(vertices)
    frontier = set(vertices)
    for _ in range(steps):
        new = set()
        for x in frontier:
            for y, w in g.neighbors(x):
                if w > 0 and y not in out:
                    new.add(y)
        out |= new
        frontier = new
    return out


def validate_region(r, require_connected=False):
    '''
    Checks the structural assumptions on a weighted graph within a region: no
    loops, positive measure, nonnegative and symmetric internal weights, finite
    weighted degree, and that halo edges are exactly those leaving the region.
    Violations are reported (not raised), each naming the offending vertex or
    edge; offending vertices get margin -1.

    Connectivity of the region (from its seed) is recorded in the details,
    and is a failure only if ``require_connected`` is True.

    :param GraphRegion r: The region.
    :rtype VerificationReport:
    '''
    bad = set()
    failures = []

    def fail(x, message):
        bad.add(x)
        failures.append(message)

    for x in r.vertices:
        mu = r.measure.get(x, None)
        if mu is None or not (mu > 0):
            fail(x, "measure at {} is {}, not positive".format(x, mu))
        total = 0.0
        for y, w in r.full_neighbors(x):
            total += w
            if y == x:
                fail(x, "loop at {}".format(x))
            if not w >= 0:
                fail(x, "negative weight on edge {} -- {}".format(x, y))
        if not math.isfinite(total):
            fail(x, "infinite weighted degree at {}".format(x))
        for y, w in r.adjacency.get(x, ()):
            if y not in r:
                fail(x, "internal edge {} -- {} leaves the region".format(x, y))
                continue
            back = [v for z, v in r.adjacency.get(y, ()) if z == x]
            if len(back) != 1 or back[0] != w:
                fail(x, "asymmetric weight: omega({}, {}) = {} but omega({}, {}) = {}".format(
                     x, y, w, y, x, back[0] if len(back) == 1 else None))
        for y, w in r.halo.get(x, ()):
            if y in r:
                fail(x, "halo edge {} -- {} does not leave the region".format(x, y))
    connected = r.is_connected()
    if not connected:
        if require_connected:
            failures.append("region is not connected from its seed")
        else:
            warnings.warn("Region is not connected from its seed.")
    margins = [-1.0 if x in bad else 0.0 for x in r.vertices]
    return VerificationReport(
            "region", r.vertices, margins, slack=0.0, failures=failures,
            details={"connected": connected,
                     "internal_edges": r.num_internal_edges,
                     "halo_edges": r.num_halo_edges})
