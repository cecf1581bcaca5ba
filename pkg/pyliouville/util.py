import zlib

import numpy as np
import scipy.optimize


def canonical_order(vertices):
    '''
    Returns the vertices as a tuple in canonical (lexicographic) order, so that
    iteration, and hence floating-point summation, is reproducible.
    '''
    return tuple(sorted(vertices))


def pairwise_sum(terms):
    '''
    Sums ``terms`` in the order given. Uses numpy's pairwise summation, so the
    rounding error grows like log(n) rather than n for long sums.
    '''
    x = np.asarray(terms, dtype="float64")
    if x.size == 0:
        return 0.0
    return float(np.sum(x))


def increasing_root(func, target, lower=0.0, upper=1.0):
    '''
    Returns the unique ``t > lower`` with ``func(t) == target``, for ``func``
    strictly increasing with ``func(lower) < target``. The upper end of the
    bracket is doubled until it encloses the root, and bisection then runs to
    the limit of double precision.
    '''
    if not func(lower) < target:
        raise ValueError("func(lower) must be below the target.")
    while func(upper) < target:
        upper *= 2
        if not np.isfinite(upper):
            raise ValueError("Could not bracket the root.")
    return scipy.optimize.bisect(
            lambda t: func(t) - target, lower, upper,
            xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def vertex_seed(seed, token):
    '''
    A 32-bit integer determined by ``seed`` and the string ``token``, used to
    seed per-vertex random streams so that random vertex functions are pure.
    '''
    return zlib.crc32("{}:{}".format(seed, token).encode("utf-8"))


def format_float(x):
    '''
    Formats ``x`` with 17 significant digits, enough to read back exactly.
    '''
    return format(float(x), ".17g")
