import csv
import json
import math

import attr
import numpy as np
import scipy.special

from .metric import ball
from .util import canonical_order, format_float, pairwise_sum

# A fitted tail slope below this counts as no exponential growth.
BOUNDED_SLOPE = 1e-6

GROWTH_VERDICTS = ("bounded", "exponential", "super-exponential")


@attr.s(frozen=True)
class WeightFamily(object):
    '''
    The exponential weight ``phi(x) = exp(-gamma d(x, x0))``.

    :ivar PseudoMetric metric: The metric ``d``.
    :ivar x0: The base point.
    :ivar float gamma: The (positive) rate.
    '''
    metric = attr.ib()
    x0 = attr.ib()
    gamma = attr.ib(converter=float)

    @gamma.validator
    def _check_gamma(self, attribute, value):
        if not value > 0:
            raise ValueError("The weight rate gamma must be positive, got {}.".format(value))

    @property
    def graph(self):
        return self.metric.graph


def weight_value(w, x):
    '''
    Returns ``exp(-gamma d(x, x0))``, a number in (0, 1].
    '''
    return math.exp(-w.gamma * w.metric.distance(x, w.x0))


def truncated_lp_norm(u, p, w, R):
    '''
    Returns the sum over the ball ``B_R(x0)`` of ``|u(x)|^p phi(x) mu(x)``,
    that is, the p-th power of the weighted norm of ``u`` restricted to the
    ball.

    :param GraphFunction u: The function.
    :param float p: The exponent, at least 1.
    :param WeightFamily w: The weight.
    :param float R: The radius.
    :rtype float:
    '''
    if not p >= 1:
        raise ValueError("The exponent p must be at least 1, got {}.".format(p))
    g = w.graph
    terms = []
    for x in canonical_order(ball(g, w.metric, w.x0, R)):
        ux = u(x)
        if ux != 0:
            terms.append(abs(ux) ** p * weight_value(w, x) * g.measure(x))
    return pairwise_sum(terms)


@attr.s(eq=False)
class GrowthEstimate(object):
    '''
    Partial sums of a (possibly weighted) ``p``-th power of a function over
    an increasing sequence of balls, with the exponential rate fitted to
    their logarithms.

    :ivar numpy.ndarray radii: The radii, increasing.
    :ivar numpy.ndarray log_partial_sums: The natural logarithms of the
        partial sums (``-inf`` for a zero sum).
    :ivar float beta_hat: The least-squares slope of the log partial sums
        against the radius, over the last half of the radii.
    :ivar float residual: The root mean square residual of that fit.
    :ivar str verdict: "bounded", "exponential" or "super-exponential".
    :ivar float overflow_radius: For "super-exponential", the first radius
        whose ball contains a value that is not finite.
    '''
    radii = attr.ib(converter=lambda x: np.array(x, dtype="float64"))
    log_partial_sums = attr.ib(converter=lambda x: np.array(x, dtype="float64"))
    beta_hat = attr.ib()
    residual = attr.ib()
    verdict = attr.ib(validator=attr.validators.in_(GROWTH_VERDICTS))
    overflow_radius = attr.ib(default=None)
    params = attr.ib(factory=dict)

    @property
    def partial_sums(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_partial_sums)

    def summary(self):
        out = {
            "beta_hat": self.beta_hat,
            "residual": self.residual,
            "verdict": self.verdict,
        }
        if self.overflow_radius is not None:
            out["overflow_radius"] = self.overflow_radius
        out.update(self.params)
        return out

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["R", "partial_sum", "log_partial_sum"])
            for R, s, ls in zip(self.radii, self.partial_sums, self.log_partial_sums):
                writer.writerow([format_float(R), format_float(s), format_float(ls)])

    def write_json(self, path):
        summary = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                   for k, v in self.summary().items()}
        with open(path, "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=2, sort_keys=True)


def _check_radii(radii, min_length):
    radii = np.array(radii, dtype="float64")
    if len(radii) < min_length:
        raise ValueError("Need at least {} radii, got {}.".format(min_length, len(radii)))
    if np.any(np.diff(radii) <= 0):
        raise ValueError("Radii must be strictly increasing.")
    if not (np.all(np.isfinite(radii)) and radii[0] >= 0):
        raise ValueError("Radii must be finite and nonnegative.")
    return radii


def _log_terms(u, p, m, x0, R, gamma):
    # Returns the distances and the logarithms of |u|^p phi mu on the ball,
    # and whether any value of u was not finite.
    g = m.graph
    dist = m.distances_within(x0, R)
    xs = canonical_order(dist)
    d = np.array([dist[x] for x in xs], dtype="float64")
    vals = np.array([u(x) for x in xs], dtype="float64")
    mu = np.array([g.measure(x) for x in xs], dtype="float64")
    finite = np.isfinite(vals)
    with np.errstate(divide="ignore"):
        logs = p * np.log(np.abs(vals)) + np.log(mu) - gamma * d
    return d, logs, finite


def _fit_tail(radii, logs):
    half = len(radii) // 2
    r, y = radii[half:], logs[half:]
    keep = np.isfinite(y)
    if np.sum(keep) < 2:
        return 0.0, 0.0
    r, y = r[keep], y[keep]
    slope, intercept = np.polyfit(r, y, 1)
    fitted = slope * r + intercept
    residual = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return float(slope), residual


def _estimate(u, p, m, x0, radii, gamma):
    if not p >= 1:
        raise ValueError("The exponent p must be at least 1, got {}.".format(p))
    radii = _check_radii(radii, 3)
    d, logs, finite = _log_terms(u, p, m, x0, radii[-1], gamma)
    log_sums = np.full(len(radii), -np.inf)
    overflow = None
    for j, R in enumerate(radii):
        inside = d < R
        if not np.all(finite[inside]):
            overflow = float(R)
            log_sums[j:] = np.inf
            break
        if np.any(inside):
            # finite even where |u|^p itself overflows
            log_sums[j] = scipy.special.logsumexp(logs[inside])
    params = {"p": p, "gamma": gamma}
    if overflow is not None:
        return GrowthEstimate(radii, log_sums, np.inf, np.inf, "super-exponential",
                              overflow_radius=overflow, params=params)
    beta_hat, residual = _fit_tail(radii, log_sums)
    verdict = "bounded" if beta_hat < BOUNDED_SLOPE else "exponential"
    return GrowthEstimate(radii, log_sums, beta_hat, residual, verdict, params=params)


def growth_estimate(u, p, x0, m, radii):
    '''
    Computes the partial sums ``S(R)`` of ``|u|^p mu`` over the balls
    ``B_R(x0)`` for each ``R`` in ``radii``, and fits the exponential rate
    ``beta_hat`` of ``S`` by least squares on ``log S`` over the last half
    of the radii. The verdict is "bounded" if ``beta_hat`` is below 1e-6,
    "exponential" otherwise, and "super-exponential" if some value of ``u``
    is not finite (in which case the rate is infinite).

    Sums are accumulated in log space, so exponentially large ``u`` is fine.

    :param GraphFunction u: The function.
    :param float p: The exponent, at least 1.
    :param x0: The center of the balls.
    :param PseudoMetric m: The metric.
    :param radii: At least three strictly increasing radii.
    :rtype GrowthEstimate:
    '''
    return _estimate(u, p, m, x0, radii, 0.0)


def membership_estimate(u, p, w, radii):
    '''
    As :func:`growth_estimate`, but for the weighted sums
    ``sum_{B_R} |u|^p phi mu`` of the weight ``w``. A "bounded" verdict is
    finite evidence that ``u`` belongs to the weighted space.

    :rtype GrowthEstimate:
    '''
    return _estimate(u, p, w.metric, w.x0, radii, w.gamma)


@attr.s(frozen=True)
class SummabilityCheck(object):
    '''
    Partial sums of the weight over balls, with the ratios of successive
    increments and an estimate of the full sum.
    '''
    radii = attr.ib()
    partial_sums = attr.ib()
    ratios = attr.ib()
    verdict = attr.ib()
    total_estimate = attr.ib()

    @property
    def summable(self):
        return self.verdict == "summable"


def summable_weight_check(w, radii, window=5):
    '''
    Computes the sums of ``phi mu`` over the balls ``B_R(x0)`` along
    ``radii``. The verdict is "summable" if the ratio of successive
    increments stays below 1 over the last ``window`` radii (a zero increment
    following a zero increment counts as below 1), "not summable" if it stays
    at or above 1, and "inconclusive" otherwise. For "summable" the full sum
    is estimated by adding the geometric tail to the last partial sum.

    :rtype SummabilityCheck:
    '''
    radii = _check_radii(radii, window + 2)
    g = w.graph
    dist = w.metric.distances_within(w.x0, radii[-1])
    xs = canonical_order(dist)
    d = np.array([dist[x] for x in xs], dtype="float64")
    terms = np.array([math.exp(-w.gamma * dist[x]) * g.measure(x) for x in xs])
    sums = np.array([pairwise_sum(terms[d < R]) for R in radii])
    increments = np.diff(sums)
    ratios = np.empty(len(increments) - 1)
    for j in range(len(ratios)):
        a, b = increments[j], increments[j + 1]
        if a == 0:
            ratios[j] = 0.0 if b == 0 else np.inf
        else:
            ratios[j] = b / a
    tail = ratios[-window:]
    total = None
    if np.all(tail < 1):
        verdict = "summable"
        r = tail[-1]
        total = float(sums[-1] + increments[-1] * r / (1 - r))
    elif np.all(tail >= 1):
        verdict = "not summable"
    else:
        verdict = "inconclusive"
    return SummabilityCheck(radii, sums, ratios, verdict, total)
