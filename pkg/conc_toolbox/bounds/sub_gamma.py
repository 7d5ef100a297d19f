"""Sub-Gamma, Bernstein, exponential-family and Poisson sum bounds."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from conc_toolbox.utils.distributions import as_spec
from conc_toolbox.utils.errors import InfiniteNormError, NoSolutionError, require
from conc_toolbox.utils.numerics import minimize_on_log_grid
from conc_toolbox.utils.tail_norms import TailClassParams

logger = logging.getLogger(__name__)

# search cap for C_theta when the absolute central MGF is finite everywhere
DEFAULT_R_MAX = 20.0


def h(u):
    """1 + u - sqrt(1 + 2u), evaluated as u^2 / (1 + u + sqrt(1 + 2u))."""
    u = abs(u)
    return u * u / (1.0 + u + math.sqrt(1.0 + 2.0 * u))


def _subgamma_exponent(v, c, t):
    """(v / c^2) h(c t / v), with the c -> 0 limit t^2 / (2v)."""
    return t * t / (v + c * t + math.sqrt(v * v + 2.0 * c * v * t))


def _check(v, c):
    require(v > 0, f"sub-Gamma variance factor must be > 0, got {v}")
    require(c >= 0, f"sub-Gamma scale must be >= 0, got {c}")


@dataclass(frozen=True)
class SubGammaTail:
    exact: float
    relaxed: float

    def to_dict(self):
        return {"exact": self.exact, "relaxed": self.relaxed}


def subgamma_tail(v, c, t):
    """Two-sided tails 2 exp(-(v/c^2) h(ct/v)) and the relaxed 2 exp(-(t^2/2) / (v + ct))."""
    _check(v, c)
    t = abs(t)
    exact = min(1.0, 2.0 * math.exp(-_subgamma_exponent(v, c, t)))
    relaxed = min(1.0, 2.0 * math.exp(-0.5 * t * t / (v + c * t)))
    return SubGammaTail(exact, relaxed)


def subgamma_right_tail(v, c, t):
    """One-sided exp(-(v/c^2) h(ct/v)) for X - EX >= t."""
    _check(v, c)
    if t <= 0:
        return 1.0
    return min(1.0, math.exp(-_subgamma_exponent(v, c, t)))


def subgamma_radius(v, c, delta, two_sided=True):
    """
    sqrt(2 v x) + c x with x = log(2/delta) (two-sided) or log(1/delta);
    the exact tail equals delta there.
    """
    _check(v, c)
    require(0 < delta < 1, f"failure probability must lie in (0, 1), got {delta}")
    x = math.log((2.0 if two_sided else 1.0) / delta)
    return math.sqrt(2.0 * v * x) + c * x


def aggregate(params):
    """subGamma(sum v_i, max c_i) for a sum of independent sub-Gamma terms."""
    classes = [p if isinstance(p, TailClassParams) else TailClassParams.sub_gamma(*p) for p in params]
    require(len(classes) >= 1, "need at least one sub-Gamma term")
    classes = [p.as_sub_gamma() for p in classes]
    return TailClassParams.sub_gamma(sum(p["v"] for p in classes), max(p["c"] for p in classes))


def subgamma_sum(params, t):
    total = aggregate(params)
    return subgamma_tail(total["v"], total["c"], t)


def subgamma_moment(v, c, k):
    """k 2^(k-2) [2 (2v)^(k/2) Gamma(k/2) + c (2v)^((k-1)/2) Gamma((k+1)/2) + 3 c^k Gamma(k)]."""
    _check(v, c)
    require(int(k) == k and k >= 1, f"moment order must be an integer >= 1, got {k}")
    root = math.sqrt(2.0 * v)
    return k * 2.0 ** (k - 2) * (
        2.0 * root ** k * math.gamma(k / 2.0)
        + c * root ** (k - 1) * math.gamma((k + 1) / 2.0)
        + 3.0 * c ** k * math.gamma(k)
    )


def subgamma_even_moment(v, c, k):
    """E X^(2k) <= k! (8v)^k + (2k)! (4c)^(2k)."""
    _check(v, c)
    require(int(k) == k and k >= 1, f"moment order must be an integer >= 1, got {k}")
    return math.factorial(int(k)) * (8.0 * v) ** k + math.factorial(2 * int(k)) * (4.0 * c) ** (2 * k)


def subgamma_converse(v, c):
    """A radius-form tail with (v, c) implies subGamma(32 (v + 2c^2), 8c)."""
    _check(v, c)
    return TailClassParams.sub_gamma(32.0 * (v + 2.0 * c ** 2), 8.0 * c)


def bernstein_bounded(variances, M, t):
    """2 exp(-(t^2/2) / (sum Var X_i + M t / 3)) for centered terms with |X_i| <= M."""
    variances = np.asarray(variances, dtype=float)
    require(np.all(variances >= 0), "variances must be >= 0")
    require(M > 0, f"M must be > 0, got {M}")
    denominator = float(np.sum(variances)) + M * abs(t) / 3.0
    if denominator == 0:
        return 0.0 if t else 1.0
    return min(1.0, 2.0 * math.exp(-0.5 * t * t / denominator))


@dataclass(frozen=True)
class BernsteinMoment:
    nu2: float
    kappa: float

    def tail(self, t):
        """2 exp(-t^2 / (2 nu^2 + 2 kappa t))."""
        t = abs(t)
        return min(1.0, 2.0 * math.exp(-t * t / (2.0 * self.nu2 + 2.0 * self.kappa * t)))

    def radius(self, x):
        """sqrt(2 nu^2 x) + kappa x, exceeded with probability at most 2 e^(-x)."""
        require(x >= 0, f"x must be >= 0, got {x}")
        return math.sqrt(2.0 * self.nu2 * x) + self.kappa * x


def bernstein_moment(v2, kappa, t=None):
    """
    Sum of independent centered terms with E|X_i|^k <= v_i^2 kappa_i^(k-2) k! / 2.

    Returns (tail probability at t, the BernsteinMoment with nu^2 = sum v_i^2
    and kappa = max kappa_i); the probability is None when t is omitted.
    """
    v2 = np.atleast_1d(np.asarray(v2, dtype=float))
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    require(v2.shape == kappa.shape, "v2 and kappa must have the same length")
    require(np.all(v2 > 0) and np.all(kappa > 0), "v2 and kappa must be > 0")
    condition = BernsteinMoment(float(np.sum(v2)), float(np.max(kappa)))
    return (None if t is None else condition.tail(t)), condition


def bernstein_moment_gaussian(sigma):
    """(v^2, kappa) = (2 sigma^2, sigma^2) for N(0, sigma^2)."""
    require(sigma > 0, f"sigma must be > 0, got {sigma}")
    return 2.0 * sigma ** 2, sigma ** 2


def ef_ctheta(spec, r_max=None, precision=None):
    """
    C_theta = inf over 0 < r <= r_max of E exp(r |X - EX|) / r.

    r_max defaults to the edge of the absolute central MGF domain.
    """
    spec = as_spec(spec)
    if r_max is None:
        critical = spec.critical_rate if spec.tail_index == 1 else math.inf
        if spec.tail_index < 1:
            raise InfiniteNormError(f"{spec!r}: E exp(r|X - EX|) diverges for every r > 0")
        r_max = critical * (1.0 - 1e-9) if math.isfinite(critical) else DEFAULT_R_MAX
    require(r_max > 0, f"r_max must be > 0, got {r_max}")

    def objective(r):
        return spec.abs_central_mgf(r, precision) / r

    try:
        r_best, value = minimize_on_log_grid(objective, r_max * 1e-6, r_max)
    except NoSolutionError:
        raise InfiniteNormError(f"{spec!r}: E exp(r|X - EX|) diverges on (0, {r_max}]")
    logger.debug("C_theta of %r attained at r=%g", spec, r_best)
    return value


def ef_bernstein(specs, w, t, precision=None):
    """2 exp(-t^2 / (4 w^2 sum C_i + 2 w max C_i t)), w = max |w_i|."""
    specs = [as_spec(s) for s in specs]
    w = np.asarray(w, dtype=float)
    require(len(specs) == len(w) and len(specs) >= 1, "specs and weights must have equal, non-zero length")
    w_max = float(np.max(np.abs(w)))
    require(w_max > 0, "weight vector must be non-zero")
    constants = _ctheta_all(specs, precision)
    return ef_bernstein_from_constants(constants, w_max, t)


def _ctheta_all(specs, precision):
    cache = {}
    for spec in specs:
        if spec not in cache:
            cache[spec] = ef_ctheta(spec, precision=precision)
    return [cache[spec] for spec in specs]


def ef_bernstein_from_constants(constants, w_max, t):
    constants = np.asarray(constants, dtype=float)
    t = abs(t)
    denominator = 4.0 * w_max ** 2 * float(np.sum(constants)) + 2.0 * w_max * float(np.max(constants)) * t
    return min(1.0, 2.0 * math.exp(-t * t / denominator))


def _poisson_scales(lam, w):
    lam = np.asarray(lam, dtype=float)
    require(lam.size >= 1 and np.all(lam > 0), "Poisson rates must be > 0")
    w = np.broadcast_to(np.asarray(w, dtype=float), lam.shape)
    w_max = float(np.max(np.abs(w)))
    require(w_max > 0, "weight vector must be non-zero")
    return float(np.sum(lam)), w_max


def poisson_sum(lam, w, t):
    """2 exp(-(t^2/2) / (w^2 sum lam_i + w t / 3)), w = max |w_i|."""
    total, w_max = _poisson_scales(lam, w)
    t = abs(t)
    return min(1.0, 2.0 * math.exp(-0.5 * t * t / (w_max ** 2 * total + w_max * t / 3.0)))


def poisson_radius(lam, w, delta):
    """w [(2 x sum lam_i)^(1/2) + x / 3] with x = log(2 / delta)."""
    total, w_max = _poisson_scales(lam, w)
    return subgamma_radius(w_max ** 2 * total, w_max / 3.0, delta)


def poisson_class(lam, w):
    """The weighted centered Poisson sum as subGamma(w^2 sum lam_i, w / 3)."""
    total, w_max = _poisson_scales(lam, w)
    return TailClassParams.sub_gamma(w_max ** 2 * total, w_max / 3.0)
