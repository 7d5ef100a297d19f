"""Bounds from moment and MGF inequalities, bounded differences and Lipschitz functions."""
import math

import numpy as np
from scipy.stats import norm

from conc_toolbox.utils.errors import MGFDomainError, NoSolutionError, require
from conc_toolbox.utils.numerics import minimize_on_log_grid


def _clamp(p):
    return min(1.0, p)


def markov(expected_phi, phi_at_a):
    """P(X >= a) <= E phi(X) / phi(a) for non-decreasing positive phi."""
    require(phi_at_a > 0, f"phi(a) must be > 0, got {phi_at_a}")
    require(expected_phi >= 0, f"E phi(X) must be >= 0, got {expected_phi}")
    return _clamp(expected_phi / phi_at_a)


def chebyshev(variance, a):
    require(a > 0, f"a must be > 0, got {a}")
    require(variance >= 0, f"variance must be >= 0, got {variance}")
    return _clamp(variance / a ** 2)


def chernoff(mgf, a, s_max=math.inf, n_grid=None):
    """
    inf over 0 < s < s_max of exp(-s a) E exp(sX), the right-tail Chernoff bound.

    ``mgf`` is an evaluator s -> E exp(sX); it may raise MGFDomainError outside
    its domain.
    """
    require(s_max > 0, "MGF domain must contain some s > 0")
    if a <= 0:
        return 1.0

    def log_objective(s):
        try:
            value = mgf(s)
        except MGFDomainError:
            return math.inf
        if not value > 0:
            return math.inf
        return math.log(value) - s * a

    hi = s_max * (1.0 - 1e-9) if math.isfinite(s_max) else 1e4
    lo = hi * 1e-10
    try:
        _, best = minimize_on_log_grid(log_objective, lo, hi, n_grid)
    except NoSolutionError:
        raise MGFDomainError("MGF is infinite on its whole search interval")
    return _clamp(math.exp(min(best, 0.0)))


def hoeffding(intervals, t):
    """Two-sided Hoeffding bound for a sum of independent variables in [a_i, b_i]."""
    intervals = np.asarray(intervals, dtype=float).reshape(-1, 2)
    widths = intervals[:, 1] - intervals[:, 0]
    require(np.all(widths > 0), "every interval needs b_i > a_i")
    return _clamp(2.0 * math.exp(-2.0 * t ** 2 / float(np.sum(widths ** 2))))


def hoeffding_lemma_mgf(intervals, u):
    """exp(u^2/8 sum (b_i - a_i)^2), the MGF envelope of the centered sum."""
    intervals = np.asarray(intervals, dtype=float).reshape(-1, 2)
    return math.exp(u ** 2 / 8.0 * float(np.sum((intervals[:, 1] - intervals[:, 0]) ** 2)))


def mcdiarmid(c, t):
    """Bounded-difference inequality with difference constants c_k."""
    c = np.asarray(c, dtype=float)
    require(np.all(c >= 0) and np.any(c > 0), "difference constants must be >= 0, not all zero")
    return _clamp(2.0 * math.exp(-2.0 * t ** 2 / float(np.sum(c ** 2))))


def azuma(lower, upper, t):
    """Azuma-Hoeffding for martingale increments in [lower_k, upper_k]."""
    return mcdiarmid(np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float), t)


def mills(x):
    """Lower and upper bounds on P(X >= x) for a standard normal X."""
    require(x > 0, f"Mills bounds need x > 0, got {x}")
    density = norm.pdf(x)
    return x / (x ** 2 + 1.0) * density, density / x


def mills_sharp(x):
    """P(|X| >= x) <= exp(-x^2/2) for a standard normal X."""
    require(x >= 0, f"x must be >= 0, got {x}")
    return _clamp(math.exp(-0.5 * x ** 2))


def dkw(n, eps):
    """P(sup |F_n - F| > eps) <= 2 exp(-2 n eps^2)."""
    require(n >= 1, f"sample size must be >= 1, got {n}")
    return _clamp(2.0 * math.exp(-2.0 * n * eps ** 2))


def lipschitz_gaussian(L, t):
    require(L > 0, f"Lipschitz constant must be > 0, got {L}")
    return _clamp(2.0 * math.exp(-(t ** 2) / (2.0 * L ** 2)))


def lipschitz_logconcave(gamma, L, t):
    """Right tail for an L-Lipschitz function of a gamma-strongly log-concave vector."""
    require(gamma > 0 and L > 0, "need gamma > 0 and L > 0")
    return _clamp(math.exp(-gamma * t ** 2 / (4.0 * L ** 2)))


def lipschitz_sepconvex(L, a, b, t):
    """Right tail for a separately convex L-Lipschitz function of independent variables in [a, b]."""
    require(L > 0 and b > a, "need L > 0 and b > a")
    return _clamp(math.exp(-(t ** 2) / (4.0 * L ** 2 * (b - a) ** 2)))
