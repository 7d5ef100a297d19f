import logging
import math

import numpy as np
from mpmath import mp
from scipy.optimize import bisect, minimize_scalar

from conc_toolbox.global_vars import tolerances
from conc_toolbox.utils.errors import NoSolutionError, ParameterDomainError

logger = logging.getLogger(__name__)

_HUGE = 1e300


def _finite_or_huge(f, sign=1.0):
    """Wrap f so that divergence maps to a huge value of the given sign."""

    def wrapped(x):
        try:
            value = float(f(x))
        except (ValueError, OverflowError, ZeroDivisionError):
            return sign * _HUGE
        if not math.isfinite(value):
            return sign * _HUGE
        return value

    return wrapped


def solve_increasing(f, target, x0=1.0, rtol=None, max_doublings=None):
    """
    Solve f(x) = target on (0, inf) for a non-decreasing f.

    The bracket is grown geometrically from x0 in both directions; evaluations
    that diverge count as +inf. Raises NoSolutionError when no sign change is
    found within max_doublings steps.
    """
    rtol = tolerances.bisection_rtol if rtol is None else rtol
    max_doublings = tolerances.bracket_doublings if max_doublings is None else max_doublings
    g = _finite_or_huge(lambda x: f(x) - target)
    lo = hi = float(x0)
    g_lo = g_hi = g(lo)
    if g_lo == 0.0:
        return lo
    for _ in range(max_doublings):
        if g_hi > 0:
            break
        hi *= 2.0
        g_hi = g(hi)
    else:
        raise NoSolutionError(f"no upper bracket after {max_doublings} doublings")
    if g_lo > 0:
        lo = hi
        for _ in range(4 * max_doublings):
            lo /= 2.0
            g_lo = g(lo)
            if g_lo <= 0:
                break
        else:
            return lo
    if g_lo == 0.0:
        return lo
    logger.debug("bisection bracket [%g, %g]", lo, hi)
    return bisect(g, lo, hi, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=2000)


def solve_decreasing(f, target, x0=1.0, rtol=None, max_doublings=None):
    """Solve f(x) = target on (0, inf) for a non-increasing f (divergence counts as +inf)."""
    rtol = tolerances.bisection_rtol if rtol is None else rtol
    max_doublings = tolerances.bracket_doublings if max_doublings is None else max_doublings
    g = _finite_or_huge(lambda x: f(x) - target)
    lo = hi = float(x0)
    g_hi = g(hi)
    for _ in range(max_doublings):
        if g_hi <= 0:
            break
        hi *= 2.0
        g_hi = g(hi)
    else:
        raise NoSolutionError(f"f stays above {target} after {max_doublings} doublings")
    if g_hi == 0.0:
        return hi
    lo = hi
    g_lo = g_hi
    for _ in range(4 * max_doublings):
        lo /= 2.0
        g_lo = g(lo)
        if g_lo > 0:
            break
    else:
        return lo
    logger.debug("bisection bracket [%g, %g]", lo, hi)
    return bisect(g, lo, hi, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=2000)


def minimize_on_log_grid(fun, lo, hi, n_grid=None, xtol=None):
    """
    Minimize fun over [lo, hi] (0 < lo < hi < inf).

    A log-spaced grid brackets the minimum, then a golden-section search on
    log x refines it. Non-finite evaluations are treated as +inf.

    Returns (x_min, f_min).
    """
    if not 0 < lo < hi < math.inf:
        raise ParameterDomainError(f"invalid search interval [{lo}, {hi}]")
    n_grid = tolerances.chernoff_grid if n_grid is None else n_grid
    xtol = tolerances.golden_xtol if xtol is None else xtol
    g = _finite_or_huge(lambda u: fun(math.exp(u)))
    grid = np.linspace(math.log(lo), math.log(hi), n_grid)
    values = np.array([g(u) for u in grid])
    i = int(np.argmin(values))
    if values[i] >= _HUGE:
        raise NoSolutionError("objective is infinite on the whole search interval")
    if 0 < i < n_grid - 1 and values[i] < min(values[i - 1], values[i + 1]):
        res = minimize_scalar(
            g, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=xtol
        )
    else:
        j, k = max(i - 1, 0), min(i + 1, n_grid - 1)
        res = minimize_scalar(
            g, bounds=(grid[j], grid[k]), method="bounded", options={"xatol": xtol}
        )
    if res.fun <= values[i]:
        return math.exp(res.x), float(res.fun)
    return math.exp(grid[i]), float(values[i])


def invert_sqrt_linear(c0, a, b, t):
    """
    Smallest x >= 0 with c0 + a*sqrt(x) + b*x >= t (a, b >= 0, not both 0).
    Returns 0 when t <= c0.
    """
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise ParameterDomainError("sqrt-linear map must be strictly increasing")
    excess = t - c0
    if excess <= 0:
        return 0.0
    if b == 0:
        return (excess / a) ** 2
    # stable root of b*u^2 + a*u - excess = 0
    u = 2.0 * excess / (a + math.sqrt(a * a + 4.0 * b * excess))
    return u * u


def series_sum(term, start, step=1, precision=None, max_terms=100000):
    """
    Sum term(start) + term(start + step) + ... for an eventually log-concave sequence.

    Summation stops once the consecutive-term ratio rho is below one and the
    geometric remainder term(k + step) / (1 - rho) is below precision.
    """
    precision = tolerances.series_precision if precision is None else precision
    total = 0.0
    seen_mass = False
    k = start
    current = term(k)
    for _ in range(max_terms):
        total += current
        nxt = term(k + step)
        if current > 0:
            seen_mass = True
            rho = nxt / current
            if rho < 1 and nxt / (1.0 - rho) < precision:
                return total + nxt
        elif seen_mass and nxt == 0:
            return total
        k += step
        current = nxt
    logger.warning("series truncated after %d terms without meeting precision", max_terms)
    return total


def quad(f, points):
    """High-precision integral of f over consecutive breakpoints (may include +-inf)."""
    with mp.workdps(tolerances.quad_dps):
        value = mp.quad(lambda x: f(x), [_mp_point(p) for p in points])
    return float(value)


def _mp_point(p):
    if math.isinf(p):
        return mp.inf if p > 0 else -mp.inf
    return mp.mpf(p)
