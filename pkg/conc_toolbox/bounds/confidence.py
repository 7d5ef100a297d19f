import math

from conc_toolbox.bounds.sub_gamma import (bernstein_moment, poisson_radius,
                                           subgamma_radius)
from conc_toolbox.utils.errors import ParameterDomainError, require

METHODS = ("hoeffding", "bernstein", "subgamma", "poisson", "bernstein_moment")


def confidence_radius(method, params, n, delta):
    """
    Half-width of a non-asymptotic confidence interval for a mean, holding with
    probability at least 1 - delta.

    Params:
        method -- One of METHODS.
        params -- hoeffding: c (range); bernstein: c, var; subgamma: v, c;
                  poisson: lam, w; bernstein_moment: v2, kappa.
        n -- Sample size (hoeffding and bernstein only).
        delta -- Failure probability in (0, 1).
    Returns:
        The radius.
    """
    require(0 < delta < 1, f"delta must lie in (0, 1), got {delta}")
    require(n >= 1, f"sample size must be >= 1, got {n}")
    log_term = math.log(2.0 / delta)
    if method == "hoeffding":
        return math.sqrt(2.0 * params["c"] ** 2 * log_term / n)
    if method == "bernstein":
        return params["c"] / (3.0 * n) * log_term + math.sqrt(2.0 * params["var"] * log_term / n)
    if method == "subgamma":
        return subgamma_radius(params["v"], params["c"], delta)
    if method == "poisson":
        return poisson_radius(params["lam"], params["w"], delta)
    if method == "bernstein_moment":
        _, condition = bernstein_moment(params["v2"], params["kappa"])
        return condition.radius(log_term)
    raise ParameterDomainError(f"unknown confidence method {method!r}, expected one of {METHODS}")
