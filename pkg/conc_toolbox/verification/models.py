"""
Canonical generative models: each descriptor names a statistic and the law
it is built from, and ``simulate`` draws one block of replications of it.

Descriptors are plain dicts so that they can live in catalog.json:

    {"statistic": "sum", "law": {"family": "bernoulli", "params": {"p": 0.5}},
     "n": 50, "weights": 0.02, "center": "mean"}
"""
import math

import numpy as np
from scipy.special import gammaln

from conc_toolbox.utils.distributions import spec_from_dict
from conc_toolbox.utils.errors import IncompatibleExperimentError, require

STATISTICS = ("sum", "u_statistic", "norm", "max", "sup_edf", "quadratic", "norm_squared")

# statistics that take negative values, so a two-sided bound tests |S|
SIGNED = ("sum", "u_statistic", "norm", "max", "quadratic")


def _law(descriptor):
    return spec_from_dict(descriptor["law"])


def _weights(descriptor, n):
    return weight_vector(descriptor.get("weights", 1.0), n)


def weight_vector(weights, n):
    """A scalar, an explicit list or {"kind": "linspace", "low", "high"} as n weights."""
    if isinstance(weights, dict):
        kind = weights.get("kind")
        require(kind == "linspace", f"unknown weight generator {kind!r}")
        return np.linspace(weights["low"], weights["high"], n)
    return np.broadcast_to(np.asarray(weights, dtype=float), (n,)).copy()


def chi_mean(n, sigma=1.0):
    """E ||X||_2 for X ~ N(0, sigma^2 I_n)."""
    return sigma * math.sqrt(2.0) * math.exp(gammaln((n + 1) / 2.0) - gammaln(n / 2.0))


def _center(descriptor, law, weights=None):
    center = descriptor.get("center", 0.0)
    n = descriptor.get("n")
    if isinstance(center, (int, float)):
        return float(center)
    if center == "mean":
        return float(np.sum(weights)) * law.mean()
    if center == "chi_mean":
        return chi_mean(n, law.sigma)
    if center == "uniform_max_mean":
        return law.a + (law.b - law.a) * n / (n + 1.0)
    raise IncompatibleExperimentError(f"unknown centering {center!r}")


def _sum(descriptor, generator, size):
    law = _law(descriptor)
    n = int(descriptor["n"])
    weights = _weights(descriptor, n)
    draws = law.sample((size, n), generator)
    random = descriptor.get("random_weights")
    if random is not None:
        envelope = weights
        weights = generator.uniform(-1.0, 1.0, size=(size, n)) * envelope
        centered = draws - law.mean() if descriptor.get("center") == "mean" else draws
        return np.sum(weights * centered, axis=1)
    return draws @ weights - _center(descriptor, law, weights)


def _u_statistic(descriptor, generator, size):
    """Mean of |X_i - X_j| over pairs i < j."""
    law = _law(descriptor)
    n = int(descriptor["n"])
    require(descriptor.get("kernel", "abs_diff") == "abs_diff", "only the abs_diff kernel is supported")
    draws = np.sort(law.sample((size, n), generator), axis=1)
    coefficients = 2.0 * np.arange(1, n + 1) - n - 1.0
    pair_sum = draws @ coefficients
    return pair_sum / (n * (n - 1) / 2.0) - _center(descriptor, law)


def _norm(descriptor, generator, size):
    law = _law(descriptor)
    n = int(descriptor["n"])
    draws = law.sample((size, n), generator)
    return np.linalg.norm(draws, axis=1) - _center(descriptor, law)


def _max(descriptor, generator, size):
    law = _law(descriptor)
    n = int(descriptor["n"])
    draws = law.sample((size, n), generator)
    if descriptor.get("absolute", False):
        draws = np.abs(draws)
    return draws.max(axis=1) - _center(descriptor, law)


def _sup_edf(descriptor, generator, size):
    """sup_x |F_n(x) - x| for n uniform(0, 1) draws."""
    n = int(descriptor["n"])
    u = np.sort(generator.random((size, n)), axis=1)
    k = np.arange(1, n + 1)
    upper = np.max(k / n - u, axis=1)
    lower = np.max(u - (k - 1) / n, axis=1)
    return np.maximum(upper, lower)


def _matrix(descriptor):
    return build_matrix(descriptor["matrix"])


def build_matrix(matrix):
    """An explicit nested list or a generator dict such as {"kind": "identity", "n": 5}."""
    if isinstance(matrix, dict):
        kind = matrix.get("kind")
        n = int(matrix["n"])
        if kind == "identity":
            return np.eye(n)
        if kind == "off_diagonal_ones":
            return np.ones((n, n)) - np.eye(n)
        if kind == "scaled_identity":
            return matrix.get("scale", 1.0) * np.eye(n)
        if kind == "coordinate_projection":
            return np.eye(n)[: int(matrix["rank"])]
        raise IncompatibleExperimentError(f"unknown matrix generator {kind!r}")
    return np.asarray(matrix, dtype=float)


def _quadratic(descriptor, generator, size):
    """xi^T A xi - E xi^T A xi for independent centered coordinates."""
    law = _law(descriptor)
    a = _matrix(descriptor)
    draws = law.sample((size, a.shape[0]), generator)
    values = np.einsum("ri,ij,rj->r", draws, a, draws)
    return values - law.var() * float(np.trace(a))


def _norm_squared(descriptor, generator, size):
    law = _law(descriptor)
    a = _matrix(descriptor)
    draws = law.sample((size, a.shape[1]), generator)
    return np.sum((draws @ a.T) ** 2, axis=1)


_SIMULATORS = {
    "sum": _sum,
    "u_statistic": _u_statistic,
    "norm": _norm,
    "max": _max,
    "sup_edf": _sup_edf,
    "quadratic": _quadratic,
    "norm_squared": _norm_squared,
}


def validate(descriptor):
    statistic = descriptor.get("statistic")
    if statistic not in _SIMULATORS:
        raise IncompatibleExperimentError(f"unknown statistic {statistic!r}, expected one of {STATISTICS}")
    if statistic != "sup_edf":
        require("law" in descriptor, f"a {statistic} model needs a law", IncompatibleExperimentError)
        _law(descriptor)
    return descriptor


def simulate(descriptor, generator, size):
    """``size`` independent replications of the descriptor's statistic."""
    return np.asarray(_SIMULATORS[descriptor["statistic"]](descriptor, generator, size), dtype=float)
