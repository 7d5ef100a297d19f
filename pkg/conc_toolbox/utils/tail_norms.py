"""Orlicz-type norms and conversions between tail classes."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln

from conc_toolbox.global_vars import simulation, tolerances
from conc_toolbox.utils.distributions import as_spec
from conc_toolbox.utils.errors import (InfiniteNormError, NoSolutionError,
                                       ParameterDomainError, require)
from conc_toolbox.utils.numerics import solve_decreasing, solve_increasing
from conc_toolbox.utils.rng import RngStream

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class OrliczSpec:
    """
    Either psi_theta(x) = exp(x^theta) - 1 (give ``theta``) or a general
    non-decreasing convex g with g(0) = 0 (give ``g``).
    """

    theta: Optional[float] = None
    g: Optional[Callable[[float], float]] = None
    name: str = ""

    def __post_init__(self):
        require(
            (self.theta is None) != (self.g is None),
            "OrliczSpec takes exactly one of theta or g",
        )
        if self.theta is not None:
            require(self.theta > 0, f"theta must be > 0, got {self.theta}")
            return
        require(self.g(0.0) == 0, "Orlicz function must satisfy g(0) = 0")
        grid = np.linspace(0.0, 10.0, 201)
        values = np.array([self.g(x) for x in grid])
        scale = max(1.0, float(np.max(np.abs(values))))
        require(np.all(np.diff(values) >= -1e-12 * scale), "Orlicz function must be non-decreasing")
        require(np.all(np.diff(values, 2) >= -1e-9 * scale), "Orlicz function must be convex")

    @classmethod
    def psi(cls, theta):
        return cls(theta=theta, name=f"psi_{theta:g}")

    def __call__(self, x):
        if self.theta is not None:
            return math.expm1(x ** self.theta)
        return self.g(x)

    def inverse(self, y):
        """g^{-1}(y); for psi_theta this is (log(1 + y))^(1/theta)."""
        require(y >= 0, f"Orlicz inverse needs y >= 0, got {y}")
        if self.theta is not None:
            return math.log1p(y) ** (1.0 / self.theta)
        if y == 0:
            return 0.0
        return solve_increasing(self.g, y)

    @property
    def label(self):
        return self.name or (f"psi_{self.theta:g}" if self.theta is not None else "g")


@dataclass(frozen=True)
class NormEstimate:
    value: float
    method: str
    tolerance: float
    samples_used: int = 0
    low_confidence: bool = False
    residual: float = 0.0

    def to_dict(self):
        return {
            "value": self.value,
            "method": self.method,
            "tolerance": self.tolerance,
            "samples_used": self.samples_used,
            "low_confidence": self.low_confidence,
            "residual": self.residual,
        }


_TAIL_CLASSES = {
    "subG": ("sigma2",),
    "subE": ("lam",),
    "subE2": ("lam", "alpha"),
    "subGamma": ("v", "c"),
    "subW": ("theta", "norm"),
    "bernstein": ("v2", "kappa"),
}


@dataclass(frozen=True)
class TailClassParams:
    tail_class: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        require(self.tail_class in _TAIL_CLASSES, f"unknown tail class {self.tail_class!r}")
        names = _TAIL_CLASSES[self.tail_class]
        require(
            set(self.params) == set(names),
            f"{self.tail_class} takes parameters {names}, got {sorted(self.params)}",
        )
        for name in names:
            value = self.params[name]
            # sub-Gamma allows a vanishing scale (the sub-Gaussian limit)
            ok = value >= 0 if (self.tail_class, name) == ("subGamma", "c") else value > 0
            require(ok and math.isfinite(value), f"{self.tail_class}: {name}={value} out of range")

    def __getitem__(self, name):
        return self.params[name]

    @classmethod
    def sub_gaussian(cls, sigma2):
        return cls("subG", {"sigma2": float(sigma2)})

    @classmethod
    def sub_exponential(cls, lam, alpha=None):
        if alpha is None:
            return cls("subE", {"lam": float(lam)})
        return cls("subE2", {"lam": float(lam), "alpha": float(alpha)})

    @classmethod
    def sub_gamma(cls, v, c):
        return cls("subGamma", {"v": float(v), "c": float(c)})

    @classmethod
    def sub_weibull(cls, theta, norm):
        return cls("subW", {"theta": float(theta), "norm": float(norm)})

    @classmethod
    def bernstein(cls, v2, kappa):
        return cls("bernstein", {"v2": float(v2), "kappa": float(kappa)})

    def normalized(self):
        """subE2(lam, alpha) with alpha == lam is subE(lam)."""
        if self.tail_class == "subE2" and self["alpha"] == self["lam"]:
            return TailClassParams.sub_exponential(self["lam"])
        return self

    def as_sub_gamma(self):
        """Sub-Gamma (v, c) implied by this class, where one is known."""
        kind = self.tail_class
        if kind == "subGamma":
            return self
        if kind == "subG":
            return TailClassParams.sub_gamma(self["sigma2"], 0.0)
        if kind == "subE":
            return TailClassParams.sub_gamma(self["lam"] ** 2, self["lam"])
        if kind == "subE2":
            return TailClassParams.sub_gamma(self["lam"] ** 2, self["alpha"])
        if kind == "bernstein":
            return TailClassParams.sub_gamma(self["v2"], self["kappa"])
        raise ParameterDomainError(f"{kind} has no sub-Gamma representation")

    def to_dict(self):
        return {"class": self.tail_class, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data):
        require(set(data) == {"class", "params"}, f"malformed tail class {data!r}")
        return cls(data["class"], {k: float(v) for k, v in data["params"].items()})


def psi_norm(spec, orlicz, tolerance=None, centered=False):
    """
    Orlicz norm inf{t > 0 : E g(|X - c| / t) <= 1} of a law.

    Closed forms are used when the law provides one; otherwise the defining
    equation is solved by bisection on certified expectations. Raises
    InfiniteNormError when no finite t satisfies the equation.
    """
    spec = as_spec(spec)
    tolerance = tolerances.bisection_rtol if tolerance is None else tolerance
    if orlicz.theta is not None:
        closed = spec.psi_closed_form(orlicz.theta, centered)
        if closed is not None:
            return NormEstimate(closed, "closed_form", 0.0)

        def expectation(t):
            return spec.orlicz_expectation(orlicz.theta, t, centered) - 1.0

    else:

        def expectation(t):
            return spec.general_expectation(orlicz.g, t, centered)

    scale = max(spec.std() + (0.0 if centered else abs(spec.mean())), 1e-8)
    try:
        value = solve_decreasing(expectation, 1.0, x0=scale, rtol=tolerance)
    except NoSolutionError:
        raise InfiniteNormError(f"{orlicz.label} norm of {spec!r} is infinite")
    residual = expectation(value) - 1.0
    return NormEstimate(value, "mgf_inversion", tolerance, residual=residual)


def psi2_sup_moment(spec, p_max=64, centered=False):
    """sup over p = 1..p_max of p^(-1/2) (E|X|^p)^(1/p), a cross-check for the psi_2 norm."""
    spec = as_spec(spec)
    values = [
        spec.moment(p, absolute=True, centered=centered) ** (1.0 / p) / math.sqrt(p)
        for p in range(1, p_max + 1)
    ]
    return max(values)


def psi2_to_proxy(norm):
    require(norm >= 0, f"norm must be >= 0, got {norm}")
    return 4.0 * norm ** 2


def proxy_to_psi2(sigma):
    require(sigma >= 0, f"sigma must be >= 0, got {sigma}")
    return 2.0 * math.sqrt(2.0) / math.sqrt(LOG2) * sigma


def psi1_to_subE(norm):
    require(norm >= 0, f"norm must be >= 0, got {norm}")
    return 2.0 * norm


def square_psi1(psi2_norm):
    return psi2_norm ** 2


def product_psi1(a, b):
    return a * b


def psi_theta_moment_bound(norm, theta, k):
    require(k >= 1, f"moment order must be >= 1, got {k}")
    return 2.0 * norm ** k * math.gamma(k / theta + 1.0)


def psi1_moment_bound(norm, k):
    require(k >= 1, f"moment order must be >= 1, got {k}")
    return 2.0 * norm ** k * math.factorial(int(k))


def psi_theta_tail(norm, theta, t):
    return min(1.0, 2.0 * math.exp(-((t / norm) ** theta)))


def subg_moment_bound(sigma, k):
    """E|X|^k <= (2 sigma^2)^(k/2) k Gamma(k/2) for X ~ subG(sigma^2)."""
    require(k >= 1, f"moment order must be >= 1, got {k}")
    return math.exp(0.5 * k * math.log(2.0 * sigma ** 2) + math.log(k) + gammaln(k / 2.0))


def subg_moment_root_bound(sigma, k):
    """(E|X|^k)^(1/k) <= sigma e^(1/e) sqrt(k), k >= 2."""
    require(k >= 2, f"moment order must be >= 2, got {k}")
    return sigma * math.exp(1.0 / math.e) * math.sqrt(k)


def subg_centered_mgf_bound(sigma, s):
    return math.exp(4.0 * sigma ** 2 * s ** 2)


# generalized Bernstein-Orlicz norms


def gbo_inverse(theta, L, t):
    require(theta > 0 and L >= 0 and t >= 0, "gbo_inverse needs theta > 0, L >= 0, t >= 0")
    u = math.log1p(t)
    return math.sqrt(u) + L * u ** (1.0 / theta)


def gbo_exponent(x, theta, L, tolerance=None):
    """Solve sqrt(u) + L u^(1/theta) = x for u >= 0, elementwise."""
    x = np.asarray(x, dtype=float)
    if L == 0:
        return x ** 2
    if theta == 2:
        return (x / (1.0 + L)) ** 2
    if theta == 1:
        root = 2.0 * x / (1.0 + np.sqrt(1.0 + 4.0 * L * x))
        return root ** 2
    lo = np.zeros_like(x)
    hi = np.minimum(x ** 2, (x / L) ** theta)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = np.sqrt(mid) + L * mid ** (1.0 / theta) < x
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= (tolerance or 1e-15) * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


def gbo_function(theta, L, x, tolerance=None):
    """Psi_{theta, L}(x): the inverse of gbo_inverse."""
    require(x >= 0, f"gbo_function needs x >= 0, got {x}")
    if x == 0:
        return 0.0
    u = float(gbo_exponent(x, theta, L, tolerance))
    return math.expm1(u)


def gbo_norm_from_sample(draws, theta, L, tolerance=None):
    """GBO norm of the empirical law of ``draws``."""
    tolerance = tolerances.bisection_rtol if tolerance is None else tolerance
    x = np.abs(np.asarray(draws, dtype=float))
    if not np.any(x > 0):
        return NormEstimate(0.0, "monte_carlo", tolerance, samples_used=len(x))

    def expectation(eta):
        with np.errstate(over="ignore"):
            return float(np.mean(np.expm1(gbo_exponent(x / eta, theta, L))))

    value = solve_decreasing(expectation, 1.0, x0=float(np.mean(x)), rtol=tolerance)
    with np.errstate(over="ignore"):
        psi = np.expm1(gbo_exponent(x / value, theta, L))
    se = float(np.std(psi) / math.sqrt(len(x)))
    low_confidence = not math.isfinite(se) or se > 0.05
    if low_confidence:
        logger.info("GBO norm estimate has standard error %g", se)
    return NormEstimate(
        value,
        "monte_carlo",
        tolerance,
        samples_used=len(x),
        low_confidence=low_confidence,
        residual=float(np.mean(psi)) - 1.0,
    )


def gbo_norm(spec, theta, L, samples=None, tolerance=None, stream=None, centered=False):
    """
    Monte-Carlo GBO norm. One fixed set of draws is reused for every eta so
    that the bisection sees a monotone map.
    """
    spec = as_spec(spec)
    samples = simulation.norm_samples if samples is None else int(samples)
    stream = RngStream(simulation.seed) if stream is None else stream
    draws = spec.sample(samples, stream)
    if centered:
        draws = draws - spec.mean()
    return gbo_norm_from_sample(draws, theta, L, tolerance)
