"""Scalar laws with exact moments, MGFs and certified numeric expectations.

Every law is a ``DistributionSpec`` subclass tagged by ``family`` and built from
named parameters. Sampling goes through scipy's frozen distributions driven by a
counter-based ``RngStream``; expectations that have no closed form are computed
with mpmath quadrature (continuous laws) or a truncated series whose remainder
is below the requested precision (discrete laws).
"""
import math

import numpy as np
import scipy.special
import scipy.stats
from mpmath import mp

from conc_toolbox.global_vars import tolerances
from conc_toolbox.utils.errors import MGFDomainError, ParameterDomainError, require
from conc_toolbox.utils.numerics import quad, series_sum
from conc_toolbox.utils.rng import as_generator

FAMILIES = {}


def register(cls):
    FAMILIES[cls.family] = cls
    return cls


class DistributionSpec(object):
    """A scalar law: family tag plus parameters."""

    family = None
    param_names = ()
    discrete = False
    # largest theta with E exp(a|X|^theta) < inf for some a > 0
    tail_index = math.inf

    def __init__(self, **params):
        missing = set(self.param_names) - set(params)
        unknown = set(params) - set(self.param_names)
        require(not missing, f"{self.family}: missing parameters {sorted(missing)}")
        require(not unknown, f"{self.family}: unknown parameters {sorted(unknown)}")
        self.params = {name: float(params[name]) for name in self.param_names}
        for name, value in self.params.items():
            require(math.isfinite(value), f"{self.family}: {name}={value} is not finite")
        self._validate()
        self._dist = self._scipy()

    def __repr__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    def __eq__(self, other):
        return isinstance(other, DistributionSpec) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.family, tuple(self.params.items())))

    def __getattr__(self, name):
        params = self.__dict__.get("params")
        if params is not None and name in params:
            return params[name]
        raise AttributeError(name)

    def _validate(self):
        raise NotImplementedError()

    def _scipy(self):
        raise NotImplementedError()

    def to_dict(self):
        return {"family": self.family, "params": dict(self.params)}

    # moments

    def mean(self):
        return float(self._dist.mean())

    def var(self):
        return float(self._dist.var())

    def std(self):
        return math.sqrt(self.var())

    def cdf(self, x):
        return float(self._dist.cdf(x))

    def sf(self, x):
        """P(X > x)."""
        return float(self._dist.sf(x))

    def sample(self, n, stream):
        if isinstance(n, (int, np.integer)):
            require(n >= 1, f"sample size {n} must be at least 1")
        return np.asarray(
            self._dist.rvs(size=n, random_state=as_generator(stream)), dtype=float
        )

    def moment(self, k, absolute=False, centered=False):
        require(int(k) == k and k >= 1, f"moment order {k} must be an integer >= 1")
        k = int(k)
        value = self._closed_moment(k, absolute, centered)
        if value is not None:
            return float(value)
        if not absolute:
            if not centered:
                return float(self._dist.moment(k))
            m = self.mean()
            raw = [1.0] + [float(self._dist.moment(j)) for j in range(1, k + 1)]
            return float(
                sum(math.comb(k, j) * raw[j] * (-m) ** (k - j) for j in range(k + 1))
            )
        if self.support[0] >= 0 and not centered:
            return float(self._dist.moment(k))
        center = self.mean() if centered else 0.0
        return self._expect(
            lambda x: abs(x - center) ** k,
            lambda y: k * math.log(y) if y > 0 else -math.inf,
            center,
        )

    def _closed_moment(self, k, absolute, centered):
        return None

    # exponential moments

    def mgf_domain(self):
        """Open interval of s where E exp(sX) is finite."""
        return (-math.inf, math.inf)

    def _check_mgf_domain(self, s):
        lo, hi = self.mgf_domain()
        if not lo < s < hi:
            raise MGFDomainError(f"{self!r}: MGF diverges at s={s}")

    def mgf(self, s, centered=False):
        s = float(s)
        self._check_mgf_domain(s)
        value = self._mgf(s)
        if centered:
            value *= math.exp(-s * self.mean())
        return float(value)

    def log_mgf(self, s, centered=False):
        return math.log(self.mgf(s, centered))

    def _mgf(self, s):
        return self._expect(lambda x: mp.exp(s * x), lambda y: s * y, 0.0, signed=True)

    def exponential_weight_finite(self, theta, rate):
        """Whether E exp(rate * |X - c|^theta) is finite (any fixed c)."""
        if rate <= 0 or theta < self.tail_index:
            return True
        if theta > self.tail_index:
            return False
        return rate < self.critical_rate

    critical_rate = math.inf

    def abs_central_mgf(self, r, precision=None):
        """E exp(r |X - EX|) for r > 0."""
        r = float(r)
        require(r > 0, f"abs_central_mgf needs r > 0, got {r}")
        if not self.exponential_weight_finite(1.0, r):
            raise MGFDomainError(f"{self!r}: E exp(r|X-EX|) diverges at r={r}")
        value = self._closed_abs_central_mgf(r)
        if value is not None:
            return float(value)
        center = self.mean()
        return self._expect(
            lambda x: mp.exp(r * abs(x - center)), lambda y: r * y, center, precision
        )

    def _closed_abs_central_mgf(self, r):
        return None

    def orlicz_expectation(self, theta, t, centered=False, precision=None):
        """E exp((|X - c| / t)^theta), c = EX when centered else 0."""
        require(theta > 0 and t > 0, f"need theta > 0 and t > 0, got ({theta}, {t})")
        if not self.exponential_weight_finite(theta, t ** (-theta)):
            raise MGFDomainError(f"{self!r}: E exp(|X/{t}|^{theta}) diverges")
        if not centered:
            value = self._closed_orlicz(theta, t)
            if value is not None:
                return float(value)
        center = self.mean() if centered else 0.0
        return self._expect(
            lambda x: mp.exp((abs(x - center) / t) ** theta),
            lambda y: (y / t) ** theta,
            center,
            precision,
        )

    def _closed_orlicz(self, theta, t):
        return None

    def general_expectation(self, g, t, centered=False, precision=None):
        """E g(|X - c| / t) for a non-negative evaluator g."""
        center = self.mean() if centered else 0.0

        def log_g(y):
            value = g(y / t)
            return math.log(value) if value > 0 else -math.inf

        value = self._expect(
            lambda x: g(float(abs(x - center)) / t), log_g, center, precision
        )
        if not math.isfinite(value):
            raise MGFDomainError(f"{self!r}: E g(|X|/{t}) is not finite")
        return value

    def psi_closed_form(self, theta, centered=False):
        """Closed-form psi_theta norm when one is known, else None."""
        return None

    def subg_proxy(self):
        raise ParameterDomainError(f"{self!r} has no sub-Gaussian variance proxy")

    # integration backends

    support = (-math.inf, math.inf)

    def _expect(self, f_mp, log_f, center, precision=None, signed=False):
        """
        E f(X). Continuous laws integrate f_mp(x) * pdf; discrete laws sum
        exp(log_f(y) + logpmf(k)) with y = |k - center| (or y = k when signed).
        """
        if self.discrete:
            return self._series_expect(log_f, center, precision, signed)
        lo, hi = self.support
        points = [lo] + [p for p in (center,) if lo < p < hi] + [hi]
        value = quad(lambda x: f_mp(x) * self._mp_pdf(x), points)
        if not math.isfinite(value):
            raise MGFDomainError(f"{self!r}: expectation is not finite")
        return value

    def _mp_pdf(self, x):
        raise NotImplementedError()

    def _series_expect(self, log_f, center, precision, signed):
        lo, hi = self.support

        def term(k):
            if k < lo or k > hi:
                return 0.0
            log_p = float(self._dist.logpmf(k))
            if log_p == -math.inf:
                return 0.0
            log_w = log_f(k if signed else abs(k - center))
            if log_w == -math.inf:
                return 0.0
            try:
                return math.exp(log_p + log_w)
            except OverflowError:
                raise MGFDomainError(f"{self!r}: expectation overflows")

        pivot = int(math.floor(center))
        total = 0.0
        if pivot + 1 <= hi:
            total += series_sum(term, max(pivot + 1, lo), 1, precision)
        if pivot >= lo:
            if math.isinf(lo):
                total += series_sum(term, pivot, -1, precision)
            else:
                total += sum(term(k) for k in range(int(lo), pivot + 1))
        return total


@register
class Gaussian(DistributionSpec):
    family = "gaussian"
    param_names = ("mu", "sigma")
    tail_index = 2.0

    def _validate(self):
        require(self.sigma > 0, f"gaussian sigma must be > 0, got {self.sigma}")

    def _scipy(self):
        return scipy.stats.norm(self.mu, self.sigma)

    @property
    def critical_rate(self):
        return 1.0 / (2.0 * self.sigma ** 2)

    def _mgf(self, s):
        return math.exp(self.mu * s + 0.5 * (self.sigma * s) ** 2)

    def _closed_abs_central_mgf(self, r):
        return 2.0 * math.exp(0.5 * (self.sigma * r) ** 2) * scipy.stats.norm.cdf(self.sigma * r)

    def _closed_moment(self, k, absolute, centered):
        sigma = self.sigma
        if centered or self.mu == 0:
            if absolute:
                return sigma ** k * 2 ** (k / 2) * math.gamma((k + 1) / 2) / math.sqrt(math.pi)
            return 0.0 if k % 2 else sigma ** k * scipy.special.factorial2(k - 1)
        return None

    def _closed_orlicz(self, theta, t):
        if theta == 2 and self.mu == 0:
            return t / math.sqrt(t ** 2 - 2 * self.sigma ** 2)
        return None

    def psi_closed_form(self, theta, centered=False):
        if theta == 2 and (centered or self.mu == 0):
            return math.sqrt(8.0 / 3.0) * self.sigma
        return None

    def subg_proxy(self):
        return self.sigma ** 2

    def _mp_pdf(self, x):
        return mp.npdf(x, self.mu, self.sigma)


@register
class Uniform(DistributionSpec):
    family = "uniform"
    param_names = ("a", "b")

    def _validate(self):
        require(self.b > self.a, f"uniform needs b > a, got ({self.a}, {self.b})")

    def _scipy(self):
        return scipy.stats.uniform(self.a, self.b - self.a)

    @property
    def support(self):
        return (self.a, self.b)

    def _mgf(self, s):
        if s == 0:
            return 1.0
        return math.expm1(s * self.b - s * self.a) * math.exp(s * self.a) / (s * (self.b - self.a))

    def _closed_abs_central_mgf(self, r):
        h = 0.5 * (self.b - self.a)
        return math.expm1(r * h) / (r * h)

    def _closed_moment(self, k, absolute, centered):
        h = 0.5 * (self.b - self.a)
        if centered:
            if absolute or k % 2 == 0:
                return h ** k / (k + 1)
            return 0.0
        if not absolute or self.a >= 0:
            return (self.b ** (k + 1) - self.a ** (k + 1)) / ((k + 1) * (self.b - self.a))
        return None

    def subg_proxy(self):
        return 0.25 * (self.b - self.a) ** 2

    def _mp_pdf(self, x):
        return mp.mpf(1) / (self.b - self.a)


class _FiniteSupport(DistributionSpec):
    """Laws on finitely many atoms; expectations are exact finite sums."""

    discrete = True
    atoms = ()

    def probabilities(self):
        raise NotImplementedError()

    def cdf(self, x):
        return float(sum(p for a, p in zip(self.atoms, self.probabilities()) if a <= x))

    def sf(self, x):
        return float(sum(p for a, p in zip(self.atoms, self.probabilities()) if a > x))

    def _expect(self, f_mp, log_f, center, precision=None, signed=False):
        return float(
            sum(p * float(f_mp(mp.mpf(x))) for x, p in zip(self.atoms, self.probabilities()))
        )


@register
class Bernoulli(_FiniteSupport):
    family = "bernoulli"
    param_names = ("p",)
    atoms = (0.0, 1.0)

    def _validate(self):
        require(0 < self.p < 1, f"bernoulli p must lie in (0, 1), got {self.p}")

    def _scipy(self):
        return scipy.stats.bernoulli(self.p)

    def probabilities(self):
        return (1.0 - self.p, self.p)

    def sample(self, n, stream):
        # u < p clamps cleanly at the p -> 1 boundary
        size = n if not isinstance(n, (int, np.integer)) else int(n)
        if isinstance(n, (int, np.integer)):
            require(n >= 1, f"sample size {n} must be at least 1")
        return (as_generator(stream).random(size) < self.p).astype(float)

    def _mgf(self, s):
        return 1.0 - self.p + self.p * math.exp(s)

    def _closed_abs_central_mgf(self, r):
        p = self.p
        return (1 - p) * math.exp(r * p) + p * math.exp(r * (1 - p))

    def _closed_moment(self, k, absolute, centered):
        p = self.p
        if not centered:
            return p
        if absolute:
            return (1 - p) * p ** k + p * (1 - p) ** k
        return (1 - p) * (-p) ** k + p * (1 - p) ** k

    def _closed_orlicz(self, theta, t):
        return 1.0 - self.p + self.p * math.exp(t ** (-theta))

    def psi_closed_form(self, theta, centered=False):
        if centered:
            return None
        return math.log1p(1.0 / self.p) ** (-1.0 / theta)

    def subg_proxy(self):
        return 0.25


@register
class Rademacher(_FiniteSupport):
    """Symmetric two-point law on {-M, M}, so |X| = M almost surely."""

    family = "rademacher"
    param_names = ("M",)

    def _validate(self):
        require(self.M > 0, f"rademacher scale M must be > 0, got {self.M}")

    def _scipy(self):
        return scipy.stats.rv_discrete(values=((-self.M, self.M), (0.5, 0.5)))

    @property
    def atoms(self):
        return (-self.M, self.M)

    def probabilities(self):
        return (0.5, 0.5)

    def mean(self):
        return 0.0

    def var(self):
        return self.M ** 2

    def sample(self, n, stream):
        if isinstance(n, (int, np.integer)):
            require(n >= 1, f"sample size {n} must be at least 1")
        signs = 2.0 * as_generator(stream).integers(0, 2, size=n) - 1.0
        return self.M * signs

    def _mgf(self, s):
        return math.cosh(self.M * s)

    def _closed_abs_central_mgf(self, r):
        return math.exp(r * self.M)

    def _closed_moment(self, k, absolute, centered):
        if absolute or k % 2 == 0:
            return self.M ** k
        return 0.0

    def _closed_orlicz(self, theta, t):
        return math.exp((self.M / t) ** theta)

    def psi_closed_form(self, theta, centered=False):
        return self.M / math.log(2.0) ** (1.0 / theta)

    def subg_proxy(self):
        return self.M ** 2


@register
class Exponential(DistributionSpec):
    family = "exponential"
    param_names = ("mu",)
    tail_index = 1.0
    support = (0.0, math.inf)

    def _validate(self):
        require(self.mu > 0, f"exponential mean must be > 0, got {self.mu}")

    def _scipy(self):
        return scipy.stats.expon(scale=self.mu)

    @property
    def critical_rate(self):
        return 1.0 / self.mu

    def mgf_domain(self):
        return (-math.inf, 1.0 / self.mu)

    def _mgf(self, s):
        return 1.0 / (1.0 - self.mu * s)

    def _closed_abs_central_mgf(self, r):
        u = r * self.mu
        return (math.exp(u) - math.exp(-1.0)) / (1.0 + u) + math.exp(-1.0) / (1.0 - u)

    def _closed_moment(self, k, absolute, centered):
        if not centered:
            return math.gamma(k + 1) * self.mu ** k
        return None

    def _closed_orlicz(self, theta, t):
        if theta == 1:
            return 1.0 / (1.0 - self.mu / t)
        return None

    def psi_closed_form(self, theta, centered=False):
        if theta == 1 and not centered:
            return 2.0 * self.mu
        return None

    def _mp_pdf(self, x):
        return mp.exp(-x / self.mu) / self.mu


@register
class Poisson(DistributionSpec):
    family = "poisson"
    param_names = ("lam",)
    discrete = True
    tail_index = 1.0
    support = (0, math.inf)

    def _validate(self):
        require(self.lam > 0, f"poisson rate must be > 0, got {self.lam}")

    def _scipy(self):
        return scipy.stats.poisson(self.lam)

    def _mgf(self, s):
        return math.exp(self.lam * math.expm1(s))

    def _closed_orlicz(self, theta, t):
        if theta == 1:
            return math.exp(self.lam * math.expm1(1.0 / t))
        return None

    def psi_closed_form(self, theta, centered=False):
        if theta == 1 and not centered:
            return 1.0 / math.log(math.log(2.0) / self.lam + 1.0)
        return None


@register
class Gamma(DistributionSpec):
    family = "gamma"
    param_names = ("a", "b")
    tail_index = 1.0
    support = (0.0, math.inf)

    def _validate(self):
        require(self.a > 0 and self.b > 0, f"gamma needs a, b > 0, got ({self.a}, {self.b})")

    def _scipy(self):
        return scipy.stats.gamma(self.a, scale=self.b)

    @property
    def critical_rate(self):
        return 1.0 / self.b

    def mgf_domain(self):
        return (-math.inf, 1.0 / self.b)

    def _mgf(self, s):
        return (1.0 - self.b * s) ** (-self.a)

    def _closed_moment(self, k, absolute, centered):
        if not centered:
            return self.b ** k * math.exp(math.lgamma(self.a + k) - math.lgamma(self.a))
        return None

    def _closed_orlicz(self, theta, t):
        if theta == 1:
            return (1.0 - self.b / t) ** (-self.a)
        return None

    def psi_closed_form(self, theta, centered=False):
        if theta == 1 and not centered:
            return self.b / (1.0 - 2.0 ** (-1.0 / self.a))
        return None

    def _mp_pdf(self, x):
        a, b = self.a, self.b
        return x ** (a - 1) * mp.exp(-x / b) / (mp.gamma(a) * mp.mpf(b) ** a)


@register
class ChiSquare(Gamma):
    family = "chi_square"
    param_names = ("n",)

    def _validate(self):
        require(self.n >= 1, f"chi-square degrees of freedom must be >= 1, got {self.n}")

    def __getattr__(self, name):
        params = self.__dict__.get("params")
        if params is not None:
            if name == "a":
                return params["n"] / 2.0
            if name == "b":
                return 2.0
        return super().__getattr__(name)

    def _scipy(self):
        return scipy.stats.chi2(self.n)


@register
class Weibull(DistributionSpec):
    family = "weibull"
    param_names = ("b", "theta")
    support = (0.0, math.inf)

    def _validate(self):
        require(
            self.b > 0 and self.theta > 0,
            f"weibull needs scale and shape > 0, got ({self.b}, {self.theta})",
        )

    def _scipy(self):
        return scipy.stats.weibull_min(self.theta, scale=self.b)

    @property
    def tail_index(self):
        return self.theta

    @property
    def critical_rate(self):
        return self.b ** (-self.theta)

    def mgf_domain(self):
        if self.theta > 1:
            return (-math.inf, math.inf)
        if self.theta == 1:
            return (-math.inf, 1.0 / self.b)
        # heavier than exponential: only s <= 0 converges
        return (-math.inf, math.nextafter(0.0, 1.0))

    def _closed_moment(self, k, absolute, centered):
        if not centered:
            return self.b ** k * math.gamma(1.0 + k / self.theta)
        return None

    def _closed_orlicz(self, theta, t):
        if theta == self.theta:
            return 1.0 / (1.0 - (self.b / t) ** theta)
        return None

    def psi_closed_form(self, theta, centered=False):
        if theta == self.theta and not centered:
            return self.b * 2.0 ** (1.0 / theta)
        return None

    def _mp_pdf(self, x):
        k, b = self.theta, self.b
        return (k / b) * (x / b) ** (k - 1) * mp.exp(-((x / b) ** k))


@register
class Geometric(DistributionSpec):
    """Number of trials to the first success, P(X = k) = (1 - q) q^(k-1), k >= 1."""

    family = "geometric"
    param_names = ("q",)
    discrete = True
    tail_index = 1.0
    support = (1, math.inf)

    def _validate(self):
        require(0 < self.q < 1, f"geometric q must lie in (0, 1), got {self.q}")

    def _scipy(self):
        return scipy.stats.geom(1.0 - self.q)

    @property
    def critical_rate(self):
        return -math.log(self.q)

    def mgf_domain(self):
        return (-math.inf, -math.log(self.q))

    def _mgf(self, s):
        return (1.0 - self.q) * math.exp(s) / (1.0 - self.q * math.exp(s))

    def _closed_orlicz(self, theta, t):
        if theta == 1:
            return self._mgf(1.0 / t)
        return None

    def psi_closed_form(self, theta, centered=False):
        if theta == 1 and not centered:
            return 1.0 / math.log(2.0 / (1.0 + self.q))
        return None


@register
class DiscreteLaplace(DistributionSpec):
    """P(X = k) = (1 - q) / (1 + q) q^|k| on the integers."""

    family = "discrete_laplace"
    param_names = ("q",)
    discrete = True
    tail_index = 1.0

    def _validate(self):
        require(0 < self.q < 1, f"discrete Laplace q must lie in (0, 1), got {self.q}")

    def _scipy(self):
        return scipy.stats.dlaplace(-math.log(self.q))

    @property
    def critical_rate(self):
        return -math.log(self.q)

    def mean(self):
        return 0.0

    def var(self):
        return 2.0 * self.q / (1.0 - self.q) ** 2

    def mgf_domain(self):
        r = -math.log(self.q)
        return (-r, r)

    def _mgf(self, s):
        q = self.q
        return (1 - q) ** 2 / ((1 - q * math.exp(s)) * (1 - q * math.exp(-s)))

    def _closed_abs_central_mgf(self, r):
        q, u = self.q, self.q * math.exp(r)
        return (1 - q) * (1 + u) / ((1 + q) * (1 - u))

    def _closed_orlicz(self, theta, t):
        if theta == 1:
            return self._closed_abs_central_mgf(1.0 / t)
        return None

    def psi_closed_form(self, theta, centered=False):
        if theta == 1:
            q = self.q
            return 1.0 / math.log((1 + 3 * q) / (q * (3 + q)))
        return None


# module-level operations


def make_spec(family, **params):
    if family not in FAMILIES:
        raise ParameterDomainError(f"unknown distribution family {family!r}")
    return FAMILIES[family](**params)


def spec_from_dict(data):
    """Inverse of DistributionSpec.to_dict."""
    if not isinstance(data, dict) or set(data) != {"family", "params"}:
        raise ParameterDomainError(
            f"distribution must be an object with 'family' and 'params', got {data!r}"
        )
    return make_spec(data["family"], **data["params"])


def as_spec(spec):
    return spec if isinstance(spec, DistributionSpec) else spec_from_dict(spec)


def sample(spec, stream, n):
    return as_spec(spec).sample(n, stream)


def mgf(spec, s, centered=False):
    return as_spec(spec).mgf(s, centered)


def abs_central_mgf(spec, r, precision=None):
    precision = tolerances.series_precision if precision is None else precision
    return as_spec(spec).abs_central_mgf(r, precision)


def moment(spec, k, absolute=False, centered=False):
    return as_spec(spec).moment(k, absolute, centered)


def mean(spec):
    return as_spec(spec).mean()


def variance(spec):
    return as_spec(spec).var()


def cdf(spec, x):
    return as_spec(spec).cdf(x)


def sf(spec, x):
    return as_spec(spec).sf(x)
