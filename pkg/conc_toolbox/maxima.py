"""Expectation and tail bounds for maxima of arbitrarily dependent variables."""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from conc_toolbox.global_vars import simulation
from conc_toolbox.utils.distributions import as_spec
from conc_toolbox.utils.errors import require
from conc_toolbox.utils.rng import RngStream
from conc_toolbox.utils.tail_norms import OrliczSpec, TailClassParams

logger = logging.getLogger(__name__)


def crude_max_moment(n, r, moment_r_max):
    """E max|X_i| <= (n max_i E|X_i|^r)^(1/r)."""
    require(n >= 1 and r >= 1, "need n >= 1 and r >= 1")
    require(moment_r_max >= 0, f"moment must be >= 0, got {moment_r_max}")
    return (n * moment_r_max) ** (1.0 / r)


def subg_max_expect(sigma, n):
    """(E max X_i, E max |X_i|) <= (sigma sqrt(2 log n), sigma sqrt(2 log 2n))."""
    require(sigma > 0 and n >= 1, "need sigma > 0 and n >= 1")
    return sigma * math.sqrt(2.0 * math.log(n)), sigma * math.sqrt(2.0 * math.log(2 * n))


def subg_max_tail(sigma, n, t):
    """(P(max X_i > t), P(max |X_i| > t)) <= (n, 2n) exp(-t^2 / (2 sigma^2))."""
    require(sigma > 0 and n >= 1, "need sigma > 0 and n >= 1")
    single = math.exp(-(t ** 2) / (2.0 * sigma ** 2)) if t > 0 else 1.0
    return min(1.0, n * single), min(1.0, 2 * n * single)


def subgamma_max_expect(v, c, n):
    """E max X_i <= sqrt(2 v log 2n) + c log 2n."""
    require(v > 0 and c >= 0 and n >= 1, "need v > 0, c >= 0 and n >= 1")
    log_term = math.log(2 * n)
    return math.sqrt(2.0 * v * log_term) + c * log_term


def orlicz_max_expect(norms, orlicz, n=None):
    """
    E max |X_i| <= g^(-1)(n) max ||X_i||_g; for psi_theta this is
    (log(1 + n))^(1/theta) max ||X_i||_psi_theta.

    ``orlicz`` is an OrliczSpec or a theta value; n defaults to len(norms).
    """
    norms = np.atleast_1d(np.asarray(norms, dtype=float))
    n = len(norms) if n is None else n
    require(n > 0, f"need n > 0, got {n}")
    require(np.all(norms >= 0), "norms must be >= 0")
    if not isinstance(orlicz, OrliczSpec):
        orlicz = OrliczSpec.psi(float(orlicz))
    return orlicz.inverse(n) * float(np.max(norms))


def bounded_sum_max_expect(a):
    """E max_j |sum_i X_ij| <= sqrt(2 log 2p) max_j (sum_i a_ij^2)^(1/2) for |X_ij| <= a_ij, centered."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    require(np.all(a >= 0), "envelope entries must be >= 0")
    p = a.shape[1]
    return math.sqrt(2.0 * math.log(2 * p)) * float(np.max(np.sqrt(np.sum(a ** 2, axis=0))))


def bernstein_max_moment(v2, kappa, n, p, m):
    """E max_j |mean_i X_ij|^m <= [kappa log(2p) / n + (v^2 + 1) sqrt(log(2p) / n)]^m."""
    require(p >= 2, f"need p >= 2, got {p}")
    require(1 <= m <= 1 + math.log(p), f"need 1 <= m <= 1 + log p, got m={m}")
    require(v2 > 0 and kappa > 0 and n >= 1, "need v2 > 0, kappa > 0 and n >= 1")
    log_term = math.log(2 * p)
    return (kappa * log_term / n + (v2 + 1.0) * math.sqrt(log_term / n)) ** m


@dataclass(frozen=True)
class MaxModel:
    """n coordinates sharing one tail class, or carrying their own Orlicz norms."""

    n: int
    tail_class: Optional[TailClassParams] = None
    norms: Optional[Sequence[float]] = None
    orlicz: Optional[OrliczSpec] = None

    def __post_init__(self):
        require(self.n >= 1, f"need n >= 1, got {self.n}")
        require(
            (self.tail_class is None) != (self.norms is None),
            "give either a shared tail class or per-coordinate norms",
        )

    def expectation_bound(self, absolute=False):
        if self.norms is not None:
            return orlicz_max_expect(self.norms, self.orlicz or OrliczSpec.psi(2.0), self.n)
        kind = self.tail_class.tail_class
        if kind == "subG":
            plain, abs_bound = subg_max_expect(math.sqrt(self.tail_class["sigma2"]), self.n)
            return abs_bound if absolute else plain
        if kind == "subW":
            return orlicz_max_expect([self.tail_class["norm"]], self.tail_class["theta"], self.n)
        gamma = self.tail_class.as_sub_gamma()
        return subgamma_max_expect(gamma["v"], gamma["c"], self.n)


def max_ratio_trend(spec, p, n_grid=(100, 1000, 10000), replications=200, stream=None):
    """
    Monte-Carlo mean of max_i |X_i| divided by n^(1/p) along n_grid.

    Returns a DataFrame with columns n, mean_max, se, ratio and whether the
    ratio decreases along the grid.
    """
    spec = as_spec(spec)
    stream = RngStream(simulation.seed) if stream is None else stream
    rows = []
    for index, n in enumerate(n_grid):
        generator = stream.substream(index).generator()
        draws = np.abs(spec.sample((replications, int(n)), generator))
        maxima = draws.max(axis=1)
        mean = float(np.mean(maxima))
        rows.append(
            {
                "n": int(n),
                "mean_max": mean,
                "se": float(np.std(maxima, ddof=1) / math.sqrt(replications)),
                "ratio": mean / n ** (1.0 / p),
            }
        )
    frame = pd.DataFrame(rows)
    decreasing = bool(np.all(np.diff(frame["ratio"].to_numpy()) < 0))
    logger.info("max ratio trend for %r with p=%g: decreasing=%s", spec, p, decreasing)
    return frame, decreasing
