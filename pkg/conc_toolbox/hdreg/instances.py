"""Random regression instances with a known sparse coefficient vector."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cholesky, toeplitz

from conc_toolbox.global_vars import simulation
from conc_toolbox.utils.errors import require
from conc_toolbox.utils.rng import RngStream

DESIGNS = ("iid_gaussian", "toeplitz")
FAMILIES = ("gaussian", "poisson")


@dataclass
class RegressionInstance:
    X: np.ndarray
    y: np.ndarray
    beta_star: np.ndarray
    support: np.ndarray
    family: str
    seed: int
    sigma: Optional[float] = None
    L: Optional[float] = None
    B: Optional[float] = None
    design: dict = field(default_factory=dict)

    def __post_init__(self):
        require(self.family in FAMILIES, f"unknown family {self.family!r}")
        require(
            len(self.support) == int(np.count_nonzero(self.beta_star)),
            "support size must equal the number of nonzero coefficients",
        )

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def s(self):
        return len(self.support)

    def metadata(self):
        return {
            "family": self.family,
            "n": self.n,
            "p": self.p,
            "s": self.s,
            "seed": self.seed,
            "sigma": self.sigma,
            "L": self.L,
            "B": self.B,
            "design": self.design,
        }


def _generator(seed, stream_id):
    seed = simulation.seed if seed is None else seed
    return seed, RngStream(seed, stream_id).generator()


def _support(generator, p, s):
    require(0 <= s <= p, f"need 0 <= s <= p, got s={s}, p={p}")
    return np.sort(generator.choice(p, size=s, replace=False))


def design_matrix(n, p, design="iid_gaussian", rho=0.0, generator=None):
    """
    n x p gaussian design with identity or Toeplitz covariance rho^|i-j|.
    """
    require(design in DESIGNS, f"unknown design {design!r}, expected one of {DESIGNS}")
    generator = RngStream(simulation.seed).generator() if generator is None else generator
    Z = generator.standard_normal((n, p))
    if design == "iid_gaussian" or rho == 0:
        return Z
    require(-1 < rho < 1, f"toeplitz correlation must lie in (-1, 1), got {rho}")
    covariance = toeplitz(rho ** np.arange(p))
    return Z @ cholesky(covariance, lower=False)


def normalize_columns(X):
    """Rescale every nonzero column to Euclidean norm sqrt(n)."""
    norms = np.linalg.norm(X, axis=0)
    norms[norms == 0] = 1.0
    return X * (np.sqrt(X.shape[0]) / norms)


def gen_linear(n, p, s, sigma, design="iid_gaussian", rho=0.0, column_normalize=True, seed=None, stream_id=0):
    """
    Gaussian linear model y = X beta* + eps with s coefficients of alternating
    sign +-1 on a random support.

    Params:
        n, p, s -- Sample size, dimension and sparsity.
        sigma -- Noise standard deviation.
        design -- "iid_gaussian" or "toeplitz" (covariance rho^|i-j|).
        column_normalize -- Rescale columns so that X_j^T X_j / n = 1.
        seed, stream_id -- Identify the random stream.
    Returns:
        RegressionInstance
    """
    require(n >= 1 and p >= 1, f"need n, p >= 1, got n={n}, p={p}")
    require(sigma >= 0, f"sigma must be >= 0, got {sigma}")
    seed, generator = _generator(seed, stream_id)
    X = design_matrix(n, p, design, rho, generator)
    if column_normalize:
        X = normalize_columns(X)
    support = _support(generator, p, s)
    beta_star = np.zeros(p)
    beta_star[support] = np.where(np.arange(s) % 2 == 0, 1.0, -1.0)
    y = X @ beta_star + sigma * generator.standard_normal(n)
    return RegressionInstance(
        X, y, beta_star, support, "gaussian", seed, sigma=sigma,
        design={"kind": design, "rho": rho, "column_normalize": column_normalize},
    )


def gen_poisson(n, p, s, L, B, seed=None, stream_id=0):
    """
    Poisson regression y_i ~ Poisson(exp(x_i^T beta*)) with covariates uniform
    on [-L, L] and ||beta*||_1 = B spread evenly, with alternating signs, over s
    coordinates. B = 0 gives beta* = 0 and unit rates.
    """
    require(L > 0, f"L must be > 0, got {L}")
    require(B >= 0, f"B must be >= 0, got {B}")
    seed, generator = _generator(seed, stream_id)
    X = generator.uniform(-L, L, size=(n, p))
    beta_star = np.zeros(p)
    if B == 0 or s == 0:
        support = np.array([], dtype=int)
    else:
        support = _support(generator, p, s)
        beta_star[support] = (B / s) * np.where(np.arange(s) % 2 == 0, 1.0, -1.0)
    y = generator.poisson(np.exp(X @ beta_star)).astype(float)
    return RegressionInstance(
        X, y, beta_star, support, "poisson", seed, L=L, B=B,
        design={"kind": "uniform", "L": L},
    )
